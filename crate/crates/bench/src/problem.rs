//! Dataset loading and objective construction from a config.

use std::sync::Arc;

use catalyst_core::data::{gen_synthetic, normalize_rows, parse_svmlight, Dataset};
use catalyst_core::problems::{build_formulation, LossKind, RegKind};
use catalyst_core::CompositeObjective;

use crate::config::{DataSource, ExperimentConfig};
use crate::error::{BenchError, Result};

#[derive(Debug, Clone)]
pub struct Problem {
    pub data: Arc<Dataset>,
    pub loss: LossKind,
    pub reg: RegKind,
    pub objective: CompositeObjective,
}

impl Problem {
    pub fn new(data: Arc<Dataset>, loss: LossKind, reg: RegKind) -> Result<Self> {
        let objective =
            build_formulation(loss, reg, Arc::clone(&data)).map_err(|e| BenchError::config(e.to_string()))?;
        Ok(Self { data, loss, reg, objective })
    }

    pub fn dim(&self) -> usize {
        self.objective.dim()
    }
}

pub fn load_dataset(config: &ExperimentConfig) -> Result<Dataset> {
    let data = match &config.data {
        DataSource::Synthetic(spec) => gen_synthetic(spec).map_err(|e| BenchError::config(e.to_string()))?,
        DataSource::File { path, dim } => {
            let file = std::fs::File::open(path).map_err(|e| BenchError::io(path, e))?;
            parse_svmlight(std::io::BufReader::new(file), *dim)
                .map_err(|e| BenchError::config(format!("{}: {e}", path.display())))?
        }
    };
    Ok(if config.normalize { normalize_rows(&data) } else { data })
}

pub fn build_problem(config: &ExperimentConfig) -> Result<Problem> {
    config.validate()?;
    let data = load_dataset(config)?;
    Problem::new(Arc::new(data), config.loss, config.reg_kind())
}
