//! Concrete objectives: regularized logistic regression, lasso, elastic-net,
//! plus plain quadratics for testing.

mod linear;
mod prox;
mod quadratic;

use std::sync::Arc;

pub use linear::{logistic_loss, logistic_value_grad, LinearModel, LossKind, Sample};
pub use prox::{prox_elastic_net, prox_l1, ElasticNet};
pub use quadratic::Quadratic;

pub(crate) use quadratic::psd_spectrum;

use crate::data::Dataset;
use crate::oracle::{CompositeObjective, NoRegularizer};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RegKind {
    /// `(mu/2) ||x||^2`, folded into every smooth component.
    RidgeOnly(f64),
    /// `lambda ||x||_1`
    L1Only(f64),
    /// `lambda ||x||_1 + (mu/2) ||x||^2`, handled entirely by the prox.
    ElasticNet(f64, f64),
}

impl RegKind {
    /// Strong-convexity modulus this penalty adds to the objective.
    pub fn strong_convexity(self) -> f64 {
        match self {
            RegKind::RidgeOnly(mu) | RegKind::ElasticNet(_, mu) => mu,
            RegKind::L1Only(_) => 0.0,
        }
    }
}

/// Builds `f0 + psi` for one of the standard formulations.
///
/// Rows are used as given; unit-norm rows give `L = 1/4` (logistic) or `1`
/// (squared error) for the loss part.
pub fn build_formulation(loss: LossKind, reg: RegKind, data: Arc<Dataset>) -> Result<CompositeObjective> {
    if data.is_empty() {
        return Err(Error::invalid("cannot build a formulation on an empty dataset"));
    }
    match reg {
        RegKind::RidgeOnly(mu) => {
            let smooth = LinearModel::new(data, loss, mu)?;
            CompositeObjective::new(Arc::new(smooth), Arc::new(NoRegularizer))
        }
        RegKind::L1Only(lambda) => {
            let smooth = LinearModel::new(data, loss, 0.0)?;
            CompositeObjective::new(Arc::new(smooth), Arc::new(ElasticNet::new(lambda, 0.0)?))
        }
        RegKind::ElasticNet(lambda, mu) => {
            let smooth = LinearModel::new(data, loss, 0.0)?;
            CompositeObjective::new(Arc::new(smooth), Arc::new(ElasticNet::new(lambda, mu)?))
        }
    }
}
