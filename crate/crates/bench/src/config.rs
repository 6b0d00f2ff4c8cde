//! Flat `key = value` experiment configuration.
//!
//! ```text
//! # synthetic least squares, ridge
//! data = synthetic
//! synthetic_kind = least_squares
//! n = 500
//! p = 50
//! condition = 1e4
//! loss = squared
//! reg = ridge
//! mu = 1e-4
//! method = ista
//! mode = catalyst
//! criterion = c1
//! target_rel_gap = 1e-8
//! ```
//!
//! Blank lines and lines starting with `#` are ignored. Every key may appear
//! at most once; values given on the command line replace file values.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use catalyst_core::catalyst::{Criterion, EpsilonSchedule, KappaSpec};
use catalyst_core::data::{SyntheticKind, SyntheticSpec};
use catalyst_core::problems::{LossKind, RegKind};

use crate::error::{BenchError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Ista,
    Svrg,
    Saga,
    Miso,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Plain,
    Catalyst,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Penalty {
    Ridge,
    L1,
    ElasticNet,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EpsilonKind {
    Practical,
    Theoretical,
    Shifted,
}

#[derive(Debug, Clone, PartialEq)]
pub enum DataSource {
    Synthetic(SyntheticSpec),
    /// SVMlight file; `dim` overrides the inferred feature count.
    File {
        path: PathBuf,
        dim: Option<usize>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub data: DataSource,
    pub normalize: bool,
    pub loss: LossKind,
    pub penalty: Penalty,
    pub lambda: f64,
    pub mu: f64,
    pub method: Method,
    pub mode: Mode,
    pub criterion: Criterion,
    pub kappa: KappaSpec,
    pub epsilon: EpsilonKind,
    pub gamma: f64,
    pub rho: Option<f64>,
    pub gap_bound: Option<f64>,
    pub max_outer: u64,
    pub inner_pass_cap: u64,
    /// Run budget in effective passes.
    pub max_passes: f64,
    pub target_rel_gap: f64,
    /// Known optimal value; skips estimation.
    pub f_star: Option<f64>,
    pub fstar_cache: Option<PathBuf>,
    /// Budget of the f* estimate, in effective passes.
    pub fstar_max_passes: f64,
    pub out: Option<PathBuf>,
    pub seed: u64,
    pub record_wall: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            data: DataSource::Synthetic(SyntheticSpec::default()),
            normalize: true,
            loss: LossKind::SquaredError,
            penalty: Penalty::Ridge,
            lambda: 0.0,
            mu: 0.0,
            method: Method::Svrg,
            mode: Mode::Catalyst,
            criterion: Criterion::C1,
            kappa: KappaSpec::Auto,
            epsilon: EpsilonKind::Practical,
            gamma: 0.1,
            rho: None,
            gap_bound: None,
            max_outer: 100_000,
            inner_pass_cap: catalyst_core::solvers::DEFAULT_PASS_CAP,
            max_passes: 1000.0,
            target_rel_gap: 1e-8,
            f_star: None,
            fstar_cache: None,
            fstar_max_passes: 1e6,
            out: None,
            seed: 0,
            record_wall: false,
        }
    }
}

pub const KEYS: &[&str] = &[
    "data",
    "data_file",
    "dim",
    "synthetic_kind",
    "n",
    "p",
    "condition",
    "sparsity",
    "noise",
    "data_seed",
    "normalize",
    "loss",
    "reg",
    "lambda",
    "mu",
    "method",
    "mode",
    "criterion",
    "kappa",
    "epsilon",
    "gamma",
    "rho",
    "gap_bound",
    "max_outer",
    "inner_pass_cap",
    "max_passes",
    "target_rel_gap",
    "f_star",
    "fstar_cache",
    "fstar_max_passes",
    "out",
    "seed",
    "record_wall",
];

fn bad(key: &str, value: &str, expected: &str) -> BenchError {
    BenchError::config(format!("{key} = {value:?}: expected {expected}"))
}

fn number<T: FromStr>(key: &str, value: &str, expected: &str) -> Result<T> {
    value.parse().map_err(|_| bad(key, value, expected))
}

fn real(key: &str, value: &str) -> Result<f64> {
    let v: f64 = number(key, value, "a number")?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(bad(key, value, "a finite number"))
    }
}

fn optional_real(key: &str, value: &str) -> Result<Option<f64>> {
    if value == "auto" || value == "none" {
        Ok(None)
    } else {
        real(key, value).map(Some)
    }
}

fn flag(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(bad(key, value, "true or false")),
    }
}

impl FromStr for Method {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ista" => Ok(Method::Ista),
            "svrg" => Ok(Method::Svrg),
            "saga" => Ok(Method::Saga),
            "miso" => Ok(Method::Miso),
            _ => Err(bad("method", s, "ista, svrg, saga or miso")),
        }
    }
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Ista => "ista",
            Method::Svrg => "svrg",
            Method::Saga => "saga",
            Method::Miso => "miso",
        }
    }
}

impl FromStr for Mode {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "plain" => Ok(Mode::Plain),
            "catalyst" => Ok(Mode::Catalyst),
            _ => Err(bad("mode", s, "plain or catalyst")),
        }
    }
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Plain => "plain",
            Mode::Catalyst => "catalyst",
        }
    }
}

pub fn parse_criterion(s: &str) -> Result<Criterion> {
    match s {
        "c1" => Ok(Criterion::C1),
        "c2" => Ok(Criterion::C2),
        "c3" => Ok(Criterion::C3),
        "c1star" => Ok(Criterion::C1Star),
        _ => Err(bad("criterion", s, "c1, c2, c3 or c1star")),
    }
}

pub fn criterion_str(c: Criterion) -> &'static str {
    match c {
        Criterion::C1 => "c1",
        Criterion::C2 => "c2",
        Criterion::C3 => "c3",
        Criterion::C1Star => "c1star",
    }
}

fn loss_str(l: LossKind) -> &'static str {
    match l {
        LossKind::SquaredError => "squared",
        LossKind::Logistic => "logistic",
    }
}

fn kind_str(k: SyntheticKind) -> &'static str {
    match k {
        SyntheticKind::LeastSquares => "least_squares",
        SyntheticKind::Logistic => "logistic",
    }
}

impl ExperimentConfig {
    /// Parses a config document on top of the defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut config = Self::default();
        let mut seen = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = split_pair(line).map_err(|e| BenchError::config(format!("line {}: {e}", idx + 1)))?;
            if seen.contains(&key) {
                return Err(BenchError::config(format!("line {}: duplicate key {key}", idx + 1)));
            }
            config.set(key, value).map_err(|e| BenchError::config(format!("line {}: {}", idx + 1, strip(e))))?;
            seen.push(key);
        }
        Ok(config)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| BenchError::config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Applies one `key=value` override.
    pub fn apply_override(&mut self, pair: &str) -> Result<()> {
        let (key, value) = split_pair(pair).map_err(BenchError::config)?;
        self.set(key, value)
    }

    fn synthetic_mut(&mut self, key: &str) -> Result<&mut SyntheticSpec> {
        match &mut self.data {
            DataSource::Synthetic(spec) => Ok(spec),
            DataSource::File { .. } => Err(BenchError::config(format!("{key} only applies to synthetic data"))),
        }
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "data" => match value {
                "synthetic" => {
                    if !matches!(self.data, DataSource::Synthetic(_)) {
                        self.data = DataSource::Synthetic(SyntheticSpec::default());
                    }
                }
                path => self.data = DataSource::File { path: PathBuf::from(path), dim: None },
            },
            "data_file" => self.data = DataSource::File { path: PathBuf::from(value), dim: None },
            "dim" => match &mut self.data {
                DataSource::File { dim, .. } => *dim = Some(number(key, value, "a positive integer")?),
                DataSource::Synthetic(_) => return Err(BenchError::config("dim only applies to file data")),
            },
            "synthetic_kind" => {
                self.synthetic_mut(key)?.kind = match value {
                    "least_squares" => SyntheticKind::LeastSquares,
                    "logistic" => SyntheticKind::Logistic,
                    _ => return Err(bad(key, value, "least_squares or logistic")),
                }
            }
            "n" => self.synthetic_mut(key)?.n = number(key, value, "a positive integer")?,
            "p" => self.synthetic_mut(key)?.p = number(key, value, "a positive integer")?,
            "condition" => self.synthetic_mut(key)?.condition = real(key, value)?,
            "sparsity" => self.synthetic_mut(key)?.sparsity = real(key, value)?,
            "noise" => self.synthetic_mut(key)?.noise = real(key, value)?,
            "data_seed" => self.synthetic_mut(key)?.seed = number(key, value, "an unsigned integer")?,
            "normalize" => self.normalize = flag(key, value)?,
            "loss" => {
                self.loss = match value {
                    "squared" | "least_squares" => LossKind::SquaredError,
                    "logistic" => LossKind::Logistic,
                    _ => return Err(bad(key, value, "squared or logistic")),
                }
            }
            "reg" => {
                self.penalty = match value {
                    "ridge" => Penalty::Ridge,
                    "l1" | "lasso" => Penalty::L1,
                    "elastic_net" => Penalty::ElasticNet,
                    _ => return Err(bad(key, value, "ridge, l1 or elastic_net")),
                }
            }
            "lambda" => self.lambda = real(key, value)?,
            "mu" => self.mu = real(key, value)?,
            "method" => self.method = value.parse()?,
            "mode" => self.mode = value.parse()?,
            "criterion" => self.criterion = parse_criterion(value)?,
            "kappa" => self.kappa = optional_real(key, value)?.map_or(KappaSpec::Auto, KappaSpec::Value),
            "epsilon" => {
                self.epsilon = match value {
                    "practical" => EpsilonKind::Practical,
                    "theoretical" => EpsilonKind::Theoretical,
                    "shifted" => EpsilonKind::Shifted,
                    _ => return Err(bad(key, value, "practical, theoretical or shifted")),
                }
            }
            "gamma" => self.gamma = real(key, value)?,
            "rho" => self.rho = optional_real(key, value)?,
            "gap_bound" => self.gap_bound = optional_real(key, value)?,
            "max_outer" => self.max_outer = number(key, value, "a positive integer")?,
            "inner_pass_cap" => self.inner_pass_cap = number(key, value, "a positive integer")?,
            "max_passes" => self.max_passes = real(key, value)?,
            "target_rel_gap" => self.target_rel_gap = real(key, value)?,
            "f_star" => self.f_star = optional_real(key, value)?,
            "fstar_cache" => self.fstar_cache = (value != "none").then(|| PathBuf::from(value)),
            "fstar_max_passes" => self.fstar_max_passes = real(key, value)?,
            "out" => self.out = (value != "none").then(|| PathBuf::from(value)),
            "seed" => self.seed = number(key, value, "an unsigned integer")?,
            "record_wall" => self.record_wall = flag(key, value)?,
            _ => return Err(BenchError::config(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    /// Checks ranges and that referenced files exist.
    pub fn validate(&self) -> Result<()> {
        match &self.data {
            DataSource::Synthetic(spec) => spec.validate().map_err(|e| BenchError::config(e.to_string()))?,
            DataSource::File { path, dim } => {
                if !path.is_file() {
                    return Err(BenchError::config(format!("data file {} does not exist", path.display())));
                }
                if *dim == Some(0) {
                    return Err(BenchError::config("dim must be at least 1"));
                }
            }
        }
        if self.lambda < 0.0 || self.mu < 0.0 {
            return Err(BenchError::config("lambda and mu must be non-negative"));
        }
        if self.penalty == Penalty::Ridge && self.lambda != 0.0 {
            return Err(BenchError::config("lambda is set but reg = ridge has no l1 term"));
        }
        if let KappaSpec::Value(k) = self.kappa {
            if k <= 0.0 {
                return Err(BenchError::config("kappa must be positive"));
            }
        }
        if self.gamma <= 0.0 {
            return Err(BenchError::config("gamma must be positive"));
        }
        if self.max_outer == 0 || self.inner_pass_cap == 0 {
            return Err(BenchError::config("max_outer and inner_pass_cap must be at least 1"));
        }
        if !(self.max_passes > 0.0 && self.fstar_max_passes > 0.0) {
            return Err(BenchError::config("max_passes and fstar_max_passes must be positive"));
        }
        if !(self.target_rel_gap > 0.0) {
            return Err(BenchError::config("target_rel_gap must be positive"));
        }
        Ok(())
    }

    pub fn reg_kind(&self) -> RegKind {
        match self.penalty {
            Penalty::Ridge => RegKind::RidgeOnly(self.mu),
            Penalty::L1 => RegKind::L1Only(self.lambda),
            Penalty::ElasticNet => RegKind::ElasticNet(self.lambda, self.mu),
        }
    }

    pub fn epsilon_schedule(&self) -> EpsilonSchedule {
        match self.epsilon {
            EpsilonKind::Practical => EpsilonSchedule::Practical,
            EpsilonKind::Theoretical => EpsilonSchedule::Theoretical { gamma: self.gamma },
            EpsilonKind::Shifted => EpsilonSchedule::Shifted { gamma: self.gamma },
        }
    }

    /// Identifies the dataset and formulation, i.e. the optimization
    /// problem independently of how it is solved.
    pub fn problem_key(&self) -> String {
        let data = match &self.data {
            DataSource::Synthetic(s) => format!(
                "synthetic:{}:{}:{}:{:?}:{:?}:{:?}:{}",
                kind_str(s.kind),
                s.n,
                s.p,
                s.condition,
                s.sparsity,
                s.noise,
                s.seed
            ),
            DataSource::File { path, dim } => {
                let len = std::fs::metadata(path).map(|m| m.len()).unwrap_or(0);
                format!("file:{}:{len}:{dim:?}", path.display())
            }
        };
        format!(
            "{data}|normalize={}|loss={}|reg={}|lambda={:?}|mu={:?}",
            self.normalize,
            loss_str(self.loss),
            self.penalty_str(),
            self.lambda,
            self.mu
        )
    }

    fn penalty_str(&self) -> &'static str {
        match self.penalty {
            Penalty::Ridge => "ridge",
            Penalty::L1 => "l1",
            Penalty::ElasticNet => "elastic_net",
        }
    }

    /// Renders a document that parses back to `self`.
    pub fn render(&self) -> String {
        let mut s = String::new();
        let mut put = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        match &self.data {
            DataSource::Synthetic(spec) => {
                put("data", "synthetic".into());
                put("synthetic_kind", kind_str(spec.kind).into());
                put("n", spec.n.to_string());
                put("p", spec.p.to_string());
                put("condition", format!("{:?}", spec.condition));
                put("sparsity", format!("{:?}", spec.sparsity));
                put("noise", format!("{:?}", spec.noise));
                put("data_seed", spec.seed.to_string());
            }
            DataSource::File { path, dim } => {
                put("data_file", path.display().to_string());
                if let Some(d) = dim {
                    put("dim", d.to_string());
                }
            }
        }
        let opt = |v: Option<f64>| v.map_or("auto".to_string(), |x| format!("{x:?}"));
        put("normalize", self.normalize.to_string());
        put("loss", loss_str(self.loss).into());
        put("reg", self.penalty_str().into());
        put("lambda", format!("{:?}", self.lambda));
        put("mu", format!("{:?}", self.mu));
        put("method", self.method.as_str().into());
        put("mode", self.mode.as_str().into());
        put("criterion", criterion_str(self.criterion).into());
        put(
            "kappa",
            match self.kappa {
                KappaSpec::Auto => "auto".into(),
                KappaSpec::Value(k) => format!("{k:?}"),
            },
        );
        put(
            "epsilon",
            match self.epsilon {
                EpsilonKind::Practical => "practical",
                EpsilonKind::Theoretical => "theoretical",
                EpsilonKind::Shifted => "shifted",
            }
            .into(),
        );
        put("gamma", format!("{:?}", self.gamma));
        put("rho", opt(self.rho));
        put("gap_bound", opt(self.gap_bound));
        put("max_outer", self.max_outer.to_string());
        put("inner_pass_cap", self.inner_pass_cap.to_string());
        put("max_passes", format!("{:?}", self.max_passes));
        put("target_rel_gap", format!("{:?}", self.target_rel_gap));
        put("f_star", opt(self.f_star));
        put("fstar_cache", self.fstar_cache.as_ref().map_or("none".into(), |p| p.display().to_string()));
        put("fstar_max_passes", format!("{:?}", self.fstar_max_passes));
        put("out", self.out.as_ref().map_or("none".into(), |p| p.display().to_string()));
        put("seed", self.seed.to_string());
        put("record_wall", self.record_wall.to_string());
        s
    }
}

fn split_pair(line: &str) -> std::result::Result<(&str, &str), String> {
    let (k, v) = line.split_once('=').ok_or_else(|| format!("expected key = value, got {line:?}"))?;
    let (k, v) = (k.trim(), v.trim());
    if k.is_empty() {
        return Err("empty key".into());
    }
    if v.is_empty() {
        return Err(format!("empty value for {k}"));
    }
    Ok((k, v))
}

fn strip(e: BenchError) -> String {
    match e {
        BenchError::Config(msg) => msg,
        other => other.to_string(),
    }
}
