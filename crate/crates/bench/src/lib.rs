//! Experiment harness for Catalyst: configuration, certified `f*`
//! estimates, plain and accelerated runs, kappa sweeps and trace CSVs.

pub mod config;
pub mod csv;
pub mod error;
pub mod experiment;
pub mod fstar;
pub mod problem;

pub use config::{ExperimentConfig, Method, Mode};
pub use error::{BenchError, Result};
pub use experiment::{execute, run_experiment, sweep_kappa, RunOutput};
pub use fstar::{estimate_fstar, FstarCache};
pub use problem::{build_problem, Problem};
