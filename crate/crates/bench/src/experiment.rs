//! Run orchestration: plain and accelerated runs, and the kappa sweep.

use std::path::{Path, PathBuf};

use catalyst_core::catalyst::{
    catalyst_run, plain_run, relative_gap, resolve_kappa, CatalystConfig, KappaSpec, PlainConfig, RunFailure, Target,
    Trace,
};
use catalyst_core::solvers::{InnerSolver, IstaSolver, MisoSolver, SagaSolver, SvrgSolver};
use catalyst_core::EvalCounter;

use crate::config::{ExperimentConfig, Method, Mode};
use crate::csv::emit_csv;
use crate::error::{BenchError, Result};
use crate::fstar::fstar_for;
use crate::problem::{build_problem, Problem};

pub fn make_solver(method: Method) -> Box<dyn InnerSolver> {
    match method {
        Method::Ista => Box::new(IstaSolver),
        Method::Svrg => Box::new(SvrgSolver),
        Method::Saga => Box::new(SagaSolver),
        Method::Miso => Box::new(MisoSolver::new()),
    }
}

pub fn catalyst_config(config: &ExperimentConfig, f_star: Option<f64>) -> CatalystConfig {
    CatalystConfig {
        kappa: config.kappa,
        mu: None,
        criterion: config.criterion,
        epsilon: config.epsilon_schedule(),
        rho: config.rho,
        gap_bound: config.gap_bound,
        max_outer: config.max_outer,
        max_passes: config.max_passes,
        inner_pass_cap: config.inner_pass_cap,
        target: f_star.map(|f_star| Target { f_star, rel_gap: config.target_rel_gap }),
        seed: config.seed,
        record_wall: config.record_wall,
    }
}

#[allow(clippy::boxed_local)]
fn failure(e: Box<RunFailure>) -> BenchError {
    let RunFailure { error, partial } = *e;
    BenchError::Solver { error, partial: Some(Box::new(partial)) }
}

/// Runs `config` on an already built problem. The trace is returned whether
/// or not the target was reached.
pub fn execute(config: &ExperimentConfig, problem: &Problem, f_star: Option<f64>) -> Result<Trace> {
    let mut solver = make_solver(config.method);
    let mut counter = EvalCounter::new();
    let x0 = vec![0.0; problem.dim()];
    let obj = &problem.objective;
    match config.mode {
        Mode::Plain => {
            let plain = PlainConfig {
                max_passes: config.max_passes,
                target: f_star.map(|f_star| Target { f_star, rel_gap: config.target_rel_gap }),
                seed: config.seed,
                record_wall: config.record_wall,
            };
            plain_run(obj, &x0, solver.as_mut(), &mut counter, &plain).map_err(failure)
        }
        Mode::Catalyst => {
            catalyst_run(obj, &x0, &catalyst_config(config, f_star), solver.as_mut(), &mut counter).map_err(failure)
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub trace: Trace,
    pub f_star: f64,
}

impl RunOutput {
    pub fn final_rel_gap(&self) -> f64 {
        self.trace.last().map_or(f64::INFINITY, |s| relative_gap(s.f_value, self.f_star))
    }
}

/// Estimates (or looks up) `f*`, runs, and checks the target. A run that
/// stops short of the target yields [`BenchError::TargetMissed`] with the
/// full trace.
pub fn run_experiment(config: &ExperimentConfig) -> Result<RunOutput> {
    let problem = build_problem(config)?;
    let f_star = fstar_for(config, &problem)?;
    run_on(config, &problem, f_star)
}

/// Runs `config` against a known `f*` and checks the target.
pub fn run_on(config: &ExperimentConfig, problem: &Problem, f_star: f64) -> Result<RunOutput> {
    let trace = execute(config, problem, Some(f_star))?;
    let out = RunOutput { trace, f_star };
    if !out.trace.reached_target() {
        let passes = out.trace.last().map_or(0.0, |s| s.effective_grads as f64 / out.trace.n as f64);
        return Err(BenchError::TargetMissed {
            passes,
            rel_gap: out.final_rel_gap(),
            target: config.target_rel_gap,
            trace: Box::new(out.trace),
        });
    }
    Ok(out)
}

/// Grid exponents of the kappa sweep: `kappa = 10^i kappa_0`.
pub const SWEEP_EXPONENTS: [i32; 5] = [-2, -1, 0, 1, 2];

#[derive(Debug)]
pub struct SweepPoint {
    pub exponent: i32,
    pub kappa: f64,
    pub result: Result<RunOutput>,
}

/// `out` with `.k<i>` inserted before the extension.
pub fn sweep_path(out: &Path, exponent: i32) -> PathBuf {
    let stem = out.file_stem().map_or("sweep".into(), |s| s.to_string_lossy().into_owned());
    let ext = out.extension().map_or("csv".into(), |e| e.to_string_lossy().into_owned());
    out.with_file_name(format!("{stem}.k{exponent}.{ext}"))
}

/// Runs the grid in parallel, one isolated run (and CSV, when `out` is set)
/// per value.
pub fn sweep_kappa(config: &ExperimentConfig) -> Result<Vec<SweepPoint>> {
    if config.mode != Mode::Catalyst {
        return Err(BenchError::config("sweep-kappa needs mode = catalyst"));
    }
    let problem = build_problem(config)?;
    let f_star = fstar_for(config, &problem)?;
    let base = match config.kappa {
        KappaSpec::Value(k) => k,
        KappaSpec::Auto => {
            let solver = make_solver(config.method);
            resolve_kappa(KappaSpec::Auto, &problem.objective, problem.objective.mu_total(), solver.as_ref())?
        }
    };
    let points = std::thread::scope(|scope| {
        let handles: Vec<_> = SWEEP_EXPONENTS
            .iter()
            .map(|&i| {
                let kappa = base * 10f64.powi(i);
                let mut local = config.clone();
                local.kappa = KappaSpec::Value(kappa);
                let problem = &problem;
                scope.spawn(move || {
                    let result = run_on(&local, problem, f_star);
                    if let Some(out) = &local.out {
                        let path = sweep_path(out, i);
                        let trace = match &result {
                            Ok(r) => Some(&r.trace),
                            Err(e) => e.partial_trace(),
                        };
                        if let Some(t) = trace {
                            if let Err(e) = emit_csv(t, f_star, &path) {
                                return SweepPoint { exponent: i, kappa, result: Err(e) };
                            }
                        }
                    }
                    SweepPoint { exponent: i, kappa, result }
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("sweep worker panicked")).collect()
    });
    Ok(points)
}
