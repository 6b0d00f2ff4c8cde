//! Certified estimates of the optimal value `f*`.
//!
//! Every estimate is a lower bound `f(x) - B` where `B` certifies
//! `f(x) - f* <= B`: a gradient-mapping bound when the objective is strongly
//! convex, or a Fenchel duality gap for the l1-only formulations.

use std::collections::HashMap;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::sync::{Mutex, OnceLock};

use catalyst_core::catalyst::{catalyst_run, CatalystConfig, Criterion};
use catalyst_core::envelope::{residual_gap_bound, Subproblem};
use catalyst_core::problems::{LossKind, RegKind};
use catalyst_core::solvers::IstaSolver;
use catalyst_core::{linalg, EvalCounter};
use nalgebra::{DMatrix, DVector};

use crate::config::ExperimentConfig;
use crate::error::{BenchError, Result};
use crate::problem::{build_problem, Problem};

/// Certification is required to this fraction of the run's target gap.
pub const ACCURACY_FACTOR: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FstarEstimate {
    /// Certified lower bound on `f*`.
    pub value: f64,
    /// Lowest objective value observed.
    pub f_best: f64,
    /// Certified relative accuracy `(f_best - value) / |value|`.
    pub rel_accuracy: f64,
    /// Effective passes spent.
    pub passes: f64,
}

fn rel(bound: f64, value: f64) -> f64 {
    if bound <= 0.0 {
        0.0
    } else if value == 0.0 {
        bound
    } else {
        bound / value.abs()
    }
}

#[inline]
fn sigmoid(u: f64) -> f64 {
    if u >= 0.0 {
        1.0 / (1.0 + (-u).exp())
    } else {
        let e = u.exp();
        e / (1.0 + e)
    }
}

/// Derivative of the loss at prediction `t` and its second derivative.
fn loss_derivatives(loss: LossKind, b: f64, t: f64) -> (f64, f64) {
    match loss {
        LossKind::SquaredError => (t - b, 1.0),
        LossKind::Logistic => {
            let s = sigmoid(-b * t);
            (-b * s, s * (1.0 - s))
        }
    }
}

/// Fenchel conjugate of the loss at dual value `u`.
fn loss_conjugate(loss: LossKind, b: f64, u: f64) -> f64 {
    match loss {
        LossKind::SquaredError => 0.5 * u * u + u * b,
        LossKind::Logistic => {
            let v = (-b * u).clamp(0.0, 1.0);
            let xlogx = |s: f64| if s > 0.0 { s * s.ln() } else { 0.0 };
            xlogx(v) + xlogx(1.0 - v)
        }
    }
}

/// Duality gap of `(1/n) sum loss(b_i, a_i^T x) + lambda ||x||_1` at `x`,
/// using the loss derivatives at `x`, rescaled into the dual feasible set.
pub fn l1_duality_gap(problem: &Problem, lambda: f64, x: &[f64]) -> f64 {
    let data = &problem.data;
    let n = data.n() as f64;
    let mut u = Vec::with_capacity(data.n());
    let mut corr = vec![0.0; data.dim()];
    for (row, &b) in data.rows().iter().zip(data.labels()) {
        let (d, _) = loss_derivatives(problem.loss, b, row.dot(x));
        row.axpy(d / n, &mut corr);
        u.push(d);
    }
    let sup = corr.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    let scale = if sup > lambda { lambda / sup } else { 1.0 };
    let dual =
        -u.iter().zip(data.labels()).map(|(&ui, &b)| loss_conjugate(problem.loss, b, scale * ui)).sum::<f64>() / n;
    value(problem, x) - dual
}

fn value(problem: &Problem, x: &[f64]) -> f64 {
    problem.objective.eval_value(x).unwrap_or(f64::INFINITY)
}

fn hessian(problem: &Problem, x: &[f64], ridge: f64) -> DMatrix<f64> {
    let p = problem.dim();
    let n = problem.data.n() as f64;
    let mut h = DMatrix::zeros(p, p);
    for (row, &b) in problem.data.rows().iter().zip(problem.data.labels()) {
        let (_, w) = loss_derivatives(problem.loss, b, row.dot(x));
        let w = w / n;
        for (a, &ja) in row.indices().iter().enumerate() {
            let va = w * row.values()[a];
            for (&jb, &vb) in row.indices().iter().zip(row.values()) {
                h[(ja, jb)] += va * vb;
            }
        }
    }
    for j in 0..p {
        h[(j, j)] += ridge;
    }
    h
}

const NEWTON_MAX_DIM: usize = 2000;

/// Damped Newton on a smooth ridge formulation.
fn newton(problem: &Problem, ridge: f64) -> Vec<f64> {
    let obj = &problem.objective;
    let p = problem.dim();
    let mut x = vec![0.0; p];
    let mut counter = EvalCounter::new();
    let mut f = value(problem, &x);
    for _ in 0..100 {
        let Ok(g) = obj.eval_grad_full(&x, &mut counter) else { break };
        let Some(chol) = hessian(problem, &x, ridge).cholesky() else { break };
        let d = chol.solve(&DVector::from_column_slice(&g));
        let decrement = linalg::dot(&g, d.as_slice());
        if !(decrement > 0.0) {
            break;
        }
        let mut step = 1.0;
        let mut moved = false;
        while step > 1e-12 {
            let trial: Vec<f64> = x.iter().zip(d.iter()).map(|(xi, di)| xi - step * di).collect();
            let ft = value(problem, &trial);
            if ft <= f - 1e-4 * step * decrement {
                moved = ft < f || trial != x;
                x = trial;
                f = ft;
                break;
            }
            step *= 0.5;
        }
        if !moved || decrement <= 1e-32 * f.abs().max(1e-300) {
            break;
        }
    }
    x
}

/// Lower bound `f(z) - B` and `f(z)` at the certified point near `x`.
fn certify(problem: &Problem, x: &[f64], counter: &mut EvalCounter) -> Result<(f64, f64)> {
    let obj = &problem.objective;
    if obj.mu_total() > 0.0 {
        let sub = Subproblem::unsmoothed(obj);
        let cert = residual_gap_bound(&sub, x, &sub.params(), counter)?;
        let f = value(problem, &cert.at_point);
        Ok((f - cert.bound_on_gap, f))
    } else if let RegKind::L1Only(lambda) = problem.reg {
        counter.full_passes += 1;
        Ok((value(problem, x) - l1_duality_gap(problem, lambda, x), value(problem, x)))
    } else {
        Err(BenchError::Fstar(
            "no certificate available: the objective is not strongly convex and has no l1 dual; set f_star explicitly"
                .into(),
        ))
    }
}

/// Certifies `f*` to relative accuracy `rel_tol` within `max_passes`
/// effective passes.
pub fn certify_fstar(problem: &Problem, rel_tol: f64, max_passes: f64) -> Result<FstarEstimate> {
    let obj = &problem.objective;
    let n = obj.n_components();
    let mut counter = EvalCounter::new();
    let passes = |c: &EvalCounter| c.effective_grads(n) as f64 / n as f64;
    let mut best_low = f64::NEG_INFINITY;
    let mut f_best = f64::INFINITY;

    let mut x = vec![0.0; problem.dim()];
    if let RegKind::RidgeOnly(mu) = problem.reg {
        if mu > 0.0 && problem.dim() <= NEWTON_MAX_DIM {
            x = newton(problem, mu);
        }
    }
    loop {
        let (low, f) = certify(problem, &x, &mut counter)?;
        best_low = best_low.max(low);
        f_best = f_best.min(f);
        let accuracy = rel(f_best - best_low, best_low);
        if accuracy <= rel_tol {
            return Ok(FstarEstimate { value: best_low, f_best, rel_accuracy: accuracy, passes: passes(&counter) });
        }
        let used = passes(&counter);
        if used >= max_passes {
            return Err(BenchError::Fstar(format!(
                "could not certify f* to relative accuracy {rel_tol:e} within {max_passes} passes \
                 (reached {accuracy:e}); increase fstar_max_passes"
            )));
        }
        // Catalyst-ISTA restarted from the last point
        let config = CatalystConfig {
            criterion: Criterion::C1,
            gap_bound: Some((f - low).max(f64::MIN_POSITIVE)),
            max_passes: CHUNK_PASSES.min(max_passes - used).max(1.0),
            ..CatalystConfig::default()
        };
        let mut chunk = EvalCounter::new();
        let trace = catalyst_run(obj, &x, &config, &mut IstaSolver, &mut chunk)
            .map_err(|e| BenchError::Solver { error: e.error, partial: Some(Box::new(e.partial)) })?;
        counter.full_passes += chunk.full_passes;
        counter.component_grads += chunk.component_grads;
        x = trace.final_point.into_inner();
    }
}

const CHUNK_PASSES: f64 = 200.0;

/// `(value, rel_accuracy)` per problem key, optionally persisted to a file
/// of `key<TAB>value<TAB>accuracy` lines.
#[derive(Debug, Default)]
pub struct FstarCache {
    entries: HashMap<String, (f64, f64)>,
    path: Option<PathBuf>,
}

impl FstarCache {
    pub fn new() -> Self {
        Self::default()
    }

    /// Loads (or starts) a file-backed cache.
    pub fn open(path: &Path) -> Result<Self> {
        let mut cache = Self { entries: HashMap::new(), path: Some(path.to_path_buf()) };
        match std::fs::read_to_string(path) {
            Ok(text) => {
                for (idx, line) in text.lines().enumerate() {
                    if line.trim().is_empty() {
                        continue;
                    }
                    let parts: Vec<&str> = line.split('\t').collect();
                    let parsed = match parts.as_slice() {
                        [k, v, a] => v.parse::<f64>().ok().zip(a.parse::<f64>().ok()).map(|e| (k.to_string(), e)),
                        _ => None,
                    };
                    let (k, e) = parsed.ok_or_else(|| {
                        BenchError::config(format!("{}: malformed cache line {}", path.display(), idx + 1))
                    })?;
                    cache.entries.insert(k, e);
                }
            }
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {}
            Err(e) => return Err(BenchError::io(path, e)),
        }
        Ok(cache)
    }

    /// Cached value certified to at least `rel_tol`.
    pub fn get(&self, key: &str, rel_tol: f64) -> Option<f64> {
        self.entries.get(key).filter(|(_, acc)| *acc <= rel_tol).map(|(v, _)| *v)
    }

    pub fn insert(&mut self, key: String, value: f64, rel_accuracy: f64) -> Result<()> {
        if let Some(path) = &self.path {
            let mut file = std::fs::OpenOptions::new()
                .create(true)
                .append(true)
                .open(path)
                .map_err(|e| BenchError::io(path, e))?;
            writeln!(file, "{key}\t{value:.16e}\t{rel_accuracy:.16e}").map_err(|e| BenchError::io(path, e))?;
        }
        self.entries.insert(key, (value, rel_accuracy));
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Returns the cached value or certifies a new one; the flag tells
    /// whether the value came from the cache.
    pub fn get_or_estimate(&mut self, config: &ExperimentConfig, problem: &Problem) -> Result<(f64, bool)> {
        let key = config.problem_key();
        let rel_tol = ACCURACY_FACTOR * config.target_rel_gap;
        if let Some(v) = self.get(&key, rel_tol) {
            return Ok((v, true));
        }
        let est = certify_fstar(problem, rel_tol, config.fstar_max_passes)?;
        log::info!("f* = {:.16e} certified to {:e} in {:.0} passes", est.value, est.rel_accuracy, est.passes);
        self.insert(key, est.value, est.rel_accuracy)?;
        Ok((est.value, false))
    }
}

fn memory_cache() -> &'static Mutex<FstarCache> {
    static CACHE: OnceLock<Mutex<FstarCache>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(FstarCache::new()))
}

/// `f*` for the problem of `config`: the configured value, else a cached or
/// freshly certified estimate.
pub fn estimate_fstar(config: &ExperimentConfig) -> Result<f64> {
    let problem = build_problem(config)?;
    fstar_for(config, &problem)
}

/// `f*` for an already built problem, resolved like [`estimate_fstar`].
pub fn fstar_for(config: &ExperimentConfig, problem: &Problem) -> Result<f64> {
    if let Some(v) = config.f_star {
        return Ok(v);
    }
    if let Some(path) = &config.fstar_cache {
        let mut cache = FstarCache::open(path)?;
        return cache.get_or_estimate(config, problem).map(|(v, _)| v);
    }
    let mut cache = memory_cache().lock().unwrap_or_else(|e| e.into_inner());
    cache.get_or_estimate(config, problem).map(|(v, _)| v)
}
