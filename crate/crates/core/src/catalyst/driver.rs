//! The accelerated outer loop and the unaccelerated baseline.

use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::schedule::{
    beta_coefficient, default_rho, delta_schedule, kappa_default, q_ratio, solve_alpha, EpsilonSchedule,
};
use super::trace::{relative_gap, OuterRecord, RunStop, SampleLog, Trace};
use super::warm_start::{warm_start_point, WarmStart};
use crate::envelope::{make_subproblem, Subproblem};
use crate::oracle::{CompositeObjective, EvalCounter};
use crate::solvers::{
    Flow, InnerSolver, MethodKind, PassInfo, PassObserver, SolveContext, StopReason, StoppingRule, DEFAULT_PASS_CAP,
};
use crate::{DenseVector, Error, Result};

/// Inner stopping criterion together with its warm start.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Criterion {
    /// Absolute accuracy `eps_k`, momentum warm start.
    C1,
    /// Relative accuracy `delta_k`, start at the prox-center.
    C2,
    /// One pass over the data, best-of-two warm start.
    C3,
    /// Absolute accuracy with the best-of-two warm start.
    C1Star,
}

impl Criterion {
    pub fn warm_start(self) -> WarmStart {
        match self {
            Criterion::C1 => WarmStart::C1,
            Criterion::C2 => WarmStart::C2,
            Criterion::C3 => WarmStart::C3,
            Criterion::C1Star => WarmStart::C1Star,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KappaSpec {
    /// Default rule for the inner method's cost structure.
    Auto,
    Value(f64),
}

/// Stop once `relative_gap(f(x), f_star) <= rel_gap`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Target {
    pub f_star: f64,
    pub rel_gap: f64,
}

impl Target {
    fn reached(&self, f: f64) -> bool {
        relative_gap(f, self.f_star) <= self.rel_gap
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CatalystConfig {
    pub kappa: KappaSpec,
    /// Strong convexity to use; defaults to the objective's `mu_total`.
    pub mu: Option<f64>,
    pub criterion: Criterion,
    pub epsilon: EpsilonSchedule,
    /// Rate in the geometric `eps_k`; defaults to `0.9 sqrt(q)`.
    pub rho: Option<f64>,
    /// Upper bound on `f(x0) - f*`; defaults to `f(x0)`, which must then be positive.
    pub gap_bound: Option<f64>,
    pub max_outer: u64,
    /// Run budget in effective passes.
    pub max_passes: f64,
    /// Safety cap of a single inner solve, in effective passes.
    pub inner_pass_cap: u64,
    pub target: Option<Target>,
    pub seed: u64,
    pub record_wall: bool,
}

impl Default for CatalystConfig {
    fn default() -> Self {
        Self {
            kappa: KappaSpec::Auto,
            mu: None,
            criterion: Criterion::C1,
            epsilon: EpsilonSchedule::Practical,
            rho: None,
            gap_bound: None,
            max_outer: 100_000,
            max_passes: 1000.0,
            inner_pass_cap: DEFAULT_PASS_CAP,
            target: None,
            seed: 0,
            record_wall: false,
        }
    }
}

/// Parameters of an unaccelerated run.
#[derive(Debug, Clone, PartialEq)]
pub struct PlainConfig {
    pub max_passes: f64,
    pub target: Option<Target>,
    pub seed: u64,
    pub record_wall: bool,
}

impl Default for PlainConfig {
    fn default() -> Self {
        Self { max_passes: 1000.0, target: None, seed: 0, record_wall: false }
    }
}

/// A failed run and everything recorded before the failure.
#[derive(Debug)]
pub struct RunFailure {
    pub error: Error,
    pub partial: Trace,
}

impl fmt::Display for RunFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({} samples recorded)", self.error, self.partial.samples.len())
    }
}

impl std::error::Error for RunFailure {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.error)
    }
}

/// Resolves `kappa` for `inner` on `obj`.
pub fn resolve_kappa(spec: KappaSpec, obj: &CompositeObjective, mu: f64, inner: &dyn InnerSolver) -> Result<f64> {
    match spec {
        KappaSpec::Value(k) if k > 0.0 && k.is_finite() => Ok(k),
        KappaSpec::Value(k) => Err(Error::invalid(format!("kappa must be positive and finite, got {k}"))),
        KappaSpec::Auto => {
            let l = match inner.kind() {
                MethodKind::FullGradient => obj.lipschitz(),
                MethodKind::Incremental => obj.smooth().lipschitz_max(),
            };
            Ok(kappa_default(inner.kind(), l, mu, obj.n_components()).kappa)
        }
    }
}

/// Records samples on pass marks; in plain mode also watches the target.
struct Recorder<'a> {
    obj: &'a CompositeObjective,
    log: SampleLog,
    n: usize,
    outer_iter: u64,
    inner_base: u64,
    f_latest: f64,
    plain: bool,
    target: Option<Target>,
    max_effective: f64,
    reached: bool,
}

impl Recorder<'_> {
    fn out_of_budget(&self, counter: &EvalCounter) -> bool {
        counter.effective_grads(self.n) as f64 >= self.max_effective
    }
}

impl PassObserver for Recorder<'_> {
    fn on_pass(&mut self, info: &PassInfo<'_>) -> Flow {
        if self.plain {
            self.f_latest = self.obj.value(info.iterate);
        }
        self.log.push(info.counter, self.outer_iter, self.inner_base + info.inner_iterations, self.f_latest);
        if self.plain && self.target.is_some_and(|t| t.reached(self.f_latest)) {
            self.reached = true;
            return Flow::Break;
        }
        if self.out_of_budget(info.counter) {
            return Flow::Break;
        }
        Flow::Continue
    }
}

fn validated_start(obj: &CompositeObjective, x0: &[f64]) -> Result<DenseVector> {
    if x0.len() != obj.dim() {
        return Err(Error::DimensionMismatch { expected: obj.dim(), got: x0.len() });
    }
    DenseVector::new(x0.to_vec())
}

fn empty_trace(obj: &CompositeObjective, x0: &[f64], kappa: f64) -> Trace {
    Trace {
        n: obj.n_components(),
        samples: Vec::new(),
        outer: Vec::new(),
        final_point: DenseVector::new(x0.to_vec()).unwrap_or_else(|_| DenseVector::zeros(x0.len())),
        stop: RunStop::MaxOuter,
        kappa,
    }
}

/// Catalyst: inexact accelerated proximal point around `inner`.
///
/// A sample is recorded on every effective-pass mark (carrying the value of
/// the latest outer iterate) and after every outer update. Only certified
/// points, or budget outputs under `C3`, become outer iterates.
pub fn catalyst_run(
    obj: &CompositeObjective,
    x0: &[f64],
    config: &CatalystConfig,
    inner: &mut dyn InnerSolver,
    counter: &mut EvalCounter,
) -> std::result::Result<Trace, Box<RunFailure>> {
    let fail = |error: Error, kappa: f64| Box::new(RunFailure { error, partial: empty_trace(obj, x0, kappa) });
    let x0v = validated_start(obj, x0).map_err(|e| fail(e, 0.0))?;
    let mu = config.mu.unwrap_or(obj.mu_total());
    if !(mu >= 0.0 && mu.is_finite()) {
        return Err(fail(Error::invalid(format!("mu must be finite and >= 0, got {mu}")), 0.0));
    }
    let kappa = resolve_kappa(config.kappa, obj, mu, inner).map_err(|e| fail(e, 0.0))?;
    let q = q_ratio(mu, kappa);
    let rho = config.rho.unwrap_or(default_rho(mu, kappa));
    if mu > 0.0 && !(rho > 0.0 && rho < q.sqrt()) {
        return Err(fail(Error::invalid(format!("rho must lie in (0, sqrt(q) = {}), got {rho}", q.sqrt())), kappa));
    }
    let f0 = obj.value(&x0v);
    let gap0 = config.gap_bound.unwrap_or(f0);
    if !(gap0 > 0.0 && gap0.is_finite()) {
        return Err(fail(
            Error::invalid(format!("schedules need a positive bound on f(x0) - f*; f(x0) = {f0}, set gap_bound")),
            kappa,
        ));
    }
    if config.max_outer == 0 {
        return Err(fail(Error::invalid("max_outer must be at least 1"), kappa));
    }

    let n = obj.n_components();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut rec = Recorder {
        obj,
        log: SampleLog::new(n, config.record_wall),
        n,
        outer_iter: 0,
        inner_base: 0,
        f_latest: f0,
        plain: false,
        target: config.target,
        max_effective: config.max_passes * n as f64,
        reached: false,
    };
    rec.log.push(counter, 0, 0, f0);

    let mut x = x0v.clone();
    let mut y = x0v.clone();
    let mut y_prev = x0v;
    let mut alpha = if mu > 0.0 { q.sqrt() } else { 1.0 };
    let mut outer = Vec::new();
    let mut stop = RunStop::MaxOuter;

    let finish = |rec: Recorder<'_>, outer: Vec<OuterRecord>, x: DenseVector, stop: RunStop| Trace {
        n,
        samples: rec.log.into_samples(),
        outer,
        final_point: x,
        stop,
        kappa,
    };

    if config.target.is_some_and(|t| t.reached(f0)) {
        return Ok(finish(rec, outer, x, RunStop::TargetReached));
    }

    for k in 1..=config.max_outer {
        let before = counter.effective_grads(n);
        let step: Result<Option<(Subproblem, crate::solvers::InnerResult)>> = (|| {
            let sub = make_subproblem(obj, &y, kappa)?;
            let z0 = if k == 1 || inner.owns_warm_start() {
                x.clone()
            } else {
                warm_start_point(config.criterion.warm_start(), &x, &y_prev, &sub, counter)?
            };
            let rule = match config.criterion {
                Criterion::C1 | Criterion::C1Star => StoppingRule::Absolute(config.epsilon.value(k, mu, rho, gap0)),
                Criterion::C2 => StoppingRule::Relative(delta_schedule(k, mu, kappa)),
                Criterion::C3 => StoppingRule::Budget(inner.iterations_per_pass(n)),
            };
            let mut ctx =
                SolveContext::new(counter, &mut rng, n).with_observer(&mut rec).with_max_passes(config.inner_pass_cap);
            let res = inner.solve(&sub, &z0, &rule, &mut ctx)?;
            if res.stop == StopReason::Interrupted {
                return Ok(None);
            }
            Ok(Some((sub, res)))
        })();
        let res = match step {
            Ok(Some((_, res))) => res,
            Ok(None) => {
                stop = RunStop::PassCap;
                break;
            }
            Err(error) => {
                let partial = finish(rec, outer, x, RunStop::MaxOuter);
                return Err(Box::new(RunFailure { error, partial }));
            }
        };
        rec.inner_base += res.inner_iterations;

        let x_new = res.point;
        let alpha_new = solve_alpha(alpha, q).map_err(|e| fail(e, kappa))?;
        let beta = beta_coefficient(alpha, alpha_new);
        let mut y_new = x_new.to_vec();
        for j in 0..y_new.len() {
            y_new[j] += beta * (x_new[j] - x[j]);
        }
        y_prev = std::mem::replace(&mut y, DenseVector::new(y_new).map_err(|e| fail(e, kappa))?);
        x = x_new;
        alpha = alpha_new;

        let f = obj.value(&x);
        rec.f_latest = f;
        rec.outer_iter = k;
        rec.log.push(counter, k, rec.inner_base, f);
        outer.push(OuterRecord {
            k,
            inner_iterations: res.inner_iterations,
            passes: (counter.effective_grads(n) - before) as f64 / n as f64,
            f_value: f,
            certified: res.satisfied,
            bound: res.certificate.as_ref().map(|c| c.bound_on_gap),
            alpha,
            beta,
        });
        if config.target.is_some_and(|t| t.reached(f)) {
            stop = RunStop::TargetReached;
            break;
        }
        if rec.out_of_budget(counter) {
            stop = RunStop::PassCap;
            break;
        }
    }
    Ok(finish(rec, outer, x, stop))
}

/// The inner method applied to `f` itself, sampled on the same pass grid.
pub fn plain_run(
    obj: &CompositeObjective,
    x0: &[f64],
    inner: &mut dyn InnerSolver,
    counter: &mut EvalCounter,
    config: &PlainConfig,
) -> std::result::Result<Trace, Box<RunFailure>> {
    let x0v =
        validated_start(obj, x0).map_err(|error| Box::new(RunFailure { error, partial: empty_trace(obj, x0, 0.0) }))?;
    let n = obj.n_components();
    let f0 = obj.value(&x0v);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut rec = Recorder {
        obj,
        log: SampleLog::new(n, config.record_wall),
        n,
        outer_iter: 0,
        inner_base: 0,
        f_latest: f0,
        plain: true,
        target: config.target,
        max_effective: config.max_passes * n as f64,
        reached: false,
    };
    rec.log.push(counter, 0, 0, f0);
    if config.target.is_some_and(|t| t.reached(f0)) {
        return Ok(Trace {
            n,
            samples: rec.log.into_samples(),
            outer: Vec::new(),
            final_point: x0v,
            stop: RunStop::TargetReached,
            kappa: 0.0,
        });
    }

    let sub = Subproblem::unsmoothed(obj);
    let result = {
        let mut ctx = SolveContext::new(counter, &mut rng, n).with_observer(&mut rec).with_max_passes(u64::MAX);
        inner.solve(&sub, &x0v, &StoppingRule::Budget(u64::MAX), &mut ctx)
    };
    let stop = if rec.reached { RunStop::TargetReached } else { RunStop::PassCap };
    match result {
        Ok(res) => Ok(Trace {
            n,
            samples: rec.log.into_samples(),
            outer: Vec::new(),
            final_point: res.point,
            stop,
            kappa: 0.0,
        }),
        Err(error) => Err(Box::new(RunFailure {
            error,
            partial: Trace {
                n,
                samples: rec.log.into_samples(),
                outer: Vec::new(),
                final_point: x0v,
                stop,
                kappa: 0.0,
            },
        })),
    }
}
