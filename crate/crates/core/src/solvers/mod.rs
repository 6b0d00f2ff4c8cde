//! Inner methods for the Catalyst sub-problems.
//!
//! Every solver consumes a [`Subproblem`], a start point and a
//! [`StoppingRule`], and reports the point the outer loop is allowed to use:
//! the certified point for accuracy rules, the last iterate for budgets.
//! Running a solver on [`Subproblem::unsmoothed`] gives the plain,
//! unaccelerated method.

mod exact;
mod ista;
mod miso;
mod rate;
mod saga;
mod svrg;

use rand_chacha::ChaCha8Rng;

pub use exact::ExactQuadraticSolver;
pub use ista::{ista_solve, IstaSolver};
pub use miso::{miso_solve, MisoSolver, MisoState, MisoStats};
pub use rate::contraction_estimate;
pub use saga::{saga_solve, SagaSolver};
pub use svrg::{svrg_solve, SvrgSolver};

use crate::envelope::{check_c1, check_c2, Certificate, Subproblem};
use crate::oracle::EvalCounter;
use crate::{Error, Result};

/// Default per-sub-problem safety cap, in effective passes.
pub const DEFAULT_PASS_CAP: u64 = 1000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StoppingRule {
    /// `h(z) - h* <= eps`
    Absolute(f64),
    /// `h(z) - h* <= (delta kappa / 2) ||z - y||^2`, `y` the sub-problem center.
    Relative(f64),
    /// Fixed number of iterations, never certified.
    Budget(u64),
}

impl StoppingRule {
    pub fn validate(&self) -> Result<()> {
        match *self {
            StoppingRule::Absolute(eps) if !(eps > 0.0) => {
                Err(Error::invalid(format!("absolute accuracy must be positive, got {eps}")))
            }
            StoppingRule::Relative(delta) if !(delta > 0.0 && delta < 1.0) => {
                Err(Error::invalid(format!("relative accuracy must lie in (0, 1), got {delta}")))
            }
            StoppingRule::Budget(0) => Err(Error::invalid("iteration budget must be at least 1")),
            _ => Ok(()),
        }
    }

    /// Whether `cert` satisfies an accuracy rule. Budgets are never satisfied
    /// by a certificate.
    pub fn accepts(&self, cert: &Certificate, sub: &Subproblem) -> bool {
        match *self {
            StoppingRule::Absolute(eps) => check_c1(cert, eps),
            StoppingRule::Relative(delta) => check_c2(cert, delta, sub.kappa(), sub.center()),
            StoppingRule::Budget(_) => false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    /// The accuracy rule was certified.
    Satisfied,
    /// The iteration budget ran out.
    BudgetExhausted,
    /// A pass observer asked to stop.
    Interrupted,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InnerResult {
    /// The point handed back to the caller: certified point when satisfied.
    pub point: crate::DenseVector,
    pub inner_iterations: u64,
    /// Last certificate computed, if any.
    pub certificate: Option<Certificate>,
    pub satisfied: bool,
    pub stop: StopReason,
}

impl InnerResult {
    fn certified(cert: Certificate, iterations: u64) -> Self {
        InnerResult {
            point: cert.at_point.clone(),
            inner_iterations: iterations,
            certificate: Some(cert),
            satisfied: true,
            stop: StopReason::Satisfied,
        }
    }

    fn unfinished(
        point: Vec<f64>,
        iterations: u64,
        certificate: Option<Certificate>,
        stop: StopReason,
    ) -> Result<Self> {
        Ok(InnerResult {
            point: crate::DenseVector::new(point)?,
            inner_iterations: iterations,
            certificate,
            satisfied: false,
            stop,
        })
    }
}

/// Cost structure of a method, used for κ selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MethodKind {
    FullGradient,
    Incremental,
}

/// What the observer sees at each effective-pass mark.
#[derive(Debug)]
pub struct PassInfo<'a> {
    pub counter: &'a EvalCounter,
    /// Iterations done by the current solve.
    pub inner_iterations: u64,
    /// Current iterate of the inner method.
    pub iterate: &'a [f64],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Flow {
    Continue,
    Break,
}

/// Hook ticked every time the effective-gradient count crosses a multiple of `n`.
pub trait PassObserver {
    fn on_pass(&mut self, info: &PassInfo<'_>) -> Flow;
}

/// Mutable resources one solve borrows from its run.
pub struct SolveContext<'a> {
    pub counter: &'a mut EvalCounter,
    pub rng: &'a mut ChaCha8Rng,
    observer: Option<&'a mut dyn PassObserver>,
    n: u64,
    start: u64,
    next_mark: u64,
    max_passes: u64,
    best: Option<Certificate>,
}

impl<'a> SolveContext<'a> {
    pub fn new(counter: &'a mut EvalCounter, rng: &'a mut ChaCha8Rng, n: usize) -> Self {
        let n = n.max(1) as u64;
        let start = counter.effective_grads(n as usize);
        SolveContext {
            counter,
            rng,
            observer: None,
            n,
            start,
            next_mark: (start / n + 1) * n,
            max_passes: DEFAULT_PASS_CAP,
            best: None,
        }
    }

    pub fn with_observer(mut self, observer: &'a mut dyn PassObserver) -> Self {
        self.observer = Some(observer);
        self
    }

    /// Safety cap in effective passes for this solve.
    pub fn with_max_passes(mut self, passes: u64) -> Self {
        self.max_passes = passes;
        self
    }

    /// Effective passes spent since this context was created.
    pub fn passes_used(&self) -> f64 {
        (self.counter.effective_grads(self.n as usize) - self.start) as f64 / self.n as f64
    }

    pub(crate) fn note(&mut self, cert: &Certificate) {
        if self.best.as_ref().is_none_or(|b| cert.bound_on_gap < b.bound_on_gap) {
            self.best = Some(cert.clone());
        }
    }

    /// Called by solvers after each unit of work. Fires the observer on pass
    /// marks and enforces the safety cap.
    pub(crate) fn tick(&mut self, iterations: u64, iterate: &[f64]) -> Result<Flow> {
        let eff = self.counter.effective_grads(self.n as usize);
        let mut flow = Flow::Continue;
        if eff >= self.next_mark {
            self.next_mark = (eff / self.n + 1) * self.n;
            if let Some(obs) = self.observer.as_deref_mut() {
                flow = obs.on_pass(&PassInfo { counter: self.counter, inner_iterations: iterations, iterate });
            }
        }
        if flow == Flow::Continue && eff - self.start > self.max_passes.saturating_mul(self.n) {
            let best = self.best.take();
            return Err(Error::NonConvergence {
                passes: (eff - self.start) / self.n,
                best_gap: best.as_ref().map_or(f64::INFINITY, |c| c.bound_on_gap),
                best_certificate: best.map(Box::new),
            });
        }
        Ok(flow)
    }
}

/// An inner method `M`.
pub trait InnerSolver: Send {
    fn name(&self) -> &'static str;

    fn kind(&self) -> MethodKind;

    /// Iterations making up one effective pass over the data; the one-pass
    /// budget.
    fn iterations_per_pass(&self, n: usize) -> u64;

    fn solve(
        &mut self,
        sub: &Subproblem,
        z0: &[f64],
        rule: &StoppingRule,
        ctx: &mut SolveContext<'_>,
    ) -> Result<InnerResult>;

    /// True when the solver picks its own start point across sub-problems and
    /// ignores `z0` after the first call.
    fn owns_warm_start(&self) -> bool {
        false
    }
}

pub(crate) fn check_start(sub: &Subproblem, z0: &[f64], rule: &StoppingRule) -> Result<()> {
    if z0.len() != sub.dim() {
        return Err(Error::DimensionMismatch { expected: sub.dim(), got: z0.len() });
    }
    if !crate::linalg::all_finite(z0) {
        return Err(Error::NonFinite("inner start point".into()));
    }
    rule.validate()
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::envelope::make_subproblem;
    use crate::DenseVector;

    #[test]
    fn rule_validation() {
        assert!(StoppingRule::Absolute(0.0).validate().is_err());
        assert!(StoppingRule::Relative(1.0).validate().is_err());
        assert!(StoppingRule::Budget(0).validate().is_err());
        assert!(StoppingRule::Relative(0.5).validate().is_ok());
    }

    struct Stopper(u32);

    impl PassObserver for Stopper {
        fn on_pass(&mut self, _info: &PassInfo<'_>) -> Flow {
            self.0 += 1;
            if self.0 >= 3 {
                Flow::Break
            } else {
                Flow::Continue
            }
        }
    }

    #[test]
    fn observer_and_cap() {
        let f = testing::least_squares(20, 4, 0.0, 1);
        let sub = make_subproblem(&f, &DenseVector::zeros(4), 1e-9).unwrap();
        let mut counter = EvalCounter::new();
        let mut rng = testing::rng(0);
        let mut stop = Stopper(0);
        let mut ctx = SolveContext::new(&mut counter, &mut rng, 20).with_observer(&mut stop);
        let res = IstaSolver.solve(&sub, &[0.0; 4], &StoppingRule::Absolute(1e-300), &mut ctx).unwrap();
        assert_eq!(res.stop, StopReason::Interrupted);
        assert_eq!(counter.full_passes, 3);

        let mut counter = EvalCounter::new();
        let mut ctx = SolveContext::new(&mut counter, &mut rng, 20).with_max_passes(5);
        match IstaSolver.solve(&sub, &[0.0; 4], &StoppingRule::Absolute(1e-300), &mut ctx) {
            Err(Error::NonConvergence { passes, best_certificate, .. }) => {
                assert_eq!(passes, 6);
                assert!(best_certificate.is_some());
            }
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }
}
