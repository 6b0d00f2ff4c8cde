//! MISO with proximal support and a native duality-gap certificate.
//!
//! Each component keeps a quadratic lower bound of `f_i` built at the point
//! where it was last visited,
//!
//! ```text
//! l_i(x) = a_i + <v_i, x> + (mu_s / 2) ||x||^2,   v_i = grad f_i(z_i) - mu_s z_i,
//! ```
//!
//! `mu_s` being the strong convexity of every component. The model
//! `d(x) = mean_i l_i(x) + (kappa/2) ||x - y||^2 + psi(x)` lower-bounds `h`,
//! and its minimizer is `z = prox_{psi / sigma}((kappa y - mean v) / sigma)`
//! with `sigma = kappa + mu_s`. The gap `h(z) - d(z)` therefore certifies `z`.
//!
//! Surrogates do not depend on the prox-center, so a state carried over to a
//! new center `y'` is exactly the dual shift `d + (kappa/2)(||x - y'||^2 - ||x - y||^2)`,
//! and its new minimizer is the warm start.

use rand::Rng;

use super::{check_start, Flow, InnerResult, InnerSolver, MethodKind, SolveContext, StopReason, StoppingRule};
use crate::envelope::{Certificate, CertificateKind, Subproblem};
use crate::oracle::EvalCounter;
use crate::{linalg, DenseVector, Error, Result};

/// Relative tolerance on `d(z) <= h(z)` before it is reported as a violation.
const LOWER_BOUND_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct MisoState {
    p: usize,
    kappa: f64,
    mu_s: f64,
    /// Row `i` holds `v_i`.
    v: Vec<f64>,
    a: Vec<f64>,
    v_mean: Vec<f64>,
    a_mean: f64,
    /// Minimizer of the current model.
    z: Vec<f64>,
    /// Mixing weight of new surrogates.
    delta: f64,
}

impl MisoState {
    /// Builds every surrogate at `z0` (one sequential pass) and moves to the
    /// model minimizer.
    pub fn init(sub: &Subproblem, z0: &[f64], counter: &mut EvalCounter) -> Result<Self> {
        let n = sub.n_components();
        let p = sub.dim();
        if z0.len() != p {
            return Err(Error::DimensionMismatch { expected: p, got: z0.len() });
        }
        let smooth = sub.base().smooth();
        let mu_s = smooth.strong_convexity();
        let sigma = sub.kappa() + mu_s;
        if !(sigma > 0.0) {
            return Err(Error::Unsupported(
                "MISO needs strongly convex components; use it inside Catalyst for objectives with mu = 0".into(),
            ));
        }
        let spread = smooth.lipschitz_max() - mu_s;
        let delta = if spread > 0.0 { (n as f64 * sigma / (2.0 * spread)).min(1.0) } else { 1.0 };

        let mut v = vec![0.0; n * p];
        let mut a = vec![0.0; n];
        let z_sq = linalg::norm_sq(z0);
        for (i, row) in v.chunks_exact_mut(p).enumerate() {
            smooth.add_component_gradient(i, z0, 1.0, row);
            a[i] = smooth.component_value(i, z0) - linalg::dot(row, z0) + 0.5 * mu_s * z_sq;
            linalg::axpy(-mu_s, z0, row);
        }
        counter.full_passes += 1;
        let mut state =
            MisoState { p, kappa: sub.kappa(), mu_s, v, a, v_mean: vec![0.0; p], a_mean: 0.0, z: z0.to_vec(), delta };
        state.refresh_means();
        state.minimize(sub, counter);
        Ok(state)
    }

    /// Current model minimizer `z_t`.
    pub fn iterate(&self) -> &[f64] {
        &self.z
    }

    pub fn mixing_weight(&self) -> f64 {
        self.delta
    }

    fn compatible(&self, sub: &Subproblem) -> bool {
        self.p == sub.dim() && self.a.len() == sub.n_components() && self.kappa == sub.kappa()
    }

    fn refresh_means(&mut self) {
        let n = self.a.len() as f64;
        self.v_mean.fill(0.0);
        for row in self.v.chunks_exact(self.p) {
            linalg::axpy(1.0, row, &mut self.v_mean);
        }
        linalg::scale(1.0 / n, &mut self.v_mean);
        self.a_mean = self.a.iter().sum::<f64>() / n;
    }

    /// `z = prox_{psi/sigma}((kappa y - mean v) / sigma)`
    fn minimize(&mut self, sub: &Subproblem, counter: &mut EvalCounter) {
        let sigma = self.kappa + self.mu_s;
        let w: Vec<f64> = sub.center().iter().zip(&self.v_mean).map(|(y, v)| (self.kappa * y - v) / sigma).collect();
        sub.base().prox_into(&w, 1.0 / sigma, &mut self.z, counter);
    }

    /// `mean_i l_i(x)`
    fn model_smooth(&self, x: &[f64]) -> f64 {
        self.a_mean + linalg::dot(&self.v_mean, x) + 0.5 * self.mu_s * linalg::norm_sq(x)
    }

    /// `d(z_t)`, the model value at its minimizer. Free.
    pub fn dual_value(&self, sub: &Subproblem) -> f64 {
        let z = &self.z;
        let prox_term = 0.5 * self.kappa * linalg::dist_sq(z, sub.center());
        self.model_smooth(z) + prox_term + sub.base().reg().value(z)
    }

    /// `h(z_t) - d(z_t)`, computed without the terms shared by both sides.
    pub fn duality_gap(&self, sub: &Subproblem) -> f64 {
        sub.base().smooth().value(&self.z) - self.model_smooth(&self.z)
    }

    /// Recomputes the means and certifies `z_t`; fails if the model is not a
    /// lower bound.
    fn certify(&mut self, sub: &Subproblem) -> Result<(Certificate, f64)> {
        self.refresh_means();
        let gap = self.duality_gap(sub);
        let h = sub.value(&self.z);
        if gap < -LOWER_BOUND_TOL * h.abs().max(1.0) {
            return Err(Error::ContractViolation(format!(
                "MISO lower bound exceeds the objective by {:e} (h = {h}); a component is not convex with the declared constants",
                -gap
            )));
        }
        let cert = Certificate {
            kind: CertificateKind::DualGap,
            bound_on_gap: gap.max(0.0),
            at_point: DenseVector::new(self.z.clone())?,
        };
        Ok((cert, gap / h.abs().max(1.0)))
    }

    /// One incremental step on component `i`.
    fn step(&mut self, sub: &Subproblem, i: usize, grad: &mut [f64], counter: &mut EvalCounter) {
        let obj = sub.base();
        let n = self.a.len() as f64;
        let z = &self.z;
        grad.fill(0.0);
        obj.add_component_gradient(i, z, 1.0, grad, counter);
        let fi = obj.smooth().component_value(i, z);
        let z_sq = linalg::norm_sq(z);
        let a_new = fi - linalg::dot(grad, z) + 0.5 * self.mu_s * z_sq;
        let d = self.delta;
        let row = &mut self.v[i * self.p..(i + 1) * self.p];
        for k in 0..self.p {
            let fresh = grad[k] - self.mu_s * z[k];
            let updated = (1.0 - d) * row[k] + d * fresh;
            self.v_mean[k] += (updated - row[k]) / n;
            row[k] = updated;
        }
        let a_upd = (1.0 - d) * self.a[i] + d * a_new;
        self.a_mean += (a_upd - self.a[i]) / n;
        self.a[i] = a_upd;
        self.minimize(sub, counter);
    }
}

/// Lower-bound bookkeeping across checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MisoStats {
    pub checks: u64,
    /// Smallest `(h(z) - d(z)) / max(1, |h(z)|)` seen; never below `-1e-9`.
    pub min_relative_gap: f64,
}

impl Default for MisoStats {
    fn default() -> Self {
        Self { checks: 0, min_relative_gap: f64::INFINITY }
    }
}

/// Runs MISO from `state` on `sub`. A state built for another center is
/// re-targeted, which is the warm start. The duality gap (no oracle cost) is
/// evaluated once per `n` steps, also under a budget, where it only feeds the
/// lower-bound checks.
pub fn miso_solve(
    sub: &Subproblem,
    mut state: MisoState,
    rule: &StoppingRule,
    ctx: &mut SolveContext<'_>,
) -> Result<(InnerResult, MisoState)> {
    let mut stats = MisoStats::default();
    let res = miso_run(sub, &mut state, rule, ctx, &mut stats)?;
    Ok((res, state))
}

fn miso_run(
    sub: &Subproblem,
    state: &mut MisoState,
    rule: &StoppingRule,
    ctx: &mut SolveContext<'_>,
    stats: &mut MisoStats,
) -> Result<InnerResult> {
    if !state.compatible(sub) {
        return Err(Error::invalid("MISO state was built for a different sub-problem shape or kappa"));
    }
    check_start(sub, &state.z, rule)?;
    let n = sub.n_components();
    let certify = !matches!(rule, StoppingRule::Budget(_));
    state.minimize(sub, ctx.counter);

    let check = |state: &mut MisoState,
                 ctx: &mut SolveContext<'_>,
                 stats: &mut MisoStats,
                 t: u64|
     -> Result<Option<InnerResult>> {
        let (cert, rel) = state.certify(sub)?;
        stats.checks += 1;
        stats.min_relative_gap = stats.min_relative_gap.min(rel);
        ctx.note(&cert);
        if certify && rule.accepts(&cert, sub) {
            return Ok(Some(InnerResult::certified(cert, t)));
        }
        Ok(None)
    };

    if certify {
        if let Some(done) = check(state, ctx, stats, 0)? {
            return Ok(done);
        }
    }
    if ctx.tick(0, &state.z)? == Flow::Break {
        return InnerResult::unfinished(state.z.clone(), 0, None, StopReason::Interrupted);
    }

    let mut grad = vec![0.0; state.p];
    let mut t = 0u64;
    loop {
        let i = ctx.rng.random_range(0..n);
        state.step(sub, i, &mut grad, ctx.counter);
        t += 1;
        match *rule {
            StoppingRule::Budget(budget) if t >= budget => {
                return InnerResult::unfinished(state.z.clone(), t, None, StopReason::BudgetExhausted);
            }
            _ if t % n as u64 == 0 => {
                if let Some(done) = check(state, ctx, stats, t)? {
                    return Ok(done);
                }
            }
            _ => {}
        }
        if ctx.tick(t, &state.z)? == Flow::Break {
            return InnerResult::unfinished(state.z.clone(), t, None, StopReason::Interrupted);
        }
    }
}

/// MISO as an [`InnerSolver`]: keeps its surrogates from one sub-problem to the
/// next and accumulates lower-bound statistics.
#[derive(Debug, Clone, Default)]
pub struct MisoSolver {
    state: Option<MisoState>,
    stats: MisoStats,
}

impl MisoSolver {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn stats(&self) -> MisoStats {
        self.stats
    }

    pub fn state(&self) -> Option<&MisoState> {
        self.state.as_ref()
    }
}

impl InnerSolver for MisoSolver {
    fn name(&self) -> &'static str {
        "miso"
    }

    fn kind(&self) -> MethodKind {
        MethodKind::Incremental
    }

    fn iterations_per_pass(&self, n: usize) -> u64 {
        n.max(1) as u64
    }

    fn solve(
        &mut self,
        sub: &Subproblem,
        z0: &[f64],
        rule: &StoppingRule,
        ctx: &mut SolveContext<'_>,
    ) -> Result<InnerResult> {
        let mut state = match self.state.take() {
            Some(s) if s.compatible(sub) => s,
            _ => MisoState::init(sub, z0, ctx.counter)?,
        };
        let res = miso_run(sub, &mut state, rule, ctx, &mut self.stats);
        self.state = Some(state);
        res
    }

    fn owns_warm_start(&self) -> bool {
        true
    }
}

#[cfg(test)]
mod tests {
    use super::super::ista_solve;
    use super::super::testing::*;
    use super::*;
    use crate::envelope::make_subproblem;
    use crate::oracle::CompositeObjective;
    use std::sync::Arc;

    fn sub_at(f: &CompositeObjective, y: Vec<f64>, kappa: f64) -> Subproblem {
        make_subproblem(f, &DenseVector::new(y).unwrap(), kappa).unwrap()
    }

    #[test]
    fn full_refresh_is_a_lower_bound() {
        let f = logistic(30, 5, 0.01, 2);
        let sub = sub_at(&f, vec![0.2; 5], 0.1);
        let mut c = EvalCounter::new();
        let state = MisoState::init(&sub, &[0.5, -0.5, 1.0, 0.0, 0.3], &mut c).unwrap();
        assert!(state.dual_value(&sub) <= sub.value(state.iterate()) + 1e-12);
        assert_eq!(c.full_passes, 1);
    }

    #[test]
    fn zero_gap_at_the_minimizer() {
        let f = least_squares(40, 4, 0.02, 3);
        let sub = sub_at(&f, vec![0.1, 0.2, -0.3, 0.0], 0.05);
        let mut c = EvalCounter::new();
        let mut r = rng(0);
        let star = ista_solve(
            &sub,
            &[0.0; 4],
            &StoppingRule::Absolute(1e-28),
            &mut SolveContext::new(&mut c, &mut r, 40).with_max_passes(100_000),
        )
        .unwrap();
        let state = MisoState::init(&sub, &star.point, &mut c).unwrap();
        assert!(state.duality_gap(&sub).abs() < 1e-10);
        assert!(linalg::dist(state.iterate(), &star.point) < 1e-8);
    }

    #[test]
    fn certified_and_linear_on_logistic() {
        let f = logistic(100, 8, 1e-3, 5);
        let sub = sub_at(&f, vec![0.0; 8], 0.01);
        let mut c = EvalCounter::new();
        let mut r = rng(1);
        let mut gaps = Vec::new();
        let mut state = MisoState::init(&sub, &[0.0; 8], &mut c).unwrap();
        for _ in 0..30 {
            let mut ctx = SolveContext::new(&mut c, &mut r, 100);
            let (_, s) = miso_solve(&sub, state, &StoppingRule::Budget(100), &mut ctx).unwrap();
            state = s;
            state.refresh_means();
            let g = state.duality_gap(&sub);
            assert!(g >= -1e-12);
            gaps.push(g);
        }
        let tau = crate::solvers::contraction_estimate(&gaps).unwrap();
        assert!(tau > 0.05, "tau = {tau}");

        let eps = 1e-10;
        let mut ctx = SolveContext::new(&mut c, &mut r, 100);
        let (res, _) = miso_solve(&sub, state, &StoppingRule::Absolute(eps), &mut ctx).unwrap();
        assert!(res.satisfied);
        assert_eq!(res.certificate.as_ref().unwrap().kind, CertificateKind::DualGap);
        let mut c2 = EvalCounter::new();
        let star = ista_solve(
            &sub,
            &[0.0; 8],
            &StoppingRule::Absolute(1e-16),
            &mut SolveContext::new(&mut c2, &mut r, 100).with_max_passes(100_000),
        )
        .unwrap();
        assert!(sub.value(&res.point) - sub.value(&star.point) <= eps + 1e-14);
    }

    #[test]
    fn one_gradient_per_step() {
        let f = logistic(20, 3, 0.01, 2);
        let sub = sub_at(&f, vec![0.0; 3], 0.1);
        let mut solver = MisoSolver::new();
        let mut c = EvalCounter::new();
        let mut r = rng(0);
        solver.solve(&sub, &[0.0; 3], &StoppingRule::Budget(35), &mut SolveContext::new(&mut c, &mut r, 20)).unwrap();
        assert_eq!((c.component_grads, c.full_passes), (35, 1));
        // carried over: no new initialization pass
        let sub2 = sub_at(&f, vec![0.1; 3], 0.1);
        solver.solve(&sub2, &[9.0; 3], &StoppingRule::Budget(5), &mut SolveContext::new(&mut c, &mut r, 20)).unwrap();
        assert_eq!((c.component_grads, c.full_passes), (40, 1));
    }

    #[test]
    fn warm_start_is_the_shifted_minimizer() {
        let f = logistic(20, 3, 0.0, 2);
        let kappa = 0.2;
        let sub = sub_at(&f, vec![0.0; 3], kappa);
        let mut c = EvalCounter::new();
        let mut state = MisoState::init(&sub, &[0.1, 0.2, 0.3], &mut c).unwrap();
        let w_old: Vec<f64> = state.v_mean.iter().map(|v| -v / kappa).collect();
        let y_new = vec![0.5, -0.5, 0.25];
        let sub2 = sub_at(&f, y_new.clone(), kappa);
        state.minimize(&sub2, &mut c);
        for j in 0..3 {
            assert!((state.z[j] - (w_old[j] + y_new[j])).abs() < 1e-14);
        }
    }

    #[test]
    fn plain_on_non_strongly_convex_is_unsupported() {
        let f = least_squares(10, 3, 0.0, 1);
        let sub = Subproblem::unsmoothed(&f);
        let mut c = EvalCounter::new();
        assert!(matches!(MisoState::init(&sub, &[0.0; 3], &mut c), Err(Error::Unsupported(_))));
    }

    #[derive(Debug)]
    struct Concave;

    impl crate::SmoothOracle for Concave {
        fn dim(&self) -> usize {
            1
        }
        fn n_components(&self) -> usize {
            1
        }
        fn value(&self, x: &[f64]) -> f64 {
            -0.5 * x[0] * x[0]
        }
        fn component_value(&self, _i: usize, x: &[f64]) -> f64 {
            self.value(x)
        }
        fn gradient_into(&self, x: &[f64], out: &mut [f64]) {
            out[0] = -x[0];
        }
        fn add_component_gradient(&self, _i: usize, x: &[f64], s: f64, out: &mut [f64]) {
            out[0] -= s * x[0];
        }
        fn lipschitz(&self) -> f64 {
            1.0
        }
        fn lipschitz_max(&self) -> f64 {
            1.0
        }
        fn lipschitz_avg(&self) -> f64 {
            1.0
        }
        fn strong_convexity(&self) -> f64 {
            0.0
        }
    }

    #[test]
    fn non_convex_component_is_reported() {
        let f = CompositeObjective::smooth_only(Arc::new(Concave)).unwrap();
        let sub = sub_at(&f, vec![0.0], 3.0);
        let mut solver = MisoSolver::new();
        let mut c = EvalCounter::new();
        let mut r = rng(0);
        let res = solver.solve(&sub, &[1.0], &StoppingRule::Absolute(1e-12), &mut SolveContext::new(&mut c, &mut r, 1));
        assert!(matches!(res, Err(Error::ContractViolation(_))), "{res:?}");
    }
}
