//! Proximal SVRG, epoch length `m = n`, last iterate kept as next anchor.

use rand::Rng;

use super::{check_start, Flow, InnerResult, InnerSolver, MethodKind, SolveContext, StopReason, StoppingRule};
use crate::envelope::Subproblem;
use crate::Result;

/// Each epoch computes the anchor gradient (one full pass), which doubles as
/// the accuracy check of the anchor, then runs `n` corrected steps
/// `v = grad f_i(z) - grad f_i(anchor) + grad h0(anchor) + kappa (z - anchor)`
/// with step `1/(L_max + kappa)`, two component gradients each.
pub fn svrg_solve(
    sub: &Subproblem,
    z0: &[f64],
    rule: &StoppingRule,
    ctx: &mut SolveContext<'_>,
) -> Result<InnerResult> {
    check_start(sub, z0, rule)?;
    let n = sub.n_components();
    let obj = sub.base();
    let eta = 1.0 / sub.component_lipschitz();
    let eta_map = 1.0 / sub.smooth_lipschitz();
    let kappa = sub.kappa();
    let p = z0.len();

    let mut anchor = z0.to_vec();
    let mut anchor_grad = vec![0.0; p];
    let mut z = vec![0.0; p];
    let mut v = vec![0.0; p];
    let mut w = vec![0.0; p];
    let mut last = None;
    let mut t = 0u64;
    loop {
        sub.smooth_gradient_into(&anchor, &mut anchor_grad, ctx.counter);
        if !matches!(rule, StoppingRule::Budget(_)) {
            let (mapped, norm) = sub.map_from_gradient(&anchor, &anchor_grad, eta_map, ctx.counter);
            let cert = sub.certificate_from_mapping(mapped, norm)?;
            ctx.note(&cert);
            if rule.accepts(&cert, sub) {
                return Ok(InnerResult::certified(cert, t));
            }
            last = Some(cert);
        }
        if ctx.tick(t, &anchor)? == Flow::Break {
            return InnerResult::unfinished(anchor, t, last, StopReason::Interrupted);
        }

        z.copy_from_slice(&anchor);
        for _ in 0..n {
            let i = ctx.rng.random_range(0..n);
            for j in 0..p {
                v[j] = anchor_grad[j] + kappa * (z[j] - anchor[j]);
            }
            obj.add_component_gradient(i, &z, 1.0, &mut v, ctx.counter);
            obj.add_component_gradient(i, &anchor, -1.0, &mut v, ctx.counter);
            for j in 0..p {
                w[j] = z[j] - eta * v[j];
            }
            obj.prox_into(&w, eta, &mut z, ctx.counter);
            t += 1;
            if let StoppingRule::Budget(budget) = *rule {
                if t >= budget {
                    return InnerResult::unfinished(z, t, None, StopReason::BudgetExhausted);
                }
            }
            if ctx.tick(t, &z)? == Flow::Break {
                return InnerResult::unfinished(z, t, last, StopReason::Interrupted);
            }
        }
        anchor.copy_from_slice(&z);
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SvrgSolver;

impl InnerSolver for SvrgSolver {
    fn name(&self) -> &'static str {
        "svrg"
    }

    fn kind(&self) -> MethodKind {
        MethodKind::Incremental
    }

    /// `n/2` steps: `n` component gradients, plus the anchor pass.
    fn iterations_per_pass(&self, n: usize) -> u64 {
        n.div_ceil(2).max(1) as u64
    }

    fn solve(
        &mut self,
        sub: &Subproblem,
        z0: &[f64],
        rule: &StoppingRule,
        ctx: &mut SolveContext<'_>,
    ) -> Result<InnerResult> {
        svrg_solve(sub, z0, rule, ctx)
    }
}

#[cfg(test)]
mod tests {
    use super::super::ista_solve;
    use super::super::testing::*;
    use super::*;
    use crate::catalyst::kappa_default;
    use crate::envelope::make_subproblem;
    use crate::solvers::MethodKind;
    use crate::{DenseVector, EvalCounter};
    use nalgebra::DMatrix;
    use rand::Rng;

    #[test]
    fn single_component_matches_ista() {
        let mut r = rng(11);
        let q = random_spd(4, 0.2, 3.0, &mut r);
        let b: Vec<f64> = (0..4).map(|_| r.random_range(-1.0..1.0)).collect();
        let f = quadratic_objective(q, b, 0.1);
        let sub = make_subproblem(&f, &DenseVector::new(vec![0.3, -0.2, 0.5, 1.0]).unwrap(), 0.7).unwrap();
        let z0 = [1.0, 2.0, -1.0, 0.5];
        for steps in [1, 2, 5, 20] {
            let (mut c1, mut c2) = (EvalCounter::new(), EvalCounter::new());
            let (mut r1, mut r2) = (rng(0), rng(0));
            let a = ista_solve(&sub, &z0, &StoppingRule::Budget(steps), &mut SolveContext::new(&mut c1, &mut r1, 1))
                .unwrap();
            let b = svrg_solve(&sub, &z0, &StoppingRule::Budget(steps), &mut SolveContext::new(&mut c2, &mut r2, 1))
                .unwrap();
            for (x, y) in a.point.iter().zip(b.point.iter()) {
                assert!((x - y).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn epoch_accounting() {
        let f = least_squares(50, 5, 0.01, 4);
        let sub = make_subproblem(&f, &DenseVector::zeros(5), 0.05).unwrap();
        let mut c = EvalCounter::new();
        let mut r = rng(1);
        let res =
            svrg_solve(&sub, &[0.0; 5], &StoppingRule::Budget(50), &mut SolveContext::new(&mut c, &mut r, 50)).unwrap();
        assert_eq!(res.inner_iterations, 50);
        assert_eq!((c.component_grads, c.full_passes, c.prox_calls), (100, 1, 50));

        let mut c = EvalCounter::new();
        svrg_solve(
            &sub,
            &[0.0; 5],
            &StoppingRule::Budget(SvrgSolver.iterations_per_pass(50)),
            &mut SolveContext::new(&mut c, &mut r, 50),
        )
        .unwrap();
        assert_eq!((c.component_grads, c.full_passes), (50, 1));
    }

    #[test]
    fn certified_within_fifty_epochs() {
        let mu = 1e-3;
        let f = least_squares(100, 10, mu, 9);
        let choice = kappa_default(MethodKind::Incremental, f.smooth().lipschitz_max(), mu, 100);
        assert!(!choice.well_conditioned);
        let y = DenseVector::new(vec![0.1; 10]).unwrap();
        let sub = make_subproblem(&f, &y, choice.kappa).unwrap();
        let mut c = EvalCounter::new();
        let mut r = rng(2);
        let eps = 1e-10;
        let res =
            svrg_solve(&sub, &[0.0; 10], &StoppingRule::Absolute(eps), &mut SolveContext::new(&mut c, &mut r, 100))
                .unwrap();
        assert!(res.satisfied);
        assert!(res.certificate.as_ref().unwrap().bound_on_gap <= eps);
        assert!(c.full_passes <= 50, "{} epochs", c.full_passes);

        // against a long certified ISTA run
        let mut c2 = EvalCounter::new();
        let reference = ista_solve(
            &sub,
            &[0.0; 10],
            &StoppingRule::Absolute(1e-15),
            &mut SolveContext::new(&mut c2, &mut r, 100).with_max_passes(100_000),
        )
        .unwrap();
        let gap = sub.value(&res.point) - sub.value(&reference.point);
        assert!(gap <= eps + 1e-14, "{gap}");
    }

    #[test]
    fn seeded_runs_are_bitwise_identical() {
        let f = logistic(60, 6, 0.01, 3);
        let sub = make_subproblem(&f, &DenseVector::zeros(6), 0.02).unwrap();
        let run = |seed| {
            let mut c = EvalCounter::new();
            let mut r = rng(seed);
            svrg_solve(&sub, &[0.0; 6], &StoppingRule::Absolute(1e-9), &mut SolveContext::new(&mut c, &mut r, 60))
                .unwrap()
        };
        let (a, b) = (run(5), run(5));
        assert_eq!(a.point.as_slice(), b.point.as_slice());
        assert_eq!(a.inner_iterations, b.inner_iterations);
    }

    #[test]
    fn scalar_problem() {
        let f = quadratic_objective(DMatrix::from_element(1, 1, 2.0), vec![1.0], 0.0);
        let sub = make_subproblem(&f, &DenseVector::zeros(1), 1.0).unwrap();
        let mut c = EvalCounter::new();
        let mut r = rng(0);
        let res = svrg_solve(&sub, &[5.0], &StoppingRule::Absolute(1e-14), &mut SolveContext::new(&mut c, &mut r, 1))
            .unwrap();
        assert!((res.point[0] - 1.0 / 3.0).abs() < 1e-6);
    }
}
