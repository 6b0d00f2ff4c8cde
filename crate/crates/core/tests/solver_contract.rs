mod common;

use catalyst_core::catalyst::kappa_default;
use catalyst_core::envelope::make_subproblem;
use catalyst_core::solvers::{
    contraction_estimate, InnerSolver, IstaSolver, MisoSolver, SagaSolver, SolveContext, StopReason, StoppingRule,
    SvrgSolver,
};
use catalyst_core::{DenseVector, EvalCounter};
use common::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn solvers() -> Vec<Box<dyn InnerSolver>> {
    vec![Box::new(IstaSolver), Box::new(SvrgSolver), Box::new(SagaSolver), Box::new(MisoSolver::new())]
}

#[test]
fn certified_results_meet_their_rule() {
    let f = ridge_logistic(60, 6, 1e-3, 21);
    let kappa =
        kappa_default(catalyst_core::solvers::MethodKind::Incremental, f.smooth().lipschitz_max(), f.mu_total(), 60)
            .kappa;
    let y = DenseVector::new(vec![0.3, -0.2, 0.1, 0.0, 0.5, -0.4]).unwrap();
    let sub = make_subproblem(&f, &y, kappa).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let reference = IstaSolver
        .solve(
            &sub,
            &[0.0; 6],
            &StoppingRule::Absolute(1e-16),
            &mut SolveContext::new(&mut EvalCounter::new(), &mut rng, 60).with_max_passes(1_000_000),
        )
        .unwrap();
    let h_star = sub.value(&reference.point);

    for mut solver in solvers() {
        for rule in [StoppingRule::Absolute(1e-8), StoppingRule::Relative(0.5)] {
            let mut counter = EvalCounter::new();
            let mut rng = ChaCha8Rng::seed_from_u64(1);
            let mut ctx = SolveContext::new(&mut counter, &mut rng, 60);
            let res = solver.solve(&sub, &[1.0; 6], &rule, &mut ctx).unwrap();
            assert!(res.satisfied, "{}", solver.name());
            assert_eq!(res.stop, StopReason::Satisfied);
            let cert = res.certificate.as_ref().unwrap();
            assert_eq!(cert.at_point, res.point);
            let gap = sub.value(&res.point) - h_star;
            assert!(gap <= cert.bound_on_gap + 1e-13, "{}: {gap} > {}", solver.name(), cert.bound_on_gap);
            match rule {
                StoppingRule::Absolute(eps) => assert!(gap <= eps + 1e-13),
                StoppingRule::Relative(delta) => {
                    let rhs = 0.5 * delta * kappa * catalyst_core::linalg::dist_sq(&res.point, y.as_slice());
                    assert!(gap <= rhs + 1e-13);
                }
                StoppingRule::Budget(_) => unreachable!(),
            }
        }
    }
}

#[test]
fn one_pass_budget_costs_one_pass() {
    let f = ridge_logistic(40, 5, 1e-3, 22);
    let sub = make_subproblem(&f, &DenseVector::zeros(5), 0.01).unwrap();
    let expected = [(0, 1), (40, 1), (40, 1), (40, 1)];
    for (mut solver, (comp, full)) in solvers().into_iter().zip(expected) {
        let mut counter = EvalCounter::new();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let budget = StoppingRule::Budget(solver.iterations_per_pass(40));
        let res = solver.solve(&sub, &[0.0; 5], &budget, &mut SolveContext::new(&mut counter, &mut rng, 40)).unwrap();
        assert_eq!(res.stop, StopReason::BudgetExhausted, "{}", solver.name());
        assert_eq!((counter.component_grads, counter.full_passes), (comp, full), "{}", solver.name());
    }
}

#[test]
fn certified_gaps_contract_linearly() {
    // n = 1 quadratic: every solver is a deterministic first-order method
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let q = with_spectrum(&linspace(0.1, 2.0, 6), &mut rng);
    let b = random_vec(6, 1.0, &mut rng);
    let f = quadratic(q, b);
    let sub = make_subproblem(&f, &DenseVector::zeros(6), 0.4).unwrap();
    for mut solver in solvers() {
        let mut gaps = Vec::new();
        let mut z = vec![3.0; 6];
        for _ in 0..12 {
            let mut counter = EvalCounter::new();
            let mut rng = ChaCha8Rng::seed_from_u64(3);
            let mut ctx = SolveContext::new(&mut counter, &mut rng, 1);
            let res = solver.solve(&sub, &z, &StoppingRule::Budget(3), &mut ctx).unwrap();
            z = res.point.into_inner();
            let mut c = EvalCounter::new();
            let cert = catalyst_core::envelope::residual_gap_bound(&sub, &z, &sub.params(), &mut c).unwrap();
            gaps.push(cert.bound_on_gap);
        }
        if gaps.iter().all(|g| *g > 1e-300) {
            assert!(gaps.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-9)), "{}: {gaps:?}", solver.name());
            assert!(contraction_estimate(&gaps).unwrap() > 0.0, "{}", solver.name());
        }
    }
}

#[test]
fn dimension_mismatch_is_rejected() {
    let f = ridge_logistic(10, 3, 1e-2, 24);
    let sub = make_subproblem(&f, &DenseVector::zeros(3), 0.1).unwrap();
    for mut solver in solvers() {
        let mut counter = EvalCounter::new();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let err =
            solver.solve(&sub, &[0.0; 4], &StoppingRule::Budget(1), &mut SolveContext::new(&mut counter, &mut rng, 10));
        assert!(err.is_err(), "{}", solver.name());
    }
}
