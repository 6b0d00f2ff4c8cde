//! Proximal SAGA with step `1/(3 (L_max + kappa))`.

use rand::Rng;

use super::{check_start, Flow, InnerResult, InnerSolver, MethodKind, SolveContext, StopReason, StoppingRule};
use crate::envelope::Subproblem;
use crate::oracle::EvalCounter;
use crate::Result;

/// Table of the last gradient seen for every component, and their mean.
struct GradientTable {
    p: usize,
    rows: Vec<f64>,
    mean: Vec<f64>,
}

impl GradientTable {
    /// Fills the table at `z`; one sequential pass.
    fn init(sub: &Subproblem, z: &[f64], counter: &mut EvalCounter) -> Self {
        let n = sub.n_components();
        let p = z.len();
        let smooth = sub.base().smooth();
        let mut rows = vec![0.0; n * p];
        let mut mean = vec![0.0; p];
        for (i, row) in rows.chunks_exact_mut(p).enumerate() {
            smooth.add_component_gradient(i, z, 1.0, row);
            crate::linalg::axpy(1.0 / n as f64, row, &mut mean);
        }
        counter.full_passes += 1;
        Self { p, rows, mean }
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.rows[i * self.p..(i + 1) * self.p]
    }
}

/// `out = grad f_j(z) - table_j + mean + kappa (z - y)`, with `fresh = grad f_j(z)`.
fn direction(sub: &Subproblem, table: &GradientTable, j: usize, z: &[f64], fresh: &[f64], out: &mut [f64]) {
    let old = table.row(j);
    for k in 0..out.len() {
        out[k] = fresh[k] - old[k] + table.mean[k];
    }
    sub.add_proximity_gradient(z, 1.0, out);
}

/// The table is rebuilt at `z0` for every call. Accuracy rules are checked
/// once per `n` steps with a full gradient; the check at `z0` reuses the table
/// mean and costs only a prox.
pub fn saga_solve(
    sub: &Subproblem,
    z0: &[f64],
    rule: &StoppingRule,
    ctx: &mut SolveContext<'_>,
) -> Result<InnerResult> {
    check_start(sub, z0, rule)?;
    let n = sub.n_components();
    let obj = sub.base();
    let eta = 1.0 / (3.0 * sub.component_lipschitz());
    let eta_map = 1.0 / sub.smooth_lipschitz();
    let p = z0.len();
    let certify = !matches!(rule, StoppingRule::Budget(_));

    let mut table = GradientTable::init(sub, z0, ctx.counter);
    let mut z = z0.to_vec();
    let mut grad = vec![0.0; p];
    let mut fresh = vec![0.0; p];
    let mut v = vec![0.0; p];
    let mut w = vec![0.0; p];
    let mut last = None;

    if certify {
        grad.copy_from_slice(&table.mean);
        sub.add_proximity_gradient(&z, 1.0, &mut grad);
        let (mapped, norm) = sub.map_from_gradient(&z, &grad, eta_map, ctx.counter);
        let cert = sub.certificate_from_mapping(mapped, norm)?;
        ctx.note(&cert);
        if rule.accepts(&cert, sub) {
            return Ok(InnerResult::certified(cert, 0));
        }
        last = Some(cert);
    }
    if ctx.tick(0, &z)? == Flow::Break {
        return InnerResult::unfinished(z, 0, last, StopReason::Interrupted);
    }

    let mut t = 0u64;
    loop {
        let j = ctx.rng.random_range(0..n);
        fresh.fill(0.0);
        obj.add_component_gradient(j, &z, 1.0, &mut fresh, ctx.counter);
        direction(sub, &table, j, &z, &fresh, &mut v);
        for k in 0..p {
            w[k] = z[k] - eta * v[k];
        }
        obj.prox_into(&w, eta, &mut z, ctx.counter);
        let inv_n = 1.0 / n as f64;
        let row = &mut table.rows[j * p..(j + 1) * p];
        for k in 0..p {
            table.mean[k] += (fresh[k] - row[k]) * inv_n;
        }
        row.copy_from_slice(&fresh);
        t += 1;

        match *rule {
            StoppingRule::Budget(budget) if t >= budget => {
                return InnerResult::unfinished(z, t, None, StopReason::BudgetExhausted);
            }
            _ if certify && t % n as u64 == 0 => {
                sub.smooth_gradient_into(&z, &mut grad, ctx.counter);
                let (mapped, norm) = sub.map_from_gradient(&z, &grad, eta_map, ctx.counter);
                let cert = sub.certificate_from_mapping(mapped, norm)?;
                ctx.note(&cert);
                if rule.accepts(&cert, sub) {
                    return Ok(InnerResult::certified(cert, t));
                }
                last = Some(cert);
            }
            _ => {}
        }
        if ctx.tick(t, &z)? == Flow::Break {
            return InnerResult::unfinished(z, t, last, StopReason::Interrupted);
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SagaSolver;

impl InnerSolver for SagaSolver {
    fn name(&self) -> &'static str {
        "saga"
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
        saga_solve(sub, z0, rule, ctx)
    }
}

#[cfg(test)]
mod tests {
    use super::super::ista_solve;
    use super::super::testing::*;
    use super::*;
    use crate::envelope::make_subproblem;
    use crate::{linalg, DenseVector};
    use nalgebra::DMatrix;
    use rand::Rng;

    #[test]
    fn direction_is_unbiased() {
        let f = logistic(25, 4, 0.05, 8);
        let y = DenseVector::new(vec![0.2, -0.1, 0.0, 0.4]).unwrap();
        let sub = make_subproblem(&f, &y, 0.3).unwrap();
        let mut c = EvalCounter::new();
        // table filled at one point, evaluated at another
        let table = GradientTable::init(&sub, &[1.0, -1.0, 0.5, 0.0], &mut c);
        let z = [0.3, 0.7, -0.2, 0.1];
        let mut avg = vec![0.0; 4];
        for j in 0..25 {
            let fresh = f.eval_grad_component(j, &z, &mut c).unwrap();
            let mut v = vec![0.0; 4];
            direction(&sub, &table, j, &z, &fresh, &mut v);
            linalg::axpy(1.0 / 25.0, &v, &mut avg);
        }
        let mut exact = vec![0.0; 4];
        sub.smooth_gradient_into(&z, &mut exact, &mut c);
        assert!(linalg::dist(&avg, &exact) < 1e-12);
    }

    #[test]
    fn single_component_converges() {
        let f = quadratic_objective(DMatrix::from_element(1, 1, 2.0), vec![1.0], 0.0);
        let sub = make_subproblem(&f, &DenseVector::zeros(1), 1.0).unwrap();
        let mut c = EvalCounter::new();
        let mut r = rng(0);
        let res = saga_solve(&sub, &[5.0], &StoppingRule::Absolute(1e-14), &mut SolveContext::new(&mut c, &mut r, 1))
            .unwrap();
        assert!((res.point[0] - 1.0 / 3.0).abs() < 1e-6);
    }

    #[test]
    fn pass_accounting() {
        let f = least_squares(40, 5, 0.01, 1);
        let sub = make_subproblem(&f, &DenseVector::zeros(5), 0.05).unwrap();
        let mut c = EvalCounter::new();
        let mut r = rng(0);
        saga_solve(&sub, &[0.0; 5], &StoppingRule::Budget(40), &mut SolveContext::new(&mut c, &mut r, 40)).unwrap();
        assert_eq!((c.component_grads, c.full_passes), (40, 1));
    }

    #[test]
    fn certified_on_least_squares() {
        let f = least_squares(100, 10, 1e-3, 9);
        let y = DenseVector::new(vec![0.1; 10]).unwrap();
        let sub = make_subproblem(&f, &y, 0.009).unwrap();
        let mut c = EvalCounter::new();
        let mut r = rng(4);
        let eps = 1e-10;
        let res =
            saga_solve(&sub, &[0.0; 10], &StoppingRule::Absolute(eps), &mut SolveContext::new(&mut c, &mut r, 100))
                .unwrap();
        assert!(res.satisfied);
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
    fn lasso_subproblem() {
        let mut r = rng(6);
        let q = random_spd(6, 0.0, 2.0, &mut r);
        let b: Vec<f64> = (0..6).map(|_| r.random_range(-1.0..1.0)).collect();
        let f = quadratic_objective(q, b, 0.2);
        let sub = make_subproblem(&f, &DenseVector::zeros(6), 0.5).unwrap();
        let mut c = EvalCounter::new();
        let res = saga_solve(&sub, &[0.0; 6], &StoppingRule::Relative(0.1), &mut SolveContext::new(&mut c, &mut r, 1))
            .unwrap();
        assert!(res.satisfied);
    }
}
