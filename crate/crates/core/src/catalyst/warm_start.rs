//! Initial points for the inner solver of the next sub-problem.

use crate::envelope::Subproblem;
use crate::oracle::EvalCounter;
use crate::{DenseVector, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WarmStart {
    /// `x_k + kappa/(kappa + mu) (y_k - y_{k-1})`, followed by one prox-gradient
    /// step when `psi != 0`.
    C1,
    /// `y_k`, or `[y_k]_eta` when `psi != 0`.
    C2,
    /// Best of `x_k` and the `C1` point under the next sub-problem.
    C3,
    /// Same point as `C3`, used with absolute accuracy.
    C1Star,
}

/// `sub_next` is `h_{k+1}`, centered at `y_k`. `mu` is the total strong
/// convexity of the objective. Prox-gradient steps cost one full pass each;
/// function values are free.
pub fn warm_start_point(
    strategy: WarmStart,
    x_k: &[f64],
    y_km1: &[f64],
    sub_next: &Subproblem,
    counter: &mut EvalCounter,
) -> Result<DenseVector> {
    let p = sub_next.dim();
    for v in [x_k, y_km1] {
        if v.len() != p {
            return Err(Error::DimensionMismatch { expected: p, got: v.len() });
        }
    }
    match strategy {
        WarmStart::C1 => momentum_point(x_k, y_km1, sub_next, counter),
        WarmStart::C2 => {
            let y_k = sub_next.center();
            if sub_next.base().reg().is_zero() {
                Ok(y_k.clone())
            } else {
                prox_gradient_step(y_k, sub_next, counter)
            }
        }
        WarmStart::C3 | WarmStart::C1Star => {
            let z_c1 = momentum_point(x_k, y_km1, sub_next, counter)?;
            if sub_next.value(&z_c1) <= sub_next.value(x_k) {
                Ok(z_c1)
            } else {
                DenseVector::new(x_k.to_vec())
            }
        }
    }
}

fn momentum_point(x_k: &[f64], y_km1: &[f64], sub: &Subproblem, counter: &mut EvalCounter) -> Result<DenseVector> {
    let kappa = sub.kappa();
    let ratio = kappa / (kappa + sub.base().mu_total());
    let y_k = sub.center();
    let w0: Vec<f64> = x_k.iter().zip(y_k.iter().zip(y_km1)).map(|(x, (yk, ym))| x + ratio * (yk - ym)).collect();
    if sub.base().reg().is_zero() {
        DenseVector::new(w0)
    } else {
        prox_gradient_step(&w0, sub, counter)
    }
}

/// `[w]_eta` with `eta = 1/(L + kappa)`.
fn prox_gradient_step(w: &[f64], sub: &Subproblem, counter: &mut EvalCounter) -> Result<DenseVector> {
    let mut grad = vec![0.0; w.len()];
    sub.smooth_gradient_into(w, &mut grad, counter);
    let (mapped, _) = sub.map_from_gradient(w, &grad, 1.0 / sub.smooth_lipschitz(), counter);
    DenseVector::new(mapped)
}
