//! Closed-form proximal operators of the l1 / elastic-net penalties.

use crate::oracle::ProxRegularizer;
use crate::{Error, Result};

#[inline]
pub(crate) fn soft_threshold(v: f64, t: f64) -> f64 {
    if v > t {
        v - t
    } else if v < -t {
        v + t
    } else {
        0.0
    }
}

/// Componentwise soft-thresholding `sign(v) max(|v| - t, 0)`.
pub fn prox_l1(v: &[f64], t: f64) -> Result<Vec<f64>> {
    if !(t >= 0.0) {
        return Err(Error::invalid(format!("l1 threshold must be non-negative, got {t}")));
    }
    Ok(v.iter().map(|&x| soft_threshold(x, t)).collect())
}

/// Prox of `t (lambda ||.||_1 + (mu/2) ||.||^2)`: soft-threshold by `t lambda`,
/// then shrink by `1 + t mu`.
pub fn prox_elastic_net(v: &[f64], t: f64, lambda: f64, mu: f64) -> Result<Vec<f64>> {
    if !(t >= 0.0 && lambda >= 0.0 && mu >= 0.0) {
        return Err(Error::invalid(format!("elastic-net prox needs t, lambda, mu >= 0 (got {t}, {lambda}, {mu})")));
    }
    let shrink = 1.0 / (1.0 + t * mu);
    Ok(v.iter().map(|&x| soft_threshold(x, t * lambda) * shrink).collect())
}

/// `psi(x) = l1 ||x||_1 + (l2 / 2) ||x||^2`. Covers pure l1 (`l2 = 0`) and
/// ridge-in-the-regularizer (`l1 = 0`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElasticNet {
    l1: f64,
    l2: f64,
}

impl ElasticNet {
    pub fn new(l1: f64, l2: f64) -> Result<Self> {
        if !(l1 >= 0.0 && l2 >= 0.0 && l1.is_finite() && l2.is_finite()) {
            return Err(Error::invalid(format!("penalties must be finite and >= 0 (got {l1}, {l2})")));
        }
        Ok(Self { l1, l2 })
    }

    pub fn l1(&self) -> f64 {
        self.l1
    }

    pub fn l2(&self) -> f64 {
        self.l2
    }
}

impl ProxRegularizer for ElasticNet {
    fn value(&self, x: &[f64]) -> f64 {
        let (mut abs, mut sq) = (0.0, 0.0);
        for v in x {
            abs += v.abs();
            sq += v * v;
        }
        self.l1 * abs + 0.5 * self.l2 * sq
    }

    fn prox_into(&self, v: &[f64], step: f64, out: &mut [f64]) {
        let thr = step * self.l1;
        let shrink = 1.0 / (1.0 + step * self.l2);
        for (o, &x) in out.iter_mut().zip(v) {
            *o = soft_threshold(x, thr) * shrink;
        }
    }

    fn strong_convexity(&self) -> f64 {
        self.l2
    }

    fn is_zero(&self) -> bool {
        self.l1 == 0.0 && self.l2 == 0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Minimizes `t psi(z) + (z - v)^2 / 2` over a grid of step `h` centered on `guess`.
    fn grid_min(v: f64, t: f64, lambda: f64, mu: f64, guess: f64, h: f64) -> f64 {
        let obj = |z: f64| t * (lambda * z.abs() + 0.5 * mu * z * z) + 0.5 * (z - v) * (z - v);
        (-2000..=2000).map(|k| guess + k as f64 * h).min_by(|a, b| obj(*a).total_cmp(&obj(*b))).unwrap()
    }

    #[test]
    fn soft_threshold_example() {
        let z = prox_l1(&[0.5, -2.0, 0.05], 0.1).unwrap();
        let expect = [0.4, -1.9, 0.0];
        for (a, b) in z.iter().zip(expect) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn trivial_cases() {
        let v = [1.5, -0.3, 0.0, 7.0];
        assert_eq!(prox_l1(&v, 0.0).unwrap(), v);
        assert_eq!(prox_l1(&[0.0; 3], 0.7).unwrap(), vec![0.0; 3]);
        let ridge = prox_elastic_net(&v, 0.5, 0.0, 2.0).unwrap();
        for (r, x) in ridge.iter().zip(v) {
            assert!((r - x / 2.0).abs() < 1e-15);
        }
        assert_eq!(prox_elastic_net(&v, 0.5, 0.3, 0.0).unwrap(), prox_l1(&v, 0.15).unwrap());
    }

    #[test]
    fn elastic_net_example() {
        let z = prox_elastic_net(&[1.0], 1.0, 0.5, 1.0).unwrap();
        assert!((z[0] - 0.25).abs() < 1e-15);
        let grid = grid_min(1.0, 1.0, 0.5, 1.0, 0.25, 1e-6);
        assert!((grid - 0.25).abs() <= 1e-6);
    }

    #[test]
    fn negative_inputs_rejected() {
        assert!(prox_l1(&[1.0], -0.1).is_err());
        assert!(prox_l1(&[1.0], f64::NAN).is_err());
        assert!(prox_elastic_net(&[1.0], 1.0, -1.0, 0.0).is_err());
        assert!(prox_elastic_net(&[1.0], 1.0, 0.0, -1.0).is_err());
        assert!(ElasticNet::new(-1.0, 0.0).is_err());
    }

    proptest! {
        #[test]
        fn optimality_condition(v in -10.0f64..10.0, t in 0.01f64..3.0, lambda in 0.0f64..2.0, mu in 0.0f64..2.0) {
            let z = prox_elastic_net(&[v], t, lambda, mu).unwrap()[0];
            // (v - z)/t - mu z must be a subgradient of lambda |.| at z
            let s = (v - z) / t - mu * z;
            if z != 0.0 {
                prop_assert!((s - lambda * z.signum()).abs() <= 1e-10 * (1.0 + lambda));
            } else {
                prop_assert!(s.abs() <= lambda + 1e-10);
            }
        }

        #[test]
        fn l1_shrinks_norm(v in proptest::collection::vec(-5.0f64..5.0, 1..8), t in 0.0f64..2.0) {
            let z = prox_l1(&v, t).unwrap();
            let n1 = |x: &[f64]| x.iter().map(|a| a.abs()).sum::<f64>();
            prop_assert!(n1(&z) <= n1(&v));
        }

        #[test]
        fn non_expansive(a in proptest::collection::vec(-5.0f64..5.0, 4), b in proptest::collection::vec(-5.0f64..5.0, 4),
                         t in 0.0f64..2.0, lambda in 0.0f64..2.0, mu in 0.0f64..2.0) {
            let reg = ElasticNet::new(lambda, mu).unwrap();
            let (mut pa, mut pb) = (vec![0.0; 4], vec![0.0; 4]);
            reg.prox_into(&a, t, &mut pa);
            reg.prox_into(&b, t, &mut pb);
            let d = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(u, v)| (u - v).powi(2)).sum::<f64>().sqrt();
            prop_assert!(d(&pa, &pb) <= d(&a, &b) + 1e-12);
        }
    }
}
