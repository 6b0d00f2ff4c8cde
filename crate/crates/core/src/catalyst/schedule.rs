//! Outer-loop coefficients and inexactness schedules.

use log::warn;

use crate::solvers::MethodKind;
use crate::{Error, Result};

/// Root in `(0, 1]` of `alpha^2 = (1 - alpha) alpha_prev^2 + q alpha`.
pub fn solve_alpha(alpha_prev: f64, q: f64) -> Result<f64> {
    if !(alpha_prev > 0.0 && alpha_prev <= 1.0) {
        return Err(Error::invalid(format!("alpha_prev must lie in (0, 1], got {alpha_prev}")));
    }
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::invalid(format!("q must lie in [0, 1], got {q}")));
    }
    let a2 = alpha_prev * alpha_prev;
    let b = a2 - q;
    let disc = (b * b + 4.0 * a2).sqrt();
    let alpha = if b >= 0.0 { 2.0 * a2 / (b + disc) } else { (disc - b) / 2.0 };
    Ok(alpha.min(1.0))
}

/// `beta_k = alpha_{k-1} (1 - alpha_{k-1}) / (alpha_{k-1}^2 + alpha_k)`
pub fn beta_coefficient(alpha_prev: f64, alpha_cur: f64) -> f64 {
    alpha_prev * (1.0 - alpha_prev) / (alpha_prev * alpha_prev + alpha_cur)
}

/// `mu / (mu + kappa)`
pub fn q_ratio(mu: f64, kappa: f64) -> f64 {
    if mu + kappa > 0.0 {
        mu / (mu + kappa)
    } else {
        0.0
    }
}

/// Family of absolute-accuracy schedules `eps_k`, all proportional to an
/// upper bound `gap0` on `f(x0) - f*`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EpsilonSchedule {
    /// `gap0 (1 - rho)^k / 2` if `mu > 0`, else `gap0 / (2 (k+1)^4.1)`.
    Practical,
    /// `2 gap0 (1 - rho)^k / 9` if `mu > 0`, else `2 gap0 / (9 (k+1)^(4+gamma))`.
    Theoretical { gamma: f64 },
    /// As `Theoretical` but with `(k+2)^(4+gamma)` in the convex case.
    Shifted { gamma: f64 },
}

impl EpsilonSchedule {
    /// `eps_k`; `rho` is only used when `mu > 0`.
    pub fn value(&self, k: u64, mu: f64, rho: f64, gap0: f64) -> f64 {
        let k = k as f64;
        match *self {
            EpsilonSchedule::Practical if mu > 0.0 => 0.5 * (1.0 - rho).powf(k) * gap0,
            EpsilonSchedule::Practical => gap0 / (2.0 * (k + 1.0).powf(4.1)),
            EpsilonSchedule::Theoretical { .. } | EpsilonSchedule::Shifted { .. } if mu > 0.0 => {
                2.0 / 9.0 * (1.0 - rho).powf(k) * gap0
            }
            EpsilonSchedule::Theoretical { gamma } => 2.0 * gap0 / (9.0 * (k + 1.0).powf(4.0 + gamma)),
            EpsilonSchedule::Shifted { gamma } => 2.0 * gap0 / (9.0 * (k + 2.0).powf(4.0 + gamma)),
        }
    }
}

/// Default practical rate `0.9 sqrt(q)`.
pub fn default_rho(mu: f64, kappa: f64) -> f64 {
    0.9 * q_ratio(mu, kappa).sqrt()
}

/// Practical `eps_k` with the default rate.
pub fn epsilon_schedule(k: u64, mu: f64, kappa: f64, f_x0: f64) -> f64 {
    EpsilonSchedule::Practical.value(k, mu, default_rho(mu, kappa), f_x0)
}

/// `delta_k = sqrt(q) / (2 - sqrt(q))` if `mu > 0`, else `1 / (k+1)^2`.
pub fn delta_schedule(k: u64, mu: f64, kappa: f64) -> f64 {
    if mu > 0.0 {
        let s = q_ratio(mu, kappa).sqrt();
        s / (2.0 - s)
    } else {
        1.0 / ((k as f64 + 1.0) * (k as f64 + 1.0))
    }
}

/// Result of the default smoothing rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KappaChoice {
    pub kappa: f64,
    /// The problem is too well conditioned for acceleration to pay off;
    /// `kappa` is then a tiny floor.
    pub well_conditioned: bool,
}

/// Relative floor used when the rule gives no positive value.
pub const KAPPA_FLOOR: f64 = 1e-6;

/// `L - 2 mu` for full-gradient methods, `(L_bar - mu)/(n + 1) - mu` for
/// incremental ones, where `lipschitz` is `L` or `L_bar` accordingly.
pub fn kappa_default(kind: MethodKind, lipschitz: f64, mu: f64, n: usize) -> KappaChoice {
    let (kappa, ok) = match kind {
        MethodKind::FullGradient => (lipschitz - 2.0 * mu, lipschitz > 2.0 * mu),
        MethodKind::Incremental => {
            let n = n as f64;
            ((lipschitz - mu) / (n + 1.0) - mu, lipschitz > (n + 2.0) * mu)
        }
    };
    if ok && kappa > 0.0 {
        KappaChoice { kappa, well_conditioned: false }
    } else {
        let floor = KAPPA_FLOOR * lipschitz;
        warn!(
            "problem is well conditioned (L = {lipschitz}, mu = {mu}); using kappa = {floor:e}, expect no acceleration"
        );
        KappaChoice { kappa: floor, well_conditioned: true }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn alpha_examples() {
        assert!((solve_alpha(0.5, 0.25).unwrap() - 0.5).abs() < 1e-15);
        let golden = (5f64.sqrt() - 1.0) / 2.0;
        assert!((solve_alpha(1.0, 0.0).unwrap() - golden).abs() < 1e-15);
        // second root of a^2 + a0^2 a - a0^2 = 0 for a0 = golden
        let a0: f64 = 0.6180340;
        let expect = (-a0 * a0 + (a0.powi(4) + 4.0 * a0 * a0).sqrt()) / 2.0;
        let got = solve_alpha(a0, 0.0).unwrap();
        assert!((got - expect).abs() < 1e-14);
        assert!((got - 0.4558869).abs() < 1e-6);
        assert!(solve_alpha(0.0, 0.1).is_err());
        assert!(solve_alpha(0.5, 1.5).is_err());
    }

    #[test]
    fn beta_examples() {
        let b = beta_coefficient(0.5, 0.5);
        assert!((b - 1.0 / 3.0).abs() < 1e-15);
        assert!((b - (1.0 - 0.5) / (1.0 + 0.5)).abs() < 1e-15);
        assert_eq!(beta_coefficient(1.0, 0.6), 0.0);
        let b = beta_coefficient(0.6180340, 0.4558869);
        let expect = 0.6180340 * (1.0 - 0.6180340) / (0.6180340f64.powi(2) + 0.4558869);
        assert!((b - expect).abs() < 1e-15);
        assert!((b - 0.281753).abs() < 1e-6);
    }

    #[test]
    fn epsilon_examples() {
        // q = 1/4 with mu = 1, kappa = 3
        assert!((epsilon_schedule(1, 1.0, 3.0, 1.0) - 0.275).abs() < 1e-15);
        assert_eq!(epsilon_schedule(0, 0.0, 1.0, 2.0), 1.0);
        let e = epsilon_schedule(1, 0.0, 1.0, 1.0);
        assert!((e - 1.0 / (2.0 * 2f64.powf(4.1))).abs() < 1e-15);
        assert!((e - 0.029165).abs() < 1e-5);
        let t = EpsilonSchedule::Theoretical { gamma: 0.1 };
        assert!((t.value(1, 0.0, 0.0, 9.0) - 2.0 / 2f64.powf(4.1)).abs() < 1e-15);
        let s = EpsilonSchedule::Shifted { gamma: 0.1 };
        assert!((s.value(0, 0.0, 0.0, 9.0) - 2.0 / 2f64.powf(4.1)).abs() < 1e-15);
    }

    #[test]
    fn delta_examples() {
        assert!((delta_schedule(5, 1.0, 3.0) - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(delta_schedule(1, 0.0, 1.0), 0.25);
        assert!(delta_schedule(1, 1e-14, 1.0) < 1e-6);
    }

    #[test]
    fn kappa_examples() {
        let c = kappa_default(MethodKind::FullGradient, 1.0, 0.01, 1);
        assert!((c.kappa - 0.98).abs() < 1e-15 && !c.well_conditioned);
        let c = kappa_default(MethodKind::Incremental, 1.0, 0.0, 99);
        assert!((c.kappa - 0.01).abs() < 1e-15);
        let c = kappa_default(MethodKind::Incremental, 1.0, 0.1, 100);
        assert!(c.well_conditioned);
        assert_eq!(c.kappa, KAPPA_FLOOR);
    }

    #[test]
    fn alpha_fixed_point() {
        for q in [1e-6f64, 1e-3, 0.25, 0.9] {
            let s: f64 = q.sqrt();
            let mut a = s;
            for _ in 0..10_000 {
                let next = solve_alpha(a, q).unwrap();
                assert!((next - s).abs() < 1e-12);
                assert!((beta_coefficient(a, next) - (1.0 - s) / (1.0 + s)).abs() < 1e-12);
                a = next;
            }
        }
    }

    #[test]
    fn convex_alpha_decay() {
        let mut a = 1.0;
        for k in 1..=1000u32 {
            let next = solve_alpha(a, 0.0).unwrap();
            assert!(next < a);
            assert!(next <= 2.0 / (k as f64 + 2.0));
            a = next;
        }
    }

    proptest! {
        #[test]
        fn alpha_solves_recursion(a in 1e-4f64..=1.0, q in 0.0f64..=1.0) {
            let next = solve_alpha(a, q).unwrap();
            prop_assert!(next > 0.0 && next <= 1.0);
            let resid = next * next - (1.0 - next) * a * a - q * next;
            prop_assert!(resid.abs() <= 1e-12);
            let b = beta_coefficient(a, next);
            prop_assert!((0.0..=1.0).contains(&b));
        }

        #[test]
        fn epsilon_decreases(k in 1u64..500, mu in prop_oneof![Just(0.0), 1e-4f64..1.0], kappa in 1e-3f64..10.0) {
            let a = epsilon_schedule(k, mu, kappa, 1.0);
            let b = epsilon_schedule(k + 1, mu, kappa, 1.0);
            prop_assert!(a > 0.0 && b < a);
        }

        #[test]
        fn delta_in_unit_interval(k in 1u64..1000, mu in prop_oneof![Just(0.0), 1e-6f64..1.0], kappa in 1e-6f64..10.0) {
            let d = delta_schedule(k, mu, kappa);
            prop_assert!(d > 0.0 && d < 1.0);
        }
    }
}
