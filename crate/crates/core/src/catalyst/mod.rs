//! The Catalyst outer loop.
//!
//! With `q = mu / (mu + kappa)` and `alpha_0 = sqrt(q)` (or 1 when `mu = 0`),
//! each iteration approximately minimizes `h_k` around `y_{k-1}`, then
//!
//! ```text
//! alpha_k^2 = (1 - alpha_k) alpha_{k-1}^2 + q alpha_k
//! beta_k    = alpha_{k-1} (1 - alpha_{k-1}) / (alpha_{k-1}^2 + alpha_k)
//! y_k       = x_k + beta_k (x_k - x_{k-1})
//! ```

mod driver;
mod schedule;
mod trace;
mod warm_start;

pub use driver::{
    catalyst_run, plain_run, resolve_kappa, CatalystConfig, Criterion, KappaSpec, PlainConfig, RunFailure, Target,
};
pub use schedule::{
    beta_coefficient, default_rho, delta_schedule, epsilon_schedule, kappa_default, q_ratio, solve_alpha,
    EpsilonSchedule, KappaChoice, KAPPA_FLOOR,
};
pub use trace::{relative_gap, OuterRecord, RunStop, Trace, TraceSample};
pub use warm_start::{warm_start_point, WarmStart};
