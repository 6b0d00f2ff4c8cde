//! Catalyst: acceleration of linearly-convergent first-order methods.
//!
//! An outer loop runs an inexact accelerated proximal-point scheme on a
//! composite objective `f = f0 + psi`. Each outer step approximately minimizes
//! the strongly-convex auxiliary problem
//!
//! ```text
//! h_k(z) = f(z) + (kappa / 2) * ||z - y_{k-1}||^2
//! ```
//!
//! with an inner method (proximal gradient, SVRG, SAGA or MISO), stopping on
//! an absolute accuracy, a relative accuracy or a fixed one-pass budget, and
//! then applies Nesterov extrapolation to the certified iterates.
//!
//! Module map:
//! - [`oracle`]: vectors, smooth finite-sum oracles, regularizers, evaluation counting.
//! - [`data`]: sparse datasets, SVMlight ingestion, synthetic generators.
//! - [`problems`]: logistic / squared losses, elastic-net proximal operators, quadratics.
//! - [`envelope`]: sub-problems, gradient mapping and inexactness certificates.
//! - [`solvers`]: the inner methods and their stopping rules.
//! - [`catalyst`]: parameter schedules, warm starts and the outer driver.

pub mod catalyst;
pub mod data;
pub mod envelope;
mod error;
pub mod linalg;
pub mod oracle;
pub mod problems;
pub mod solvers;

pub use error::{Error, Result};
pub use oracle::{CompositeObjective, DenseVector, EvalCounter, ProxRegularizer, SmoothOracle};
