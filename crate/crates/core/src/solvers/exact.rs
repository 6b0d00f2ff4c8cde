//! Exact inner oracle for quadratic objectives, used to isolate the outer loop.

use nalgebra::DMatrix;

use super::{check_start, InnerResult, InnerSolver, MethodKind, SolveContext, StoppingRule};
use crate::envelope::{Certificate, CertificateKind, QuadraticProx, Subproblem};
use crate::{Error, Result};

/// Solves `h` in closed form when `f = x^T Q x / 2 - b^T x` with `psi = 0`.
/// Each solve is counted as one full pass.
#[derive(Debug, Clone)]
pub struct ExactQuadraticSolver {
    q: DMatrix<f64>,
    b: Vec<f64>,
    cached: Option<QuadraticProx>,
}

impl ExactQuadraticSolver {
    pub fn new(q: DMatrix<f64>, b: Vec<f64>) -> Self {
        Self { q, b, cached: None }
    }
}

impl InnerSolver for ExactQuadraticSolver {
    fn name(&self) -> &'static str {
        "exact"
    }

    fn kind(&self) -> MethodKind {
        MethodKind::FullGradient
    }

    fn iterations_per_pass(&self, _n: usize) -> u64 {
        1
    }

    fn solve(
        &mut self,
        sub: &Subproblem,
        z0: &[f64],
        rule: &StoppingRule,
        ctx: &mut SolveContext<'_>,
    ) -> Result<InnerResult> {
        check_start(sub, z0, rule)?;
        if !sub.base().reg().is_zero() {
            return Err(Error::Unsupported("exact quadratic solves need psi = 0".into()));
        }
        if self.cached.as_ref().is_none_or(|c| c.kappa() != sub.kappa()) {
            self.cached = Some(QuadraticProx::new(&self.q, &self.b, sub.kappa())?);
        }
        let point = self.cached.as_ref().expect("factored above").prox(sub.center())?;
        ctx.counter.full_passes += 1;
        let cert = Certificate { kind: CertificateKind::AbsoluteGap, bound_on_gap: 0.0, at_point: point };
        ctx.note(&cert);
        ctx.tick(1, &cert.at_point)?;
        Ok(InnerResult::certified(cert, 1))
    }
}
