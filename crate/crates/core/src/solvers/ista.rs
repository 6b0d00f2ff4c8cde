//! Proximal gradient descent with step `1/(L + kappa)`.

use super::{check_start, Flow, InnerResult, InnerSolver, MethodKind, SolveContext, StopReason, StoppingRule};
use crate::envelope::Subproblem;
use crate::Result;

/// `z+ = prox_{eta psi}(z - eta grad h0(z))`. Every step is one full pass, and
/// its mapping norm certifies the new iterate for free.
pub fn ista_solve(
    sub: &Subproblem,
    z0: &[f64],
    rule: &StoppingRule,
    ctx: &mut SolveContext<'_>,
) -> Result<InnerResult> {
    check_start(sub, z0, rule)?;
    let eta = 1.0 / sub.smooth_lipschitz();
    let mut z = z0.to_vec();
    let mut grad = vec![0.0; z.len()];
    let mut last = None;
    let mut t = 0u64;
    loop {
        sub.smooth_gradient_into(&z, &mut grad, ctx.counter);
        let (mapped, norm) = sub.map_from_gradient(&z, &grad, eta, ctx.counter);
        t += 1;
        match *rule {
            StoppingRule::Budget(budget) => {
                z = mapped;
                if t >= budget {
                    return InnerResult::unfinished(z, t, None, StopReason::BudgetExhausted);
                }
            }
            _ => {
                let cert = sub.certificate_from_mapping(mapped, norm)?;
                ctx.note(&cert);
                if rule.accepts(&cert, sub) {
                    return Ok(InnerResult::certified(cert, t));
                }
                z = cert.at_point.to_vec();
                last = Some(cert);
            }
        }
        if ctx.tick(t, &z)? == Flow::Break {
            return InnerResult::unfinished(z, t, last, StopReason::Interrupted);
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct IstaSolver;

impl InnerSolver for IstaSolver {
    fn name(&self) -> &'static str {
        "ista"
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
        ista_solve(sub, z0, rule, ctx)
    }
}
