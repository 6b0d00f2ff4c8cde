//! Moreau-envelope layer.
//!
//! For a prox-center `y` and smoothing `kappa > 0`, the sub-problem
//! `h(z) = f(z) + (kappa/2) ||z - y||^2` is `(mu + kappa)`-strongly convex with
//! an `(L + kappa)`-smooth part `h0 = f0 + (kappa/2) ||. - y||^2`. Its minimizer
//! is the proximal point `p(y)`, and `F(y) = h(p(y))` is the Moreau envelope,
//! with gradient `kappa (y - p(y))`.
//!
//! Since `h*` is unknown, inner solvers certify accuracy through an upper
//! bound on `h(z) - h*`. The default one comes from the gradient mapping
//! `[z]_eta = prox_{eta psi}(z - eta grad h0(z))`, `eta = 1/(L + kappa)`:
//!
//! ```text
//! h([z]_eta) - h* <= ||(z - [z]_eta) / eta||^2 / (2 (kappa + mu))
//! ```
//!
//! Note that the bound certifies the mapped point `[z]_eta`, not `z`.

use nalgebra::{DMatrix, DVector};

use crate::oracle::{CompositeObjective, DenseVector, EvalCounter};
use crate::problems::psd_spectrum;
use crate::{linalg, Error, Result};

/// `h(z) = f(z) + (kappa/2) ||z - y||^2`.
#[derive(Debug, Clone)]
pub struct Subproblem {
    base: CompositeObjective,
    center: DenseVector,
    kappa: f64,
}

pub fn make_subproblem(obj: &CompositeObjective, y: &DenseVector, kappa: f64) -> Result<Subproblem> {
    if !(kappa > 0.0 && kappa.is_finite()) {
        return Err(Error::invalid(format!("kappa must be positive and finite, got {kappa}")));
    }
    if y.len() != obj.dim() {
        return Err(Error::DimensionMismatch { expected: obj.dim(), got: y.len() });
    }
    Ok(Subproblem { base: obj.clone(), center: y.clone(), kappa })
}

impl Subproblem {
    /// `h = f` itself (`kappa = 0`), so the inner methods can run unaccelerated.
    pub fn unsmoothed(obj: &CompositeObjective) -> Self {
        Subproblem { base: obj.clone(), center: DenseVector::zeros(obj.dim()), kappa: 0.0 }
    }

    pub fn base(&self) -> &CompositeObjective {
        &self.base
    }

    pub fn center(&self) -> &DenseVector {
        &self.center
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    pub fn n_components(&self) -> usize {
        self.base.n_components()
    }

    /// `mu_total + kappa`
    pub fn modulus(&self) -> f64 {
        self.base.mu_total() + self.kappa
    }

    /// `L + kappa`
    pub fn smooth_lipschitz(&self) -> f64 {
        self.base.lipschitz() + self.kappa
    }

    /// Component smoothness used by stochastic steps: `L_max + kappa`.
    pub fn component_lipschitz(&self) -> f64 {
        self.base.smooth().lipschitz_max() + self.kappa
    }

    pub fn params(&self) -> EnvelopeParams {
        EnvelopeParams::new(self.base.lipschitz(), self.base.mu_total(), self.kappa)
    }

    /// `h(z)`, free.
    pub fn value(&self, z: &[f64]) -> f64 {
        self.base.value(z) + self.proximity(z)
    }

    /// Checked variant of [`Subproblem::value`].
    pub fn eval_value(&self, z: &[f64]) -> Result<f64> {
        Ok(self.base.eval_value(z)? + self.proximity(z))
    }

    fn proximity(&self, z: &[f64]) -> f64 {
        if self.kappa == 0.0 {
            0.0
        } else {
            0.5 * self.kappa * linalg::dist_sq(z, &self.center)
        }
    }

    /// `out = grad h0(z) = grad f0(z) + kappa (z - y)`, one full pass.
    pub(crate) fn smooth_gradient_into(&self, z: &[f64], out: &mut [f64], counter: &mut EvalCounter) {
        self.base.gradient_into(z, out, counter);
        self.add_proximity_gradient(z, 1.0, out);
    }

    /// `out += scale * kappa (z - y)`; no data access, never counted.
    pub(crate) fn add_proximity_gradient(&self, z: &[f64], scale: f64, out: &mut [f64]) {
        if self.kappa != 0.0 {
            let s = scale * self.kappa;
            for ((o, zj), yj) in out.iter_mut().zip(z).zip(self.center.iter()) {
                *o += s * (zj - yj);
            }
        }
    }

    /// `[z]_eta` and the mapping norm from an already computed `grad h0(z)`.
    pub(crate) fn map_from_gradient(
        &self,
        z: &[f64],
        grad: &[f64],
        eta: f64,
        counter: &mut EvalCounter,
    ) -> (Vec<f64>, f64) {
        let step: Vec<f64> = z.iter().zip(grad).map(|(a, g)| a - eta * g).collect();
        let mut mapped = vec![0.0; z.len()];
        self.base.prox_into(&step, eta, &mut mapped, counter);
        let norm = linalg::dist(z, &mapped) / eta;
        (mapped, norm)
    }

    /// Bound `norm^2 / (2 (kappa + mu))` for the mapped point.
    pub(crate) fn certificate_from_mapping(&self, mapped: Vec<f64>, mapping_norm: f64) -> Result<Certificate> {
        let modulus = self.modulus();
        if !(modulus > 0.0) {
            return Err(Error::Unsupported("gradient-mapping certificates need a strongly convex sub-problem".into()));
        }
        Ok(Certificate {
            kind: CertificateKind::MappingBound,
            bound_on_gap: mapping_norm * mapping_norm / (2.0 * modulus),
            at_point: DenseVector::new(mapped)?,
        })
    }
}

/// Step and contraction constants attached to a sub-problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopeParams {
    /// Gradient-mapping step `1 / (kappa + L)`.
    pub eta: f64,
    /// `mu / (mu + kappa)`
    pub q: f64,
}

impl EnvelopeParams {
    pub fn new(lipschitz: f64, mu: f64, kappa: f64) -> Self {
        let q = if mu + kappa > 0.0 { mu / (mu + kappa) } else { 0.0 };
        Self { eta: 1.0 / (kappa + lipschitz), q }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CertificateKind {
    /// Exact gap, only available from test oracles.
    AbsoluteGap,
    /// Gradient-mapping bound, certifies `[z]_eta`.
    MappingBound,
    /// `h(z) - d(z)` for a lower-bounding model `d` (MISO).
    DualGap,
}

/// A certified upper bound on `h(at_point) - h*`.
#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    pub kind: CertificateKind,
    pub bound_on_gap: f64,
    pub at_point: DenseVector,
}

/// `([z]_eta, ||z - [z]_eta|| / eta)`. Costs one full pass and one prox.
pub fn gradient_mapping(
    sub: &Subproblem,
    z: &[f64],
    params: &EnvelopeParams,
    counter: &mut EvalCounter,
) -> Result<(DenseVector, f64)> {
    if z.len() != sub.dim() {
        return Err(Error::DimensionMismatch { expected: sub.dim(), got: z.len() });
    }
    let mut grad = vec![0.0; z.len()];
    sub.smooth_gradient_into(z, &mut grad, counter);
    let (mapped, norm) = sub.map_from_gradient(z, &grad, params.eta, counter);
    Ok((DenseVector::new(mapped)?, norm))
}

/// Certificate for `[z]_eta` with bound `||G_eta(z)||^2 / (2 (kappa + mu))`.
pub fn residual_gap_bound(
    sub: &Subproblem,
    z: &[f64],
    params: &EnvelopeParams,
    counter: &mut EvalCounter,
) -> Result<Certificate> {
    let (mapped, norm) = gradient_mapping(sub, z, params, counter)?;
    sub.certificate_from_mapping(mapped.into_inner(), norm)
}

/// Absolute criterion `h(z) - h* <= eps`.
pub fn check_c1(cert: &Certificate, eps: f64) -> bool {
    cert.bound_on_gap <= eps
}

/// Absolute criterion in mapping-norm form: `||G_eta(z)|| <= sqrt(2 kappa eps)`
/// guarantees the mapped point is `eps`-accurate.
pub fn check_c1_mapping_norm(mapping_norm: f64, kappa: f64, eps: f64) -> bool {
    mapping_norm <= (2.0 * kappa * eps).sqrt()
}

/// Relative criterion `h(z) - h* <= (delta kappa / 2) ||z - y||^2`, evaluated at
/// the certified point.
pub fn check_c2(cert: &Certificate, delta: f64, kappa: f64, y: &[f64]) -> bool {
    cert.bound_on_gap <= 0.5 * delta * kappa * linalg::dist_sq(&cert.at_point, y)
}

/// `g(z) = kappa (y - z)`, the envelope gradient estimate; exact at `z = p(y)`.
pub fn envelope_gradient_estimate(y: &[f64], z: &[f64], kappa: f64) -> Result<DenseVector> {
    if y.len() != z.len() {
        return Err(Error::DimensionMismatch { expected: y.len(), got: z.len() });
    }
    DenseVector::new(y.iter().zip(z).map(|(a, b)| kappa * (a - b)).collect())
}

/// Exact proximal operator of `f(x) = x^T Q x / 2 - b^T x` for a fixed `kappa`,
/// factored once.
#[derive(Debug, Clone)]
pub struct QuadraticProx {
    chol: nalgebra::Cholesky<f64, nalgebra::Dyn>,
    b: DVector<f64>,
    kappa: f64,
}

impl QuadraticProx {
    pub fn new(q: &DMatrix<f64>, b: &[f64], kappa: f64) -> Result<Self> {
        if !(kappa > 0.0 && kappa.is_finite()) {
            return Err(Error::invalid(format!("kappa must be positive, got {kappa}")));
        }
        psd_spectrum(q)?;
        let p = q.nrows();
        if b.len() != p {
            return Err(Error::DimensionMismatch { expected: p, got: b.len() });
        }
        let mut m = q.clone();
        for j in 0..p {
            m[(j, j)] += kappa;
        }
        let chol = m.cholesky().ok_or_else(|| Error::invalid("Q + kappa I is not positive definite"))?;
        Ok(Self { chol, b: DVector::from_column_slice(b), kappa })
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// `p(y) = (Q + kappa I)^{-1} (b + kappa y)`
    pub fn prox(&self, y: &[f64]) -> Result<DenseVector> {
        if y.len() != self.b.len() {
            return Err(Error::DimensionMismatch { expected: self.b.len(), got: y.len() });
        }
        let rhs = DVector::from_iterator(y.len(), self.b.iter().zip(y).map(|(bj, yj)| bj + self.kappa * yj));
        DenseVector::new(self.chol.solve(&rhs).as_slice().to_vec())
    }
}

/// Exact proximal point of `f(x) = x^T Q x / 2 - b^T x`: `(Q + kappa I)^{-1} (b + kappa y)`.
pub fn exact_prox_quadratic(q: &DMatrix<f64>, b: &[f64], y: &[f64], kappa: f64) -> Result<DenseVector> {
    QuadraticProx::new(q, b, kappa)?.prox(y)
}
