use nalgebra::{DMatrix, DVector};

use crate::oracle::SmoothOracle;
use crate::{Error, Result};

/// `f(x) = x^T Q x / 2 - b^T x` with `Q` symmetric PSD, as a single component.
#[derive(Debug, Clone)]
pub struct Quadratic {
    q: DMatrix<f64>,
    b: DVector<f64>,
    lipschitz: f64,
    mu: f64,
}

impl Quadratic {
    pub fn new(q: DMatrix<f64>, b: Vec<f64>) -> Result<Self> {
        let (lo, hi) = psd_spectrum(&q)?;
        if b.len() != q.nrows() {
            return Err(Error::DimensionMismatch { expected: q.nrows(), got: b.len() });
        }
        Ok(Self { q, b: DVector::from_vec(b), lipschitz: hi, mu: lo })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.q
    }

    pub fn linear_term(&self) -> &[f64] {
        self.b.as_slice()
    }

    /// Unconstrained minimizer `Q^{-1} b`, when `Q` is positive definite.
    pub fn minimizer(&self) -> Result<Vec<f64>> {
        let chol = self.q.clone().cholesky().ok_or_else(|| Error::invalid("quadratic is not strictly convex"))?;
        Ok(chol.solve(&self.b).as_slice().to_vec())
    }
}

/// Smallest and largest eigenvalue of a symmetric PSD matrix, the smallest
/// clamped at zero. Fails on asymmetric or indefinite input.
pub(crate) fn psd_spectrum(q: &DMatrix<f64>) -> Result<(f64, f64)> {
    if !q.is_square() || q.nrows() == 0 {
        return Err(Error::invalid("quadratic form must be a non-empty square matrix"));
    }
    let scale = q.amax().max(1.0);
    if !q.iter().all(|v| v.is_finite()) {
        return Err(Error::NonFinite("quadratic form".into()));
    }
    if (q - q.transpose()).amax() > 1e-12 * scale {
        return Err(Error::invalid("quadratic form must be symmetric"));
    }
    let eig = q.clone().symmetric_eigenvalues();
    let lo = eig.min();
    let hi = eig.max();
    if lo < -1e-10 * scale {
        return Err(Error::invalid(format!("quadratic form is not PSD (eigenvalue {lo:e})")));
    }
    Ok((lo.max(0.0), hi.max(0.0)))
}

impl SmoothOracle for Quadratic {
    fn dim(&self) -> usize {
        self.q.nrows()
    }

    fn n_components(&self) -> usize {
        1
    }

    fn value(&self, x: &[f64]) -> f64 {
        let xv = DVector::from_column_slice(x);
        0.5 * xv.dot(&(&self.q * &xv)) - self.b.dot(&xv)
    }

    fn component_value(&self, _i: usize, x: &[f64]) -> f64 {
        self.value(x)
    }

    fn gradient_into(&self, x: &[f64], out: &mut [f64]) {
        let xv = DVector::from_column_slice(x);
        let g = &self.q * xv - &self.b;
        out.copy_from_slice(g.as_slice());
    }

    fn add_component_gradient(&self, _i: usize, x: &[f64], scale: f64, out: &mut [f64]) {
        let xv = DVector::from_column_slice(x);
        let g = &self.q * xv - &self.b;
        for (o, v) in out.iter_mut().zip(g.iter()) {
            *o += scale * v;
        }
    }

    fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    fn lipschitz_max(&self) -> f64 {
        self.lipschitz
    }

    fn lipschitz_avg(&self) -> f64 {
        self.lipschitz
    }

    fn strong_convexity(&self) -> f64 {
        self.mu
    }
}
