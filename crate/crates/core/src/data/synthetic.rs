//! Seeded synthetic problems with a controlled design condition number.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{Dataset, SparseRow};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SyntheticKind {
    LeastSquares,
    Logistic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub kind: SyntheticKind,
    pub n: usize,
    pub p: usize,
    /// Ratio of the largest to the smallest singular value of the design.
    pub condition: f64,
    /// Fraction of nonzero coefficients in the planted model.
    pub sparsity: f64,
    /// Standard deviation of the label noise (added before thresholding for logistic).
    pub noise: f64,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self { kind: SyntheticKind::LeastSquares, n: 100, p: 10, condition: 1.0, sparsity: 1.0, noise: 0.1, seed: 0 }
    }
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.p == 0 {
            return Err(Error::invalid("synthetic n and p must be at least 1"));
        }
        if !(self.condition >= 1.0 && self.condition.is_finite()) {
            return Err(Error::invalid("synthetic condition number must be finite and >= 1"));
        }
        if !(0.0..=1.0).contains(&self.sparsity) {
            return Err(Error::invalid("synthetic sparsity must lie in [0, 1]"));
        }
        if !(self.noise >= 0.0 && self.noise.is_finite()) {
            return Err(Error::invalid("synthetic noise must be finite and non-negative"));
        }
        Ok(())
    }
}

fn gaussian_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    // column-major fill keeps the stream order independent of nalgebra internals
    let data: Vec<f64> = (0..rows * cols).map(|_| rng.sample(StandardNormal)).collect();
    DMatrix::from_vec(rows, cols, data)
}

/// Design `A = sqrt(n) U diag(s) V^T` with orthonormal `U`, `V` drawn from the
/// Haar measure and singular values `s` spaced geometrically from 1 down to
/// `1/condition`; labels from a sparse planted model.
pub fn gen_synthetic(spec: &SyntheticSpec) -> Result<Dataset> {
    spec.validate()?;
    let SyntheticSpec { n, p, .. } = *spec;
    let r = n.min(p);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    let u = gaussian_matrix(&mut rng, n, r).qr().q();
    let v = gaussian_matrix(&mut rng, p, r).qr().q();
    let singular: Vec<f64> =
        (0..r).map(|j| if r == 1 { 1.0 } else { spec.condition.powf(-(j as f64) / (r - 1) as f64) }).collect();
    let s = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(singular));
    let a = (u * s * v.transpose()) * (n as f64).sqrt();

    let support = ((spec.sparsity * p as f64).round() as usize).clamp(1, p);
    let mut truth = vec![0.0; p];
    let mut perm: Vec<usize> = (0..p).collect();
    for j in 0..support {
        let k = rng.random_range(j..p);
        perm.swap(j, k);
        truth[perm[j]] = rng.sample(StandardNormal);
    }

    let mut rows = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let dense: Vec<f64> = a.row(i).iter().copied().collect();
        let signal: f64 = dense.iter().zip(&truth).map(|(x, t)| x * t).sum();
        let eps: f64 = rng.sample(StandardNormal);
        let label = match spec.kind {
            SyntheticKind::LeastSquares => signal + spec.noise * eps,
            SyntheticKind::Logistic => {
                if signal + spec.noise * eps >= 0.0 {
                    1.0
                } else {
                    -1.0
                }
            }
        };
        rows.push(SparseRow::from_dense(&dense)?);
        labels.push(label);
    }
    Dataset::new(rows, labels, p)
}
