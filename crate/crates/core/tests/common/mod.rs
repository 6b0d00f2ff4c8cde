#![allow(dead_code)]

use std::sync::Arc;

use catalyst_core::data::{gen_synthetic, normalize_rows, SyntheticKind, SyntheticSpec};
use catalyst_core::problems::{build_formulation, ElasticNet, LossKind, Quadratic, RegKind};
use catalyst_core::CompositeObjective;
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Symmetric matrix with the given spectrum and a random eigenbasis.
pub fn with_spectrum(eig: &[f64], rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let p = eig.len();
    let g = DMatrix::from_fn(p, p, |_, _| rng.random_range(-1.0..1.0));
    let q = g.qr().q();
    let m = &q * DMatrix::from_diagonal(&DVector::from_column_slice(eig)) * q.transpose();
    (&m + m.transpose()) * 0.5
}

pub fn linspace(lo: f64, hi: f64, p: usize) -> Vec<f64> {
    (0..p).map(|j| if p == 1 { hi } else { lo + (hi - lo) * j as f64 / (p - 1) as f64 }).collect()
}

pub fn random_vec(p: usize, scale: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..p).map(|_| rng.random_range(-scale..scale)).collect()
}

pub fn quadratic(q: DMatrix<f64>, b: Vec<f64>) -> CompositeObjective {
    CompositeObjective::smooth_only(Arc::new(Quadratic::new(q, b).unwrap())).unwrap()
}

pub fn quadratic_l1(q: DMatrix<f64>, b: Vec<f64>, l1: f64) -> CompositeObjective {
    let smooth = Arc::new(Quadratic::new(q, b).unwrap());
    CompositeObjective::new(smooth, Arc::new(ElasticNet::new(l1, 0.0).unwrap())).unwrap()
}

pub fn synthetic(kind: SyntheticKind, n: usize, p: usize, seed: u64) -> Arc<catalyst_core::data::Dataset> {
    let spec = SyntheticSpec { kind, n, p, condition: 10.0, seed, ..Default::default() };
    Arc::new(normalize_rows(&gen_synthetic(&spec).unwrap()))
}

pub fn lasso(n: usize, p: usize, lambda: f64, seed: u64) -> CompositeObjective {
    build_formulation(
        LossKind::SquaredError,
        RegKind::L1Only(lambda),
        synthetic(SyntheticKind::LeastSquares, n, p, seed),
    )
    .unwrap()
}

pub fn ridge_logistic(n: usize, p: usize, mu: f64, seed: u64) -> CompositeObjective {
    build_formulation(LossKind::Logistic, RegKind::RidgeOnly(mu), synthetic(SyntheticKind::Logistic, n, p, seed))
        .unwrap()
}
