//! Linear-model losses over a [`Dataset`]: `f_i(x) = loss(b_i, a_i^T x) + (ridge/2) ||x||^2`.

use std::sync::Arc;

use crate::data::Dataset;
use crate::oracle::{DenseVector, SmoothOracle};
use crate::{linalg, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LossKind {
    /// `log(1 + exp(-b a^T x))`, labels in {-1, +1}.
    Logistic,
    /// `(b - a^T x)^2 / 2`.
    SquaredError,
}

impl LossKind {
    /// Curvature bound of the scalar loss.
    pub fn curvature(self) -> f64 {
        match self {
            LossKind::Logistic => 0.25,
            LossKind::SquaredError => 1.0,
        }
    }

    #[inline]
    fn value(self, b: f64, t: f64) -> f64 {
        match self {
            LossKind::Logistic => logistic_loss(b * t),
            LossKind::SquaredError => 0.5 * (b - t) * (b - t),
        }
    }

    /// Derivative with respect to the prediction `t = a^T x`.
    #[inline]
    fn derivative(self, b: f64, t: f64) -> f64 {
        match self {
            LossKind::Logistic => -b * sigmoid_neg(b * t),
            LossKind::SquaredError => t - b,
        }
    }
}

/// `log(1 + exp(-u))`, stable for large `|u|`.
#[inline]
pub fn logistic_loss(u: f64) -> f64 {
    (-u).max(0.0) + (-u.abs()).exp().ln_1p()
}

/// `1 / (1 + exp(u))`
#[inline]
fn sigmoid_neg(u: f64) -> f64 {
    if u >= 0.0 {
        let e = (-u).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + u.exp())
    }
}

/// Which terms a loss evaluation averages over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sample {
    Component(usize),
    Full,
}

/// Value and gradient of the (unregularized) logistic loss for one sample or
/// averaged over the dataset.
pub fn logistic_value_grad(data: &Dataset, x: &[f64], which: Sample) -> Result<(f64, DenseVector)> {
    check_binary_labels(data)?;
    if x.len() != data.dim() {
        return Err(Error::DimensionMismatch { expected: data.dim(), got: x.len() });
    }
    let mut grad = vec![0.0; data.dim()];
    let value = match which {
        Sample::Component(i) => {
            if i >= data.n() {
                return Err(Error::IndexOutOfRange { index: i, n: data.n() });
            }
            let (row, b) = (&data.rows()[i], data.labels()[i]);
            let t = row.dot(x);
            row.axpy(LossKind::Logistic.derivative(b, t), &mut grad);
            LossKind::Logistic.value(b, t)
        }
        Sample::Full => {
            if data.is_empty() {
                return Err(Error::invalid("empty dataset"));
            }
            let inv_n = 1.0 / data.n() as f64;
            let mut total = 0.0;
            for (row, &b) in data.rows().iter().zip(data.labels()) {
                let t = row.dot(x);
                total += LossKind::Logistic.value(b, t);
                row.axpy(LossKind::Logistic.derivative(b, t) * inv_n, &mut grad);
            }
            total * inv_n
        }
    };
    Ok((value, DenseVector::new(grad)?))
}

pub(crate) fn check_binary_labels(data: &Dataset) -> Result<()> {
    match data.labels().iter().position(|&b| b != 1.0 && b != -1.0) {
        Some(i) => Err(Error::invalid(format!(
            "logistic loss needs labels in {{-1, +1}}, sample {i} has {}",
            data.labels()[i]
        ))),
        None => Ok(()),
    }
}

/// Finite-sum oracle of a linear model, ridge optionally folded into every component.
#[derive(Debug, Clone)]
pub struct LinearModel {
    data: Arc<Dataset>,
    loss: LossKind,
    ridge: f64,
    lipschitz_max: f64,
    lipschitz_avg: f64,
}

impl LinearModel {
    pub fn new(data: Arc<Dataset>, loss: LossKind, ridge: f64) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::invalid("empty dataset"));
        }
        if !(ridge >= 0.0 && ridge.is_finite()) {
            return Err(Error::invalid(format!("ridge must be finite and >= 0, got {ridge}")));
        }
        if loss == LossKind::Logistic {
            check_binary_labels(&data)?;
        }
        let c = loss.curvature();
        let lipschitz_max = c * data.max_row_norm_sq() + ridge;
        let lipschitz_avg = c * data.mean_row_norm_sq() + ridge;
        Ok(Self { data, loss, ridge, lipschitz_max, lipschitz_avg })
    }

    pub fn data(&self) -> &Dataset {
        &self.data
    }

    pub fn loss(&self) -> LossKind {
        self.loss
    }

    pub fn ridge(&self) -> f64 {
        self.ridge
    }

    /// `A x` into `out`.
    pub fn predictions(&self, x: &[f64], out: &mut [f64]) {
        for (o, row) in out.iter_mut().zip(self.data.rows()) {
            *o = row.dot(x);
        }
    }

    /// `(1/n) sum_i loss(b_i, t_i)` for given predictions `t`.
    pub fn mean_loss(&self, predictions: &[f64]) -> f64 {
        let total: f64 = predictions.iter().zip(self.data.labels()).map(|(&t, &b)| self.loss.value(b, t)).sum();
        total / self.data.n() as f64
    }
}

impl SmoothOracle for LinearModel {
    fn dim(&self) -> usize {
        self.data.dim()
    }

    fn n_components(&self) -> usize {
        self.data.n()
    }

    fn value(&self, x: &[f64]) -> f64 {
        let total: f64 =
            self.data.rows().iter().zip(self.data.labels()).map(|(row, &b)| self.loss.value(b, row.dot(x))).sum();
        total / self.data.n() as f64 + 0.5 * self.ridge * linalg::norm_sq(x)
    }

    fn component_value(&self, i: usize, x: &[f64]) -> f64 {
        let row = &self.data.rows()[i];
        self.loss.value(self.data.labels()[i], row.dot(x)) + 0.5 * self.ridge * linalg::norm_sq(x)
    }

    fn gradient_into(&self, x: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        let inv_n = 1.0 / self.data.n() as f64;
        for (row, &b) in self.data.rows().iter().zip(self.data.labels()) {
            row.axpy(self.loss.derivative(b, row.dot(x)) * inv_n, out);
        }
        if self.ridge > 0.0 {
            linalg::axpy(self.ridge, x, out);
        }
    }

    fn add_component_gradient(&self, i: usize, x: &[f64], scale: f64, out: &mut [f64]) {
        let row = &self.data.rows()[i];
        let d = self.loss.derivative(self.data.labels()[i], row.dot(x));
        row.axpy(scale * d, out);
        if self.ridge > 0.0 {
            linalg::axpy(scale * self.ridge, x, out);
        }
    }

    fn lipschitz(&self) -> f64 {
        // lambda_max(A^T A / n) <= trace / n
        self.lipschitz_avg
    }

    fn lipschitz_max(&self) -> f64 {
        self.lipschitz_max
    }

    fn lipschitz_avg(&self) -> f64 {
        self.lipschitz_avg
    }

    fn strong_convexity(&self) -> f64 {
        self.ridge
    }
}
