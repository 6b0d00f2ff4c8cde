//! Datasets: sparse rows with labels, text ingestion and synthetic generators.

mod svmlight;
mod synthetic;

pub use svmlight::{emit_svmlight, parse_svmlight, parse_svmlight_str};
pub use synthetic::{gen_synthetic, SyntheticKind, SyntheticSpec};

use crate::{Error, Result};

/// One feature vector `a_i` in compressed form.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseRow {
    indices: Vec<usize>,
    values: Vec<f64>,
    dim: usize,
}

impl SparseRow {
    /// Indices must be strictly increasing and below `dim`.
    pub fn new(indices: Vec<usize>, values: Vec<f64>, dim: usize) -> Result<Self> {
        if indices.len() != values.len() {
            return Err(Error::invalid(format!(
                "sparse row has {} indices but {} values",
                indices.len(),
                values.len()
            )));
        }
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("sparse row indices must be strictly increasing"));
        }
        if let Some(&last) = indices.last() {
            if last >= dim {
                return Err(Error::invalid(format!("index {last} out of range for dimension {dim}")));
            }
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("sparse row value".into()));
        }
        Ok(Self { indices, values, dim })
    }

    /// Keeps every entry, zeros included, so the sparsity pattern is the full range.
    pub fn from_dense(dense: &[f64]) -> Result<Self> {
        Self::new((0..dense.len()).collect(), dense.to_vec(), dense.len())
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    #[inline]
    pub fn dot(&self, x: &[f64]) -> f64 {
        self.indices.iter().zip(&self.values).map(|(&j, v)| v * x[j]).sum()
    }

    /// `out += alpha * a_i`
    #[inline]
    pub fn axpy(&self, alpha: f64, out: &mut [f64]) {
        for (&j, v) in self.indices.iter().zip(&self.values) {
            out[j] += alpha * v;
        }
    }

    pub fn norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        self.axpy(1.0, &mut out);
        out
    }
}

/// Training set `(b_i, a_i)`, `i < n`, all rows of dimension `p`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    rows: Vec<SparseRow>,
    labels: Vec<f64>,
    dim: usize,
}

impl Dataset {
    pub fn new(rows: Vec<SparseRow>, labels: Vec<f64>, dim: usize) -> Result<Self> {
        if rows.len() != labels.len() {
            return Err(Error::invalid(format!("{} rows but {} labels", rows.len(), labels.len())));
        }
        if let Some(r) = rows.iter().position(|r| r.dim != dim) {
            return Err(Error::invalid(format!("row {r} has dimension {} instead of {dim}", rows[r].dim)));
        }
        if labels.iter().any(|b| !b.is_finite()) {
            return Err(Error::NonFinite("label".into()));
        }
        Ok(Self { rows, labels, dim })
    }

    pub fn rows(&self) -> &[SparseRow] {
        &self.rows
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    pub fn n(&self) -> usize {
        self.rows.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn max_row_norm_sq(&self) -> f64 {
        self.rows.iter().map(SparseRow::norm_sq).fold(0.0, f64::max)
    }

    pub fn mean_row_norm_sq(&self) -> f64 {
        if self.rows.is_empty() {
            return 0.0;
        }
        self.rows.iter().map(SparseRow::norm_sq).sum::<f64>() / self.rows.len() as f64
    }

    /// Same rows viewed in a larger feature space (train/test splits).
    pub fn with_dim(mut self, dim: usize) -> Result<Self> {
        if self.rows.iter().any(|r| r.indices.last().is_some_and(|&j| j >= dim)) {
            return Err(Error::invalid(format!("dimension {dim} smaller than the largest feature index")));
        }
        for r in &mut self.rows {
            r.dim = dim;
        }
        self.dim = dim;
        Ok(self)
    }
}

/// Scales every nonzero row to unit Euclidean norm. Zero rows are kept as is.
pub fn normalize_rows(data: &Dataset) -> Dataset {
    let rows = data
        .rows
        .iter()
        .map(|r| {
            let norm = r.norm_sq().sqrt();
            let mut r = r.clone();
            if norm > 0.0 {
                for v in &mut r.values {
                    *v /= norm;
                }
            }
            r
        })
        .collect();
    Dataset { rows, labels: data.labels.clone(), dim: data.dim }
}
