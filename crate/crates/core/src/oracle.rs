//! Oracle contracts shared by every solver.
//!
//! A [`CompositeObjective`] is `f(x) = f0(x) + psi(x)` where `f0` is an average of
//! `n` smooth convex components ([`SmoothOracle`]) and `psi` is a convex
//! regularizer with a cheap proximal operator ([`ProxRegularizer`]).
//!
//! Cost accounting follows the incremental-methods convention: only gradients
//! of single components (random data access) count on the main axis,
//! sequential full passes are tallied separately, function values are free.

use std::fmt;
use std::ops::Deref;
use std::sync::Arc;

use crate::{Error, Result};

/// Model parameters. Entries are always finite.
#[derive(Clone, PartialEq, Default)]
pub struct DenseVector(Vec<f64>);

impl DenseVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(j) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("entry {j} of a dense vector")));
        }
        Ok(Self(values))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(vec![0.0; dim])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for DenseVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl TryFrom<Vec<f64>> for DenseVector {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        Self::new(values)
    }
}

impl fmt::Debug for DenseVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.0.iter()).finish()
    }
}

/// Smooth part `f0 = (1/n) sum_i f_i` of a composite objective.
///
/// Methods here are unchecked; [`CompositeObjective`] validates dimensions and
/// does the counting. Implementations must be immutable after construction.
pub trait SmoothOracle: Send + Sync + fmt::Debug {
    fn dim(&self) -> usize;

    fn n_components(&self) -> usize;

    /// `f0(x)`
    fn value(&self, x: &[f64]) -> f64;

    /// `f_i(x)`
    fn component_value(&self, i: usize, x: &[f64]) -> f64;

    /// Writes `grad f0(x)` into `out`.
    fn gradient_into(&self, x: &[f64], out: &mut [f64]);

    /// `out += scale * grad f_i(x)`. Cost should be proportional to the
    /// support of component `i` plus any dense term it carries.
    fn add_component_gradient(&self, i: usize, x: &[f64], scale: f64, out: &mut [f64]);

    /// Global smoothness constant `L` of `f0`.
    fn lipschitz(&self) -> f64;

    /// Largest smoothness constant over the components.
    fn lipschitz_max(&self) -> f64;

    /// Average smoothness constant of the components.
    fn lipschitz_avg(&self) -> f64;

    /// Known strong-convexity lower bound, valid for every component `f_i`.
    fn strong_convexity(&self) -> f64;
}

/// Convex regularizer `psi` with a closed-form proximal operator.
pub trait ProxRegularizer: Send + Sync + fmt::Debug {
    fn value(&self, x: &[f64]) -> f64;

    /// `out = argmin_z { psi(z) + ||v - z||^2 / (2 step) }`
    fn prox_into(&self, v: &[f64], step: f64, out: &mut [f64]);

    /// Strong-convexity modulus contributed by `psi`.
    fn strong_convexity(&self) -> f64;

    /// True when `psi == 0` identically.
    fn is_zero(&self) -> bool {
        false
    }
}

/// `psi = 0`.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoRegularizer;

impl ProxRegularizer for NoRegularizer {
    fn value(&self, _x: &[f64]) -> f64 {
        0.0
    }

    fn prox_into(&self, v: &[f64], _step: f64, out: &mut [f64]) {
        out.copy_from_slice(v);
    }

    fn strong_convexity(&self) -> f64 {
        0.0
    }

    fn is_zero(&self) -> bool {
        true
    }
}

/// Exact tally of oracle calls made by one run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EvalCounter {
    pub component_grads: u64,
    pub full_passes: u64,
    pub prox_calls: u64,
}

impl EvalCounter {
    pub fn new() -> Self {
        Self::default()
    }

    /// Component gradients plus `n` for every sequential full pass.
    pub fn effective_grads(&self, n: usize) -> u64 {
        self.component_grads + self.full_passes * n as u64
    }
}

/// `f = f0 + psi` together with its constants.
#[derive(Clone, Debug)]
pub struct CompositeObjective {
    smooth: Arc<dyn SmoothOracle>,
    reg: Arc<dyn ProxRegularizer>,
    mu_total: f64,
}

impl CompositeObjective {
    pub fn new(smooth: Arc<dyn SmoothOracle>, reg: Arc<dyn ProxRegularizer>) -> Result<Self> {
        let l = smooth.lipschitz();
        let mu = smooth.strong_convexity();
        let mu_psi = reg.strong_convexity();
        if !(mu >= 0.0 && mu_psi >= 0.0 && l.is_finite() && l >= mu) {
            return Err(Error::invalid(format!("inconsistent constants: L = {l}, mu = {mu}, mu_psi = {mu_psi}")));
        }
        Ok(Self { smooth, reg, mu_total: mu + mu_psi })
    }

    /// Smooth-only objective (`psi = 0`).
    pub fn smooth_only(smooth: Arc<dyn SmoothOracle>) -> Result<Self> {
        Self::new(smooth, Arc::new(NoRegularizer))
    }

    pub fn smooth(&self) -> &dyn SmoothOracle {
        self.smooth.as_ref()
    }

    pub fn reg(&self) -> &dyn ProxRegularizer {
        self.reg.as_ref()
    }

    pub fn dim(&self) -> usize {
        self.smooth.dim()
    }

    pub fn n_components(&self) -> usize {
        self.smooth.n_components()
    }

    pub fn lipschitz(&self) -> f64 {
        self.smooth.lipschitz()
    }

    /// Strong convexity of the whole objective, smooth part plus regularizer.
    pub fn mu_total(&self) -> f64 {
        self.mu_total
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: x.len() });
        }
        Ok(())
    }

    /// `f0(x) + psi(x)`. Free: never touches a counter.
    pub fn eval_value(&self, x: &[f64]) -> Result<f64> {
        self.check_dim(x)?;
        Ok(self.value(x))
    }

    /// `grad f0(x)`, one sequential full pass.
    pub fn eval_grad_full(&self, x: &[f64], counter: &mut EvalCounter) -> Result<DenseVector> {
        self.check_dim(x)?;
        let mut out = vec![0.0; self.dim()];
        self.gradient_into(x, &mut out, counter);
        DenseVector::new(out)
    }

    /// `grad f_i(x)`, one component gradient.
    pub fn eval_grad_component(&self, i: usize, x: &[f64], counter: &mut EvalCounter) -> Result<DenseVector> {
        self.check_dim(x)?;
        let n = self.n_components();
        if i >= n {
            return Err(Error::IndexOutOfRange { index: i, n });
        }
        let mut out = vec![0.0; self.dim()];
        self.add_component_gradient(i, x, 1.0, &mut out, counter);
        DenseVector::new(out)
    }

    /// `prox_{step psi}(v)`, counted as one prox call.
    pub fn eval_prox(&self, v: &[f64], step: f64, counter: &mut EvalCounter) -> Result<DenseVector> {
        self.check_dim(v)?;
        let mut out = vec![0.0; self.dim()];
        self.prox_into(v, step, &mut out, counter);
        DenseVector::new(out)
    }

    // Unchecked hot-path variants used by the solvers.

    pub(crate) fn value(&self, x: &[f64]) -> f64 {
        self.smooth.value(x) + self.reg.value(x)
    }

    pub(crate) fn gradient_into(&self, x: &[f64], out: &mut [f64], counter: &mut EvalCounter) {
        counter.full_passes += 1;
        self.smooth.gradient_into(x, out);
    }

    pub(crate) fn add_component_gradient(
        &self,
        i: usize,
        x: &[f64],
        scale: f64,
        out: &mut [f64],
        counter: &mut EvalCounter,
    ) {
        counter.component_grads += 1;
        self.smooth.add_component_gradient(i, x, scale, out);
    }

    pub(crate) fn prox_into(&self, v: &[f64], step: f64, out: &mut [f64], counter: &mut EvalCounter) {
        counter.prox_calls += 1;
        self.reg.prox_into(v, step, out);
    }
}
