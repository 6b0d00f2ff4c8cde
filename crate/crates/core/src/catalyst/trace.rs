//! Convergence traces sampled on the effective-pass grid.

use std::time::Instant;

use crate::oracle::EvalCounter;
use crate::DenseVector;

/// `(f - f*) / |f*|`, or `f - f*` when `f* = 0`.
pub fn relative_gap(f: f64, f_star: f64) -> f64 {
    if f_star == 0.0 {
        f
    } else {
        (f - f_star) / f_star.abs()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceSample {
    pub component_grads: u64,
    pub full_passes: u64,
    pub effective_grads: u64,
    pub outer_iter: u64,
    /// Inner iterations accumulated over the run.
    pub inner_iters: u64,
    pub f_value: f64,
    pub wall_ms: f64,
}

/// Per outer iteration bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct OuterRecord {
    pub k: u64,
    pub inner_iterations: u64,
    /// Effective passes spent on this iteration, warm start included.
    pub passes: f64,
    pub f_value: f64,
    pub certified: bool,
    pub bound: Option<f64>,
    pub alpha: f64,
    pub beta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunStop {
    TargetReached,
    MaxOuter,
    PassCap,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    /// Number of components, the pass unit.
    pub n: usize,
    pub samples: Vec<TraceSample>,
    pub outer: Vec<OuterRecord>,
    pub final_point: DenseVector,
    pub stop: RunStop,
    /// Smoothing used; 0 for plain runs.
    pub kappa: f64,
}

impl Trace {
    pub fn reached_target(&self) -> bool {
        self.stop == RunStop::TargetReached
    }

    /// First sample whose relative gap is at most `tol`.
    pub fn first_reaching(&self, f_star: f64, tol: f64) -> Option<&TraceSample> {
        self.samples.iter().find(|s| relative_gap(s.f_value, f_star) <= tol)
    }

    pub fn last(&self) -> Option<&TraceSample> {
        self.samples.last()
    }
}

/// Builds the sample list, collapsing samples taken at equal cost.
#[derive(Debug)]
pub(crate) struct SampleLog {
    n: usize,
    samples: Vec<TraceSample>,
    started: Option<Instant>,
}

impl SampleLog {
    pub(crate) fn new(n: usize, record_wall: bool) -> Self {
        Self { n, samples: Vec::new(), started: record_wall.then(Instant::now) }
    }

    pub(crate) fn push(&mut self, counter: &EvalCounter, outer_iter: u64, inner_iters: u64, f_value: f64) {
        let sample = TraceSample {
            component_grads: counter.component_grads,
            full_passes: counter.full_passes,
            effective_grads: counter.effective_grads(self.n),
            outer_iter,
            inner_iters,
            f_value,
            wall_ms: self.started.map_or(0.0, |t| t.elapsed().as_secs_f64() * 1e3),
        };
        match self.samples.last_mut() {
            Some(last)
                if last.effective_grads == sample.effective_grads && last.component_grads == sample.component_grads =>
            {
                *last = sample
            }
            _ => self.samples.push(sample),
        }
    }

    pub(crate) fn into_samples(self) -> Vec<TraceSample> {
        self.samples
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gap_definition() {
        assert_eq!(relative_gap(1.5, 1.0), 0.5);
        assert_eq!(relative_gap(-0.5, -1.0), 0.5);
        assert_eq!(relative_gap(0.25, 0.0), 0.25);
    }

    #[test]
    fn equal_cost_samples_collapse() {
        let mut log = SampleLog::new(10, false);
        let mut c = EvalCounter::new();
        log.push(&c, 0, 0, 3.0);
        log.push(&c, 1, 2, 2.0);
        c.component_grads = 10;
        log.push(&c, 1, 5, 1.0);
        let s = log.into_samples();
        assert_eq!(s.len(), 2);
        assert_eq!((s[0].outer_iter, s[0].f_value), (1, 2.0));
        assert_eq!(s[1].effective_grads, 10);
        assert_eq!(s[1].wall_ms, 0.0);
    }
}
