use catalyst_core::catalyst::Trace;

pub type Result<T, E = BenchError> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("trace csv line {line}: {msg}")]
    Csv { line: usize, msg: String },

    #[error("f* estimation failed: {0}")]
    Fstar(String),

    /// The run stopped before reaching its target; the trace is kept.
    #[error("run stopped after {passes:.1} passes at relative gap {rel_gap:e}, target {target:e} not reached")]
    TargetMissed { passes: f64, rel_gap: f64, target: f64, trace: Box<Trace> },

    #[error("solver failed: {error}")]
    Solver {
        #[source]
        error: catalyst_core::Error,
        partial: Option<Box<Trace>>,
    },
}

impl BenchError {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        BenchError::Config(msg.into())
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        BenchError::Io { path: path.as_ref().display().to_string(), source }
    }

    /// Process exit code: 2 for configuration problems, 3 when a solver or
    /// the f* estimate did not converge, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            BenchError::Config(_) => 2,
            BenchError::Solver { error, .. } => match error {
                catalyst_core::Error::InvalidInput(_) | catalyst_core::Error::Unsupported(_) => 2,
                catalyst_core::Error::NonConvergence { .. } => 3,
                _ => 1,
            },
            BenchError::Fstar(_) | BenchError::TargetMissed { .. } => 3,
            BenchError::Io { .. } | BenchError::Csv { .. } => 1,
        }
    }

    /// Trace recorded before the failure, if any.
    pub fn partial_trace(&self) -> Option<&Trace> {
        match self {
            BenchError::TargetMissed { trace, .. } => Some(trace),
            BenchError::Solver { partial, .. } => partial.as_deref(),
            _ => None,
        }
    }
}

impl From<catalyst_core::Error> for BenchError {
    fn from(error: catalyst_core::Error) -> Self {
        BenchError::Solver { error, partial: None }
    }
}
