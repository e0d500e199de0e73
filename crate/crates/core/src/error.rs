use std::path::PathBuf;

/// Errors produced anywhere in the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("field contains a non-finite value ({context})")]
    NonFinite { context: String },

    #[error("spectral symbol vanishes on mode ({m1}, {m2}) and no null-mode rule applies")]
    SingularSymbol { m1: i64, m2: i64 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("unknown {kind} `{name}`")]
    UnknownName { kind: &'static str, name: String },

    #[error("missing parameter `{0}`")]
    MissingParameter(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("implicit linear solve did not converge after {iterations} iterations (residual {residual:.3e}, tolerance {tolerance:.3e})")]
    LinearSolve {
        iterations: usize,
        residual: f64,
        tolerance: f64,
    },

    #[error("stage iteration did not converge after {iterations} iterations (last increment {increment:.3e}); time step likely too large")]
    StageSolve { iterations: usize, increment: f64 },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("key `{key}`: {message}")]
    Validation { key: String, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn param(name: &str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name: name.to_string(),
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures of the numerical solvers (as opposed to bad input).
    pub fn is_solver_failure(&self) -> bool {
        matches!(
            self,
            Error::LinearSolve { .. } | Error::StageSolve { .. } | Error::NonFinite { .. }
        )
    }
}
