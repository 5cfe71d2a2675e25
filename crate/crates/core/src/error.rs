use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the simulator.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("numeric failure: {message} (residual {residual:.3e})")]
    NumericFailure { message: String, residual: f64 },

    #[error("parameter regime violated: {0}")]
    Regime(String),

    #[error("branch tracking failed on {axis} interval [{from:.9e}, {to:.9e}]: {reason}; use a finer grid")]
    Tracking {
        axis: String,
        from: f64,
        to: f64,
        reason: String,
    },

    #[error("no avoided crossing: {0}")]
    NoCrossing(String),

    #[error("unresolved degeneracy between branches {0} and {1}")]
    Degeneracy(String, String),

    #[error("divergence: {0}")]
    Divergence(String),

    #[error("out of range: {0}")]
    OutOfRange(String),

    #[error("flat trace: contrast {contrast:.3e} below floor {floor:.1e}")]
    FlatTrace { contrast: f64, floor: f64 },

    #[error("config line {line}: {message}")]
    ConfigSyntax { line: usize, message: String },

    #[error("config field `{field}`: {message}")]
    ConfigRange { field: String, message: String },

    #[error("at {axis}={value:.9e}: {source}")]
    AtPoint {
        axis: String,
        value: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn numeric(message: impl Into<String>, residual: f64) -> Self {
        Error::NumericFailure {
            message: message.into(),
            residual,
        }
    }

    pub(crate) fn invalid(message: impl Into<String>) -> Self {
        Error::InvalidArgument(message.into())
    }

    /// Process exit code for the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::ConfigSyntax { .. } | Error::ConfigRange { .. } => 2,
            Error::Io { .. } => 1,
            Error::AtPoint { source, .. } => source.exit_code(),
            _ => 3,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
