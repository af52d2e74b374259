use std::path::PathBuf;

use crate::geometry::Point3;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("singular Green's function: points are {distance:e} m apart (minimum standoff {min:e} m)")]
    Singularity { distance: f64, min: f64 },

    #[error("grid point {index} at {point} is {distance:e} m from a source (minimum standoff {min:e} m)")]
    GridStandoff {
        index: usize,
        point: Point3,
        distance: f64,
        min: f64,
    },

    #[error("config syntax error at line {line}, column {column}: {message}")]
    ConfigSyntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("config invalid: {0}")]
    ConfigSemantic(String),

    #[error("I/O error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Stable machine-readable class name.
    pub fn class(&self) -> &'static str {
        match self {
            Error::InvalidInput(_) => "invalid-input",
            Error::Singularity { .. } => "singularity",
            Error::GridStandoff { .. } => "grid-standoff",
            Error::ConfigSyntax { .. } => "config-syntax",
            Error::ConfigSemantic(_) => "config-semantic",
            Error::Io { .. } => "io",
        }
    }

    /// Process exit code: 2 for validation failures, 3 for runtime failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidInput(_) | Error::ConfigSyntax { .. } | Error::ConfigSemantic(_) => 2,
            Error::Singularity { .. } | Error::GridStandoff { .. } | Error::Io { .. } => 3,
        }
    }
}
