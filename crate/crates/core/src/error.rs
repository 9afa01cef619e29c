use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("graph has no nodes")]
    EmptyGraph,

    #[error("label mismatch: {0}")]
    Labels(String),

    #[error("invalid model parameters: {0}")]
    InvalidParams(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("node {node} has zero degree and tau = 0")]
    ZeroDegree { node: usize },

    #[error("column {column} is identically zero")]
    ZeroColumn { column: usize },

    #[error("eigensolver did not converge for a {n}x{n} matrix (tolerance {tol:e}, {iterations} restarts)")]
    NoConvergence {
        n: usize,
        tol: f64,
        iterations: usize,
    },

    #[error("population check failed: {0}")]
    Oracle(String),
}

impl Error {
    /// True when the failure is numerical rather than caused by bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::NoConvergence { .. } | Error::Oracle(_))
    }
}
