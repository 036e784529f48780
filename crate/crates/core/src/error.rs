use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the hypermine library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: file contains no hyperedges")]
    EmptyFile { path: PathBuf },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("line {line}: node {node:?} appears more than once in one hyperedge")]
    DuplicateNode { line: usize, node: String },

    #[error("missing node {0:?} in label file")]
    MissingNode(String),

    #[error("unknown node id {0:?}")]
    UnknownNode(String),

    #[error("invalid hypergraph: {0}")]
    InvalidGraph(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("attenuation factor {factor} outside convergence radius (spectral radius estimate {radius}, need factor < {limit})")]
    OutsideConvergenceRadius { factor: f64, radius: f64, limit: f64 },

    #[error("{what} did not converge (residual {residual:e})")]
    NonConvergence { what: String, residual: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn param(message: impl Into<String>) -> Self {
        Error::InvalidParameter(message.into())
    }
}
