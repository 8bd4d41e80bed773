use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the solver pipeline.
#[derive(Debug, Error)]
pub enum HdgError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("mesh construction failed: {0}")]
    MeshConstruction(String),

    #[error("quadrature exactness {requested} unsupported (max supported degree is {max})")]
    UnsupportedQuadrature { requested: usize, max: usize },

    #[error("element {element}: {reason}")]
    Conditioning { element: usize, reason: String },

    #[error("singular material: {0}")]
    SingularMaterial(String),

    #[error("assembly error: {0}")]
    Assembly(String),

    #[error("condensed system is not symmetric positive definite: {0}")]
    NotSpd(String),

    #[error("solver did not converge: {0}")]
    NoConvergence(String),

    #[error("config error in `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl HdgError {
    pub fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        HdgError::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        HdgError::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = HdgError> = std::result::Result<T, E>;
