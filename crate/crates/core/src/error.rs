use std::path::PathBuf;

/// Errors raised by the solver library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid mismatch: operands live on different grids")]
    SpecMismatch,

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("non-finite sample at node ({i}, {j})")]
    NonFinite { i: usize, j: usize },

    #[error("the zero field has no fiber")]
    ZeroField,

    #[error("no maximizer on the Nehari fiber: the fiber energy grows without bound")]
    NoMaximizer,

    #[error("no sign change of the fiber derivative in [{lo:e}, {hi:e}]")]
    BracketNotFound { lo: f64, hi: f64 },

    #[error("projection to scale t = {t:e} leaves the grid's resolution")]
    Unresolved { t: f64 },

    #[error("potential condition failed: {0}")]
    ConditionFailed(String),

    #[error("{0} solve did not converge")]
    NotConverged(&'static str),

    #[error("malformed field file: {0}")]
    Format(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
