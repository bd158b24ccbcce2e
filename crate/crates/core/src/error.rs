//! Error type shared across the crate.

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong while building models, synthesizing
/// responses, or simulating them.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("vertex {vertex} out of range for graph with {n_nodes} nodes")]
    VertexOutOfRange { vertex: usize, n_nodes: usize },

    #[error("matrix {name} is not symmetric positive semidefinite (min eigenvalue {min_eig:.3e})")]
    NotPsd { name: &'static str, min_eig: f64 },

    #[error("matrix {name} is not symmetric positive definite (min eigenvalue {min_eig:.3e})")]
    NotPd { name: &'static str, min_eig: f64 },

    /// The support mask admits no achievable response for the listed columns.
    /// `residual` is the smallest attainable max-abs violation of the
    /// achievability constraints over the masked variables.
    #[error(
        "no achievable response under the support mask (columns {columns:?}, \
         constraint residual {residual:.3e}); widen the locality radius"
    )]
    Infeasible { columns: Vec<usize>, residual: f64 },

    #[error("response violates achievability: residual {residual:.3e} exceeds {tol:.1e}")]
    NotAchievable { residual: f64, tol: f64 },

    #[error("riccati iteration stalled after {iterations} iterations (residual {residual:.3e})")]
    RiccatiDiverged { iterations: usize, residual: f64 },

    #[error("non-finite value at step {t} of rollout")]
    NonFinite { t: usize },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("malformed input: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
