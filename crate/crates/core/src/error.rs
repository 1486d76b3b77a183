use thiserror::Error;

/// Errors raised by state constructions, projections and solvers.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("invalid subsystem dimensions: {0}")]
    InvalidDims(String),

    #[error("invalid subsystem index set: {0}")]
    InvalidKeepSet(String),

    #[error("empty keep set; use the full trace instead")]
    EmptyKeepSet,

    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch ({context}): expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("not a density matrix: {0}")]
    NotDensity(String),

    #[error("invalid spectrum: {0}")]
    InvalidSpectrum(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("eigendecomposition did not converge for a {order}x{order} matrix")]
    EigenFailure { order: usize },

    #[error("inconsistent marginal constraints (max discrepancy {max_discrepancy:.3e})")]
    InconsistentConstraints { max_discrepancy: f64 },

    #[error("marginals are not isospectral (max eigenvalue mismatch {mismatch:.3e})")]
    NotIsospectral { mismatch: f64 },

    #[error("rank {k} outside the admissible interval [{min}, {max}]")]
    RankOutOfRange { k: usize, min: usize, max: usize },

    #[error("interlacing violated at position {position}: {detail}")]
    InterlacingViolated { position: usize, detail: String },

    #[error("line search collapsed at iteration {iteration} (step {step:.3e})")]
    LineSearchCollapse { iteration: usize, step: f64 },

    #[error("inner projection did not converge after {sweeps} sweeps (residual {residual:.3e})")]
    InnerProjectionFailed { sweeps: usize, residual: f64 },

    #[error("linear constraint system is inconsistent (residual {residual:.3e})")]
    InconsistentSystem { residual: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
