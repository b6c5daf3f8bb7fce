use thiserror::Error;

/// Errors raised by the matrix-mean, divergence and barycenter routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {left}x{left} vs {right}x{right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix must have dimension at least 1")]
    Empty,

    #[error("matrix is not Hermitian (max |a_ij - conj(a_ji)| = {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("matrix is not positive definite (eigenvalues in [{min:e}, {max:e}])")]
    NotPositiveDefinite { min: f64, max: f64 },

    #[error("ill-conditioned input (lambda_min / lambda_max = {ratio:e})")]
    IllConditioned { ratio: f64 },

    #[error("eigensolver failed to converge on a {dim}x{dim} matrix")]
    ConvergenceFailure { dim: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("divergence value {value:e} is below the admissible floor {floor:e}")]
    NegativityViolation { value: f64, floor: f64 },

    #[error("matrices do not commute (||[A_i, A_j]||_F = {norm:e})")]
    NotCommuting { norm: f64 },

    #[error("quadrature did not converge (relative change {change:e} on node doubling)")]
    QuadratureNotConverged { change: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dims(left: usize, right: usize) -> Result<()> {
    if left == right {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { left, right })
    }
}
