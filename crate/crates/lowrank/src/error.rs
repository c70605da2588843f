use thiserror::Error;

/// Errors shared across the whole crate.
#[derive(Debug, Error)]
pub enum Error {
    /// Input data violates a precondition (non-finite entries, empty matrix,
    /// incompatible shapes).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The caller asked for something nonsensical (negative threshold,
    /// k larger than the number of points, mismatched label lengths).
    #[error("usage error: {0}")]
    Usage(String),

    /// A solution-family parameter does not satisfy the condition named in
    /// the message (e.g. an S with `V_A^T S != 0`).
    #[error("invalid parameter: {condition}")]
    InvalidParameter { condition: String },

    /// The sampled seed matrix stayed rank deficient after all retries.
    #[error("seed deficient: numerical rank {found} < target rank {required} after {attempts} attempts")]
    SeedDeficient {
        found: usize,
        required: usize,
        attempts: usize,
    },

    /// A solution handed to a closed-form transform does not satisfy the
    /// constraint of the model it claims to solve.
    #[error("infeasible solution: {0}")]
    Infeasible(String),

    /// LAPACK/BLAS failure bubbled up from the backend.
    #[error(transparent)]
    Backend(#[from] ndarray_linalg::error::LinalgError),
}

pub type Result<T> = std::result::Result<T, Error>;
