use alloc::string::String;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("eigensolver did not converge after {iterations} sweeps on index {index} (d = {dim}, max |entry| = {max_abs:e})")]
    NonConvergence {
        dim: usize,
        index: usize,
        iterations: usize,
        max_abs: f64,
    },

    #[error("matrix is not unitary: max |U U^dag - I| = {deviation:e} exceeds {tolerance:e}")]
    NotUnitary { deviation: f64, tolerance: f64 },

    #[error("state is not normalized: |norm - 1| = {deviation:e}")]
    NotNormalized { deviation: f64 },

    #[error("non-finite entry in input")]
    NonFinite,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("word budget exceeded: {count} candidate words > budget {budget}")]
    BudgetExceeded { count: u128, budget: u128 },

    #[error("structural error: {0}")]
    Structural(String),
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn check_dims(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}
