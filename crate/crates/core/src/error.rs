use thiserror::Error;

/// Errors produced by the kernels and solvers in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("index {index} out of range for {len} columns")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("degenerate input: {0}")]
    DegenerateInput(&'static str),

    #[error("invalid configuration: {0}")]
    Config(String),

    /// The block-parallel solver grew the residual norm by more than the
    /// guard factor over one sweep.
    #[error(
        "residual diverged at sweep {sweep} with block width thr={thr} \
         (squared norm {before:e} -> {after:e}); reduce thr"
    )]
    Divergence {
        thr: usize,
        sweep: usize,
        before: f64,
        after: f64,
    },

    #[error("factorization failed: {0}")]
    Factorization(&'static str),

    #[error("no admissible column left to select")]
    SelectionExhausted,
}

pub type Result<T> = std::result::Result<T, SolveError>;

pub(crate) fn check_len(context: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(SolveError::DimensionMismatch {
            context,
            expected,
            found,
        })
    }
}
