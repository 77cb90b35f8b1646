//! Dense storage, level-1 kernels, and random system generation.

mod generate;
mod kernels;
mod matrix;
mod scalar;

pub use generate::{generate_system, Distribution, GeneratedSystem, SystemSpec};
pub use kernels::{axpy_sub, dot, matvec, norm2, residual, sum_squares};
pub use matrix::{column_view, DenseMatrix, DenseVector};
pub use scalar::{Precision, Scalar};

pub(crate) use kernels::{axpy_sub_unchecked, dot_unchecked};
