//! Coordinate-update least-squares solvers.
//!
//! Solves `x·a ≈ y` for a dense column-major `x` (obs × vars) by repeatedly
//! fitting one column at a time to the current residual:
//!
//! - [`solve_bak`]: sequential sweeps, cyclic or seeded-random column order.
//! - [`solve_bakp`]: block variant whose per-column deltas inside a block are
//!   computed in parallel against a shared residual.
//! - [`select_features`]: greedy forward selection scored by one-column trial
//!   updates, with [`stepwise_baseline`] as the classic reference.
//! - [`qr_least_squares`] / [`normal_equations_solve`]: dense reference solvers.
//!
//! All reductions accumulate sequentially, so results are reproducible bit
//! for bit, independent of the worker count.

pub mod bak;
pub mod bakp;
pub mod error;
pub mod linalg;
pub mod qr;
pub mod select;

pub use bak::{coordinate_update, residual_norm, solve_bak, solve_bak_from, ColumnOrder, CoordinateStep, SolveConfig, SolveReport};
pub use bakp::{block_deltas, solve_bakp, BlockConfig};
pub use error::{Result, SolveError};
pub use linalg::{
    axpy_sub, column_view, dot, generate_system, matvec, residual, DenseMatrix, DenseVector, Distribution, GeneratedSystem,
    Precision, Scalar, SystemSpec,
};
pub use qr::{normal_equations_solve, qr_least_squares, LeastSquaresSolution, QrFactors};
pub use select::{score_all_columns, select_features, stepwise_baseline, FeatureSelectConfig, FeatureSelectionReport, Refit};
