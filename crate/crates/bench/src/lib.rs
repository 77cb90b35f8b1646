//! Benchmark harness for the `bak-core` solvers: system generation and
//! loading, accuracy metrics, repeated timing, and CSV reports.

pub mod error;
pub mod io;
pub mod metrics;
pub mod report;
pub mod runner;
pub mod suite;

pub use error::{BenchError, Result};
pub use io::{load_matrix, load_vector, write_matrix_binary, write_matrix_csv, MatrixFormat};
pub use metrics::{mape, Mape};
pub use report::{emit_report, render_table, write_report, REPORT_HEADER};
pub use runner::{
    load_problem, relative_residual, run_case, run_case_detailed, BenchmarkRecord, CaseOutcome, Coefficients, MapeBase,
    Problem, RunSpec, SolverKind, SolverSpec, SystemSource,
};
pub use suite::{load_suite, parse_suite, run_specs, run_suite, TABLE1_DESK, TABLE1_DESK_NAME};
