use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::{Duration, Instant};

use bak_core::{
    generate_system, qr_least_squares, residual, solve_bak, solve_bakp, BlockConfig, DenseMatrix, DenseVector, Precision,
    Scalar, SolveConfig, SolveError, SystemSpec,
};

use crate::error::{BenchError, Result};
use crate::io::{load_matrix, load_vector, write_matrix_binary, MatrixFormat};
use crate::metrics::mape;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SolverKind {
    Bak,
    Bakp,
    Qr,
}

impl SolverKind {
    pub fn name(self) -> &'static str {
        match self {
            SolverKind::Bak => "bak",
            SolverKind::Bakp => "bakp",
            SolverKind::Qr => "qr",
        }
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SolverKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "bak" => Ok(SolverKind::Bak),
            "bakp" => Ok(SolverKind::Bakp),
            "qr" => Ok(SolverKind::Qr),
            other => Err(format!("unknown solver `{other}` (expected bak, bakp or qr)")),
        }
    }
}

/// What the accuracy column compares.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MapeBase {
    /// `x·â` against `y`.
    #[default]
    Prediction,
    /// `â` against the generating coefficients; only available for generated systems.
    Coefficients,
}

impl FromStr for MapeBase {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "prediction" | "y" => Ok(MapeBase::Prediction),
            "coeffs" | "coefficients" => Ok(MapeBase::Coefficients),
            other => Err(format!("unknown MAPE base `{other}` (expected prediction or coeffs)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverSpec {
    pub kind: SolverKind,
    /// Block width for `bakp`; ignored otherwise.
    pub thr: usize,
    /// Worker threads for `bakp`; 0 = all available cores.
    pub workers: usize,
    pub tol: f64,
    pub max_iter: usize,
}

impl SolverSpec {
    pub fn new(kind: SolverKind) -> Self {
        let defaults = SolveConfig::default();
        SolverSpec {
            kind,
            thr: 50,
            workers: 0,
            tol: defaults.tol,
            max_iter: defaults.max_iter,
        }
    }

    fn solve_config(&self) -> SolveConfig {
        SolveConfig::default()
            .with_tol(self.tol)
            .with_max_iter(self.max_iter)
    }

    /// Block width as reported: 0 unless the solver is blocked.
    pub fn reported_thr(&self) -> usize {
        match self.kind {
            SolverKind::Bakp => self.thr,
            _ => 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SystemSource {
    Generated(SystemSpec),
    /// Design matrix and target loaded from files; format chosen from the extension.
    Files { input: PathBuf, target: PathBuf },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub case_id: String,
    pub system: SystemSource,
    pub solver: SolverSpec,
    pub precision: Precision,
    pub repetitions: usize,
    pub mape_base: MapeBase,
}

impl RunSpec {
    pub const DEFAULT_REPETITIONS: usize = 10;

    pub fn generated(case_id: impl Into<String>, system: SystemSpec, solver: SolverSpec) -> Self {
        RunSpec {
            case_id: case_id.into(),
            system: SystemSource::Generated(system),
            solver,
            precision: Precision::Single,
            repetitions: Self::DEFAULT_REPETITIONS,
            mape_base: MapeBase::Prediction,
        }
    }

    pub fn with_precision(mut self, precision: Precision) -> Self {
        self.precision = precision;
        self
    }

    pub fn with_repetitions(mut self, repetitions: usize) -> Self {
        self.repetitions = repetitions;
        self
    }

    pub fn with_mape_base(mut self, base: MapeBase) -> Self {
        self.mape_base = base;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.repetitions == 0 {
            return Err(BenchError::Usage("repetitions must be at least 1".into()));
        }
        if self.mape_base == MapeBase::Coefficients && !matches!(self.system, SystemSource::Generated(_)) {
            return Err(BenchError::Usage(
                "coefficient MAPE needs a generated system with known coefficients".into(),
            ));
        }
        Ok(())
    }

    pub fn seed(&self) -> u64 {
        match &self.system {
            SystemSource::Generated(s) => s.seed,
            SystemSource::Files { .. } => 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkRecord {
    pub case_id: String,
    pub obs: usize,
    pub vars: usize,
    pub solver: SolverKind,
    pub thr: usize,
    pub precision: Precision,
    pub wall_time_s: f64,
    pub sweeps: usize,
    pub mape: f64,
    pub mape_fallback: bool,
    pub rel_residual: f64,
    pub seed: u64,
    pub converged: bool,
    /// Set when the solver gave up; accuracy fields are then meaningless.
    pub failure: Option<String>,
}

impl BenchmarkRecord {
    pub fn failed(&self) -> bool {
        self.failure.is_some()
    }
}

/// Estimated coefficients in the precision the case ran at.
#[derive(Debug, Clone, PartialEq)]
pub enum Coefficients {
    Single(DenseVector<f32>),
    Double(DenseVector<f64>),
}

impl Coefficients {
    /// Writes the coefficients as a `vars × 1` binary matrix.
    pub fn write_binary(&self, path: &Path) -> Result<()> {
        match self {
            Coefficients::Single(v) => write_matrix_binary(path, &column_matrix(v)?),
            Coefficients::Double(v) => write_matrix_binary(path, &column_matrix(v)?),
        }
    }

    pub fn to_f64(&self) -> Vec<f64> {
        match self {
            Coefficients::Single(v) => v.iter().map(|&c| c as f64).collect(),
            Coefficients::Double(v) => v.to_vec(),
        }
    }
}

fn column_matrix<T: Scalar>(v: &DenseVector<T>) -> Result<DenseMatrix<T>> {
    Ok(DenseMatrix::from_col_major(v.len(), 1, v.to_vec())?)
}

#[derive(Debug, Clone)]
pub struct CaseOutcome {
    pub record: BenchmarkRecord,
    /// `None` when the run failed.
    pub coefficients: Option<Coefficients>,
}

pub fn run_case(spec: &RunSpec) -> Result<BenchmarkRecord> {
    run_case_detailed(spec).map(|o| o.record)
}

pub fn run_case_detailed(spec: &RunSpec) -> Result<CaseOutcome> {
    spec.validate()?;
    match spec.precision {
        Precision::Single => {
            let (record, a) = run_typed::<f32>(spec)?;
            Ok(CaseOutcome {
                record,
                coefficients: a.map(Coefficients::Single),
            })
        }
        Precision::Double => {
            let (record, a) = run_typed::<f64>(spec)?;
            Ok(CaseOutcome {
                record,
                coefficients: a.map(Coefficients::Double),
            })
        }
    }
}

/// A loaded or generated system; `a_true` is known only for generated ones.
pub struct Problem<T> {
    pub x: DenseMatrix<T>,
    pub y: DenseVector<T>,
    pub a_true: Option<DenseVector<T>>,
}

pub fn load_problem<T: Scalar>(source: &SystemSource) -> Result<Problem<T>> {
    match source {
        SystemSource::Generated(spec) => {
            let g = generate_system::<T>(spec)?;
            Ok(Problem {
                x: g.x,
                y: g.y,
                a_true: Some(g.a_true),
            })
        }
        SystemSource::Files { input, target } => {
            let x = load_matrix::<T>(input, MatrixFormat::from_path(input))?;
            let y = load_vector::<T>(target, MatrixFormat::from_path(target))?;
            if y.len() != x.rows() {
                return Err(SolveError::DimensionMismatch {
                    context: "target length",
                    expected: x.rows(),
                    found: y.len(),
                }
                .into());
            }
            Ok(Problem {
                x,
                y: DenseVector::from_vec(y),
                a_true: None,
            })
        }
    }
}

struct Solved<T> {
    a: DenseVector<T>,
    sweeps: usize,
    converged: bool,
}

fn solve_once<T: Scalar>(p: &Problem<T>, solver: &SolverSpec) -> std::result::Result<Solved<T>, SolveError> {
    match solver.kind {
        SolverKind::Bak => {
            let r = solve_bak(&p.x, &p.y, &solver.solve_config())?;
            Ok(Solved {
                a: r.a_hat,
                sweeps: r.sweeps_run,
                converged: r.converged,
            })
        }
        SolverKind::Bakp => {
            let cfg = BlockConfig::new(solver.solve_config(), solver.thr).with_workers(solver.workers);
            let r = solve_bakp(&p.x, &p.y, &cfg)?;
            Ok(Solved {
                a: r.a_hat,
                sweeps: r.sweeps_run,
                converged: r.converged,
            })
        }
        SolverKind::Qr => {
            let r = qr_least_squares(&p.x, &p.y)?;
            Ok(Solved {
                a: r.coeffs,
                sweeps: 0,
                converged: true,
            })
        }
    }
}

/// `‖y − x·a‖ / ‖y‖`, or the absolute residual norm when `y = 0`.
pub fn relative_residual<T: Scalar>(x: &DenseMatrix<T>, y: &[T], a: &[T]) -> Result<f64> {
    let e = residual(x, y, a)?;
    let norm = |v: &[T]| v.iter().map(|c| c.to_f64_lossy().powi(2)).sum::<f64>().sqrt();
    let y_norm = norm(y);
    let e_norm = norm(&e);
    Ok(if y_norm > 0.0 { e_norm / y_norm } else { e_norm })
}

fn run_typed<T: Scalar>(spec: &RunSpec) -> Result<(BenchmarkRecord, Option<DenseVector<T>>)> {
    let p = load_problem::<T>(&spec.system)?;
    let mut record = BenchmarkRecord {
        case_id: spec.case_id.clone(),
        obs: p.x.rows(),
        vars: p.x.cols(),
        solver: spec.solver.kind,
        thr: spec.solver.reported_thr(),
        precision: spec.precision,
        wall_time_s: 0.0,
        sweeps: 0,
        mape: 0.0,
        mape_fallback: false,
        rel_residual: 0.0,
        seed: spec.seed(),
        converged: false,
        failure: None,
    };

    let mut best = Duration::MAX;
    let mut solved = None;
    for _ in 0..spec.repetitions {
        let start = Instant::now();
        let outcome = solve_once(&p, &spec.solver);
        let elapsed = start.elapsed();
        best = best.min(elapsed);
        match outcome {
            Ok(s) => solved = Some(s),
            Err(err @ SolveError::Divergence { sweep, .. }) => {
                record.wall_time_s = elapsed.as_secs_f64().max(f64::MIN_POSITIVE);
                record.sweeps = sweep;
                record.mape = f64::INFINITY;
                record.rel_residual = f64::INFINITY;
                record.failure = Some(err.to_string());
                return Ok((record, None));
            }
            Err(other) => return Err(other.into()),
        }
    }
    let solved = solved.expect("at least one repetition");

    let m = match spec.mape_base {
        MapeBase::Prediction => {
            let pred = bak_core::matvec(&p.x, &solved.a)?;
            mape(&pred, &p.y)?
        }
        MapeBase::Coefficients => {
            let truth = p.a_true.as_ref().expect("validated: generated system");
            mape(&solved.a, truth)?
        }
    };
    record.wall_time_s = best.as_secs_f64().max(f64::MIN_POSITIVE);
    record.sweeps = solved.sweeps;
    record.converged = solved.converged;
    record.mape = m.value;
    record.mape_fallback = m.fallback;
    record.rel_residual = relative_residual(&p.x, &p.y, &solved.a)?;
    Ok((record, Some(solved.a)))
}
