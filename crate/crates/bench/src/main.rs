use std::path::PathBuf;
use std::process::ExitCode;

use bak_bench::{
    emit_report, load_matrix, load_suite, load_vector, render_table, run_case_detailed, run_specs, BenchError,
    MapeBase, MatrixFormat, RunSpec, SolverKind, SolverSpec, SystemSource,
};
use bak_core::{
    select_features, stepwise_baseline, FeatureSelectConfig, FeatureSelectionReport, Precision, Refit, Scalar,
    SolveConfig, SystemSpec,
};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "bak-solve", version, about = "Coordinate-update least-squares solvers and benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Time solvers on generated or loaded systems and write a CSV report.
    Bench(BenchArgs),
    /// Greedy forward feature selection on a loaded system.
    Select(SelectArgs),
}

#[derive(Args)]
struct BenchArgs {
    /// Suite file, or `table1_desk` for the bundled grid.
    #[arg(long, conflicts_with_all = ["obs", "vars", "input"])]
    suite: Option<String>,
    #[arg(long, requires = "vars")]
    obs: Option<usize>,
    #[arg(long, requires = "obs")]
    vars: Option<usize>,
    /// Design matrix file (CSV, or binary when the extension is .bin/.bakm).
    #[arg(long, requires = "target", conflicts_with_all = ["obs", "vars"])]
    input: Option<PathBuf>,
    #[arg(long, requires = "input")]
    target: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Standard deviation of noise added to generated targets.
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    /// One or more of bak, bakp, qr (comma separated).
    #[arg(long, value_delimiter = ',', default_value = "bak")]
    solver: Vec<SolverArg>,
    #[arg(long, default_value_t = 50)]
    thr: usize,
    /// Worker threads for bakp; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    workers: usize,
    #[arg(long, default_value_t = SolveConfig::default().tol)]
    tol: f64,
    #[arg(long, default_value_t = SolveConfig::default().max_iter)]
    max_iter: usize,
    #[arg(long, value_enum, default_value_t = PrecisionArg::F32)]
    precision: PrecisionArg,
    #[arg(long, default_value_t = RunSpec::DEFAULT_REPETITIONS)]
    reps: usize,
    #[arg(long, value_enum, default_value_t = MapeBaseArg::Prediction)]
    mape_base: MapeBaseArg,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write the estimated coefficients as a binary vars x 1 matrix.
    #[arg(long, conflicts_with = "suite")]
    dump_coeffs: Option<PathBuf>,
}

#[derive(Args)]
struct SelectArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    target: PathBuf,
    #[arg(long, value_enum, default_value_t = MethodArg::Bakf)]
    method: MethodArg,
    #[arg(long)]
    max_feat: usize,
    /// How `bakf` refits the chosen columns after each step.
    #[arg(long, value_enum, default_value_t = RefitArg::Qr)]
    refit: RefitArg,
    #[arg(long, value_enum, default_value_t = PrecisionArg::F64)]
    precision: PrecisionArg,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SolverArg {
    Bak,
    Bakp,
    Qr,
}

#[derive(Clone, Copy, ValueEnum)]
enum PrecisionArg {
    F32,
    F64,
}

#[derive(Clone, Copy, ValueEnum)]
enum MapeBaseArg {
    Prediction,
    Coeffs,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Bakf,
    Stepwise,
}

#[derive(Clone, Copy, ValueEnum)]
enum RefitArg {
    Qr,
    Bak,
}

impl From<SolverArg> for SolverKind {
    fn from(s: SolverArg) -> Self {
        match s {
            SolverArg::Bak => SolverKind::Bak,
            SolverArg::Bakp => SolverKind::Bakp,
            SolverArg::Qr => SolverKind::Qr,
        }
    }
}

impl From<PrecisionArg> for Precision {
    fn from(p: PrecisionArg) -> Self {
        match p {
            PrecisionArg::F32 => Precision::Single,
            PrecisionArg::F64 => Precision::Double,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Bench(args) => bench(args),
        Command::Select(args) => select(args),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn bench_specs(args: &BenchArgs) -> Result<Vec<RunSpec>, BenchError> {
    if let Some(suite) = &args.suite {
        return load_suite(suite);
    }
    let system = match (&args.input, args.obs, args.vars) {
        (Some(input), _, _) => SystemSource::Files {
            input: input.clone(),
            target: args.target.clone().expect("clap enforces --target"),
        },
        (None, Some(obs), Some(vars)) => SystemSource::Generated(SystemSpec::new(obs, vars, args.seed).with_noise(args.noise)),
        _ => return Err(BenchError::Usage("give --suite, --obs/--vars, or --input/--target".into())),
    };
    let case_id = match &system {
        SystemSource::Generated(s) => format!("obs{}_vars{}_seed{}", s.obs, s.vars, s.seed),
        SystemSource::Files { input, .. } => input.display().to_string(),
    };
    Ok(args
        .solver
        .iter()
        .map(|&kind| RunSpec {
            case_id: case_id.clone(),
            system: system.clone(),
            solver: SolverSpec {
                kind: kind.into(),
                thr: args.thr,
                workers: args.workers,
                tol: args.tol,
                max_iter: args.max_iter,
            },
            precision: args.precision.into(),
            repetitions: args.reps,
            mape_base: match args.mape_base {
                MapeBaseArg::Prediction => MapeBase::Prediction,
                MapeBaseArg::Coeffs => MapeBase::Coefficients,
            },
        })
        .collect())
}

fn bench(args: BenchArgs) -> Result<ExitCode, BenchError> {
    let specs = bench_specs(&args)?;
    if args.dump_coeffs.is_some() && specs.len() != 1 {
        return Err(BenchError::Usage("--dump-coeffs needs exactly one solver".into()));
    }

    let records = if let Some(path) = &args.dump_coeffs {
        let outcome = run_case_detailed(&specs[0])?;
        if let Some(a) = &outcome.coefficients {
            a.write_binary(path)?;
        }
        vec![outcome.record]
    } else {
        run_specs(&specs, |r| {
            eprintln!("finished {} {} ({:.3} ms)", r.case_id, r.solver, r.wall_time_s * 1e3)
        })?
    };

    print!("{}", render_table(&records));
    for r in records.iter().filter(|r| r.failed()) {
        eprintln!("{} {}: {}", r.case_id, r.solver, r.failure.as_deref().unwrap_or_default());
    }
    if let Some(out) = &args.out {
        emit_report(&records, out)?;
    }
    Ok(if records.iter().any(|r| r.failed()) {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    })
}

fn select(args: SelectArgs) -> Result<ExitCode, BenchError> {
    match Precision::from(args.precision) {
        Precision::Single => select_typed::<f32>(&args),
        Precision::Double => select_typed::<f64>(&args),
    }
}

fn select_typed<T: Scalar>(args: &SelectArgs) -> Result<ExitCode, BenchError> {
    let x = load_matrix::<T>(&args.input, MatrixFormat::from_path(&args.input))?;
    let y = load_vector::<T>(&args.target, MatrixFormat::from_path(&args.target))?;
    let report = match args.method {
        MethodArg::Bakf => {
            let mut cfg = FeatureSelectConfig::new(args.max_feat);
            if let RefitArg::Bak = args.refit {
                cfg.refit = Refit::Bak(SolveConfig::default().with_tol(1e-10));
            }
            select_features(&x, &y, &cfg)?
        }
        MethodArg::Stepwise => stepwise_baseline(&x, &y, args.max_feat)?,
    };

    println!("step  column  residual_norm   coefficient");
    for (step, (col, norm)) in report.selected.iter().zip(&report.residual_norms).enumerate() {
        let (norm, coeff) = (norm.to_f64_lossy(), report.final_coeffs[step].to_f64_lossy());
        println!("{:>4}  {:>6}  {norm:>13.6e}  {coeff:>12.6e}", step + 1, col);
    }
    println!("wall time: {:.3} ms", report.wall_time.as_secs_f64() * 1e3);
    if let Some(out) = &args.out {
        write_selection(out, &report)?;
    }
    Ok(ExitCode::SUCCESS)
}

fn write_selection<T: Scalar>(path: &PathBuf, report: &FeatureSelectionReport<T>) -> Result<(), BenchError> {
    let io_err = |e: csv::Error| BenchError::Io {
        path: path.clone(),
        source: e.into(),
    };
    let mut w = csv::Writer::from_path(path).map_err(io_err)?;
    w.write_record(["step", "column", "residual_norm", "coefficient"]).map_err(io_err)?;
    for (step, (col, norm)) in report.selected.iter().zip(&report.residual_norms).enumerate() {
        w.write_record([
            (step + 1).to_string(),
            col.to_string(),
            norm.to_string(),
            report.final_coeffs[step].to_string(),
        ])
        .map_err(io_err)?;
    }
    w.flush().map_err(|e| BenchError::Io {
        path: path.clone(),
        source: e,
    })
}
