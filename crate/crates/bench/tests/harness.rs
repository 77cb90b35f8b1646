use std::path::Path;
use std::process::Command;

use bak_bench::*;
use bak_core::{generate_system, matvec, DenseMatrix, Precision, SystemSpec};

fn bak_solve() -> Command {
    Command::new(env!("CARGO_BIN_EXE_bak-solve"))
}

fn read_report(path: &Path) -> Vec<Vec<String>> {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), REPORT_HEADER.join(","));
    lines.map(|l| l.split(',').map(str::to_string).collect()).collect()
}

#[test]
fn dumped_coefficients_reproduce_recorded_residual() {
    let dir = tempfile::tempdir().unwrap();
    for precision in ["f32", "f64"] {
        for solver in ["bak", "bakp", "qr"] {
            let out = dir.path().join("r.csv");
            let coeffs = dir.path().join("a.bin");
            let status = bak_solve()
                .args(["bench", "--obs", "400", "--vars", "60", "--seed", "5", "--noise", "0.1"])
                .args(["--solver", solver, "--thr", "16", "--reps", "1", "--precision", precision])
                .arg("--out")
                .arg(&out)
                .arg("--dump-coeffs")
                .arg(&coeffs)
                .output()
                .unwrap();
            assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
            let rows = read_report(&out);
            let recorded: f64 = rows[0][8].parse().unwrap();

            let spec = SystemSpec::new(400, 60, 5).with_noise(0.1);
            let recomputed = if precision == "f32" {
                let s = generate_system::<f32>(&spec).unwrap();
                let a = load_vector::<f32>(&coeffs, MatrixFormat::Binary).unwrap();
                relative_residual(&s.x, &s.y, &a).unwrap()
            } else {
                let s = generate_system::<f64>(&spec).unwrap();
                let a = load_vector::<f64>(&coeffs, MatrixFormat::Binary).unwrap();
                relative_residual(&s.x, &s.y, &a).unwrap()
            };
            assert!((recorded - recomputed).abs() <= 1e-6, "{solver} {precision}: {recorded} vs {recomputed}");
        }
    }
}

const MIXED_SUITE: &str = r#"
[defaults]
reps = 1
tol = 1e-7

[[case]]
id = "a"
obs = 300
vars = 30
seed = 1
solver = ["qr", "bak", "bakp"]
thr = 8

[[case]]
id = "b"
obs = 40
vars = 90
seed = 2
solver = ["bak", "bakp"]
thr = 30

[[case]]
id = "c"
obs = 500
vars = 20
seed = 3
noise = 0.5
precision = "f64"
solver = ["bak", "qr"]
"#;

fn fingerprint(records: &[BenchmarkRecord]) -> Vec<(String, String, u64, u64)> {
    let mut v: Vec<_> = records
        .iter()
        .map(|r| (r.case_id.clone(), r.solver.to_string(), r.mape.to_bits(), r.rel_residual.to_bits()))
        .collect();
    v.sort();
    v
}

#[test]
fn suite_results_do_not_depend_on_case_order() {
    let specs = parse_suite(MIXED_SUITE, Path::new(".")).unwrap();
    assert_eq!(specs.len(), 7);
    let forward = run_specs(&specs, |_| {}).unwrap();
    let mut shuffled = specs.clone();
    shuffled.reverse();
    shuffled.rotate_left(3);
    let backward = run_specs(&shuffled, |_| {}).unwrap();
    assert_eq!(fingerprint(&forward), fingerprint(&backward));
}

#[test]
fn identical_specs_give_identical_accuracy() {
    let spec = RunSpec::generated("d", SystemSpec::new(1000, 100, 42), SolverSpec::new(SolverKind::Bak)).with_repetitions(3);
    let a = run_case(&spec).unwrap();
    let b = run_case(&spec).unwrap();
    assert_eq!(a.mape.to_bits(), b.mape.to_bits());
    assert_eq!(a.rel_residual.to_bits(), b.rel_residual.to_bits());
    assert_eq!(a.sweeps, b.sweeps);
    assert!(a.mape <= 1e-5);
}

#[test]
fn suite_runs_stream_records_and_write_reports() {
    let dir = tempfile::tempdir().unwrap();
    let suite = dir.path().join("s.toml");
    std::fs::write(&suite, MIXED_SUITE).unwrap();
    let mut streamed = Vec::new();
    let records = run_specs(&load_suite(suite.to_str().unwrap()).unwrap(), |r| streamed.push(r.case_id.clone())).unwrap();
    assert_eq!(streamed, ["a", "a", "a", "b", "b", "c", "c"]);
    assert!(records.iter().all(|r| !r.failed() && r.mape >= 0.0 && r.rel_residual >= 0.0 && r.wall_time_s > 0.0));

    let out = dir.path().join("report.csv");
    emit_report(&records, &out).unwrap();
    let rows = read_report(&out);
    assert_eq!(rows.len(), 7);
    for row in &rows {
        let has_qr = row[0] != "b";
        assert_eq!(!row[9].is_empty(), has_qr, "{row:?}");
    }
    assert_eq!(rows[2][4], "8");
    assert_eq!(rows[0][4], "0");

    let empty = dir.path().join("empty.toml");
    std::fs::write(&empty, "# no cases\n").unwrap();
    assert!(run_suite(empty.to_str().unwrap()).unwrap().is_empty());
    emit_report(&[], &out).unwrap();
    assert!(read_report(&out).is_empty());
}

#[test]
fn unwritable_report_path_is_an_io_error() {
    assert!(matches!(
        emit_report(&[], Path::new("/nonexistent/dir/r.csv")),
        Err(BenchError::Io { .. })
    ));
}

fn write_duplicate_system(dir: &Path) -> (std::path::PathBuf, std::path::PathBuf) {
    let base = generate_system::<f64>(&SystemSpec::new(50, 1, 8)).unwrap().x.into_data();
    let x = DenseMatrix::from_col_major(50, 6, base.repeat(6)).unwrap();
    let y = matvec(&x, &[1.0; 6]).unwrap();
    let (xp, yp) = (dir.join("x.csv"), dir.join("y.bin"));
    write_matrix_csv(&xp, &x).unwrap();
    write_matrix_binary(&yp, &DenseMatrix::from_col_major(50, 1, y.into_vec()).unwrap()).unwrap();
    (xp, yp)
}

#[test]
fn divergence_marks_the_record_failed() {
    let dir = tempfile::tempdir().unwrap();
    let (x, y) = write_duplicate_system(dir.path());
    let mut solver = SolverSpec::new(SolverKind::Bakp);
    solver.thr = 6;
    let spec = RunSpec {
        case_id: "dup".into(),
        system: SystemSource::Files { input: x.clone(), target: y.clone() },
        solver,
        precision: Precision::Double,
        repetitions: 2,
        mape_base: MapeBase::Prediction,
    };
    let record = run_case(&spec).unwrap();
    assert!(record.failed());
    assert!(record.failure.as_deref().unwrap().contains("diverg"), "{:?}", record.failure);

    // The sequential solver handles the same system.
    let ok = run_case(&RunSpec { solver: SolverSpec::new(SolverKind::Bak), ..spec }).unwrap();
    assert!(!ok.failed() && ok.rel_residual < 1e-6);

    let out = dir.path().join("r.csv");
    let run = bak_solve()
        .args(["bench", "--solver", "bakp", "--thr", "6", "--reps", "1", "--precision", "f64"])
        .arg("--input")
        .arg(&x)
        .arg("--target")
        .arg(&y)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(run.status.code(), Some(1));
    let rows = read_report(&out);
    assert_eq!(rows[0][7], "");
}

#[test]
fn cli_rejects_bad_suites_and_block_widths() {
    let dir = tempfile::tempdir().unwrap();
    let suite = dir.path().join("bad.toml");
    std::fs::write(&suite, "[[case]]\nobs = 10\nvars = 2\nsolver = \"gauss\"\n").unwrap();
    let run = bak_solve().args(["bench", "--suite"]).arg(&suite).output().unwrap();
    assert_eq!(run.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&run.stderr);
    assert!(stderr.contains("line 4") && stderr.contains("solver"), "{stderr}");

    let run = bak_solve()
        .args(["bench", "--obs", "20", "--vars", "5", "--solver", "bakp", "--thr", "6", "--reps", "1"])
        .output()
        .unwrap();
    assert_eq!(run.status.code(), Some(2));

    let run = bak_solve().args(["bench", "--obs", "20"]).output().unwrap();
    assert!(!run.status.success());
}

#[test]
fn select_command_recovers_support() {
    let dir = tempfile::tempdir().unwrap();
    let g = generate_system::<f64>(&SystemSpec::new(200, 15, 4)).unwrap();
    let mut a = vec![0.0; 15];
    a[2] = 3.0;
    a[11] = -2.0;
    a[7] = 1.0;
    let y = matvec(&g.x, &a).unwrap();
    let (xp, yp) = (dir.path().join("x.csv"), dir.path().join("y.csv"));
    write_matrix_csv(&xp, &g.x).unwrap();
    write_matrix_csv(&yp, &DenseMatrix::from_col_major(200, 1, y.into_vec()).unwrap()).unwrap();

    for method in ["bakf", "stepwise"] {
        let out = dir.path().join(format!("{method}.csv"));
        let run = bak_solve()
            .args(["select", "--method", method, "--max-feat", "3"])
            .arg("--input")
            .arg(&xp)
            .arg("--target")
            .arg(&yp)
            .arg("--out")
            .arg(&out)
            .output()
            .unwrap();
        assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
        let text = std::fs::read_to_string(&out).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "step,column,residual_norm,coefficient");
        let mut cols: Vec<usize> = lines.map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
        cols.sort_unstable();
        assert_eq!(cols, [2, 7, 11], "{method}");
    }
}
