use std::collections::HashMap;
use std::io::Write;
use std::path::Path;

use crate::error::{BenchError, Result};
use crate::runner::{BenchmarkRecord, SolverKind};

pub const REPORT_HEADER: [&str; 10] = [
    "case_id",
    "obs",
    "vars",
    "solver",
    "thr",
    "wall_time_s",
    "sweeps",
    "mape",
    "rel_residual",
    "speedup_vs_qr",
];

/// `qr wall time / record wall time` when a successful qr record shares the case id.
pub fn speedups(records: &[BenchmarkRecord]) -> Vec<Option<f64>> {
    let mut qr_time: HashMap<&str, f64> = HashMap::new();
    for r in records.iter().filter(|r| r.solver == SolverKind::Qr && !r.failed()) {
        qr_time.entry(r.case_id.as_str()).or_insert(r.wall_time_s);
    }
    records
        .iter()
        .map(|r| {
            if r.failed() {
                return None;
            }
            qr_time.get(r.case_id.as_str()).map(|&t| t / r.wall_time_s)
        })
        .collect()
}

/// Writes the report to any sink. Failed rows leave the accuracy columns empty.
pub fn write_report<W: Write>(sink: W, records: &[BenchmarkRecord]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(REPORT_HEADER)?;
    for (r, speedup) in records.iter().zip(speedups(records)) {
        let accuracy = |v: f64| if r.failed() { String::new() } else { v.to_string() };
        w.write_record([
            r.case_id.clone(),
            r.obs.to_string(),
            r.vars.to_string(),
            r.solver.to_string(),
            r.thr.to_string(),
            r.wall_time_s.to_string(),
            r.sweeps.to_string(),
            accuracy(r.mape),
            accuracy(r.rel_residual),
            speedup.map(|s| s.to_string()).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn emit_report(records: &[BenchmarkRecord], path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| BenchError::io(path, e))?;
    write_report(file, records).map_err(|e| BenchError::io(path, e.into()))
}

/// Human-readable table for the terminal.
pub fn render_table(records: &[BenchmarkRecord]) -> String {
    let w = records.iter().map(|r| r.case_id.len()).max().unwrap_or(0).max(4);
    let mut out = format!(
        "{:<w$} {:>9} {:>6} {:<5} {:>5} {:>4} {:>12} {:>6} {:>10} {:>12} {:>9}\n",
        "case", "obs", "vars", "solv", "thr", "prec", "time_ms", "sweeps", "mape", "rel_resid", "speedup"
    );
    for (r, speedup) in records.iter().zip(speedups(records)) {
        let (m, rr) = if r.failed() {
            ("failed".to_string(), "-".to_string())
        } else {
            (format!("{:.3e}", r.mape), format!("{:.3e}", r.rel_residual))
        };
        out.push_str(&format!(
            "{:<w$} {:>9} {:>6} {:<5} {:>5} {:>4} {:>12.3} {:>6} {:>10} {:>12} {:>9}\n",
            r.case_id,
            r.obs,
            r.vars,
            r.solver,
            r.thr,
            r.precision,
            r.wall_time_s * 1e3,
            r.sweeps,
            m,
            rr,
            speedup.map(|s| format!("{s:.2}")).unwrap_or_else(|| "-".into()),
        ));
    }
    out
}
