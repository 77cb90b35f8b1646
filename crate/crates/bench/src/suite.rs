//! Suite files: TOML with an optional `[defaults]` table and any number of
//! `[[case]]` tables.
//!
//! ```toml
//! [defaults]
//! precision = "f32"
//! reps = 3
//!
//! [[case]]
//! id = "small"
//! obs = 1000
//! vars = 100
//! seed = 1
//! solver = ["qr", "bak", "bakp"]
//! thr = 50
//! ```
//!
//! Each case expands to one run per listed solver; records sharing an `id`
//! are paired for the speedup column. Instead of `obs`/`vars`, a case may name
//! `input` and `target` matrix files (relative to the suite file).

use std::path::{Path, PathBuf};

use bak_core::{Distribution, Precision, SystemSpec};
use serde::Deserialize;
use toml::Spanned;

use crate::error::{BenchError, Result};
use crate::runner::{run_case, BenchmarkRecord, MapeBase, RunSpec, SolverKind, SolverSpec, SystemSource};

pub const TABLE1_DESK_NAME: &str = "table1_desk";
pub const TABLE1_DESK: &str = include_str!("../suites/table1_desk.toml");

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SuiteFile {
    #[serde(default)]
    defaults: Option<Spanned<CaseFields>>,
    #[serde(default)]
    case: Vec<Spanned<CaseFields>>,
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct CaseFields {
    id: Option<String>,
    obs: Option<usize>,
    vars: Option<usize>,
    seed: Option<u64>,
    noise: Option<f64>,
    distribution: Option<Spanned<String>>,
    input: Option<PathBuf>,
    target: Option<PathBuf>,
    solver: Option<Spanned<toml::Value>>,
    thr: Option<usize>,
    workers: Option<usize>,
    tol: Option<f64>,
    max_iter: Option<usize>,
    precision: Option<Spanned<String>>,
    reps: Option<usize>,
    mape_base: Option<Spanned<String>>,
}

impl CaseFields {
    fn or(self, d: &CaseFields) -> CaseFields {
        CaseFields {
            id: self.id,
            obs: self.obs.or(d.obs),
            vars: self.vars.or(d.vars),
            seed: self.seed.or(d.seed),
            noise: self.noise.or(d.noise),
            distribution: self.distribution.or_else(|| d.distribution.clone()),
            input: self.input.or_else(|| d.input.clone()),
            target: self.target.or_else(|| d.target.clone()),
            solver: self.solver.or_else(|| d.solver.clone()),
            thr: self.thr.or(d.thr),
            workers: self.workers.or(d.workers),
            tol: self.tol.or(d.tol),
            max_iter: self.max_iter.or(d.max_iter),
            precision: self.precision.or_else(|| d.precision.clone()),
            reps: self.reps.or(d.reps),
            mape_base: self.mape_base.or_else(|| d.mape_base.clone()),
        }
    }
}

struct Lines<'a>(&'a str);

impl Lines<'_> {
    fn at(&self, offset: usize) -> usize {
        self.0[..offset.min(self.0.len())].matches('\n').count() + 1
    }

    fn error<T>(&self, offset: usize, message: impl Into<String>) -> Result<T> {
        Err(BenchError::Parse {
            line: self.at(offset),
            message: message.into(),
        })
    }

    fn parse_field<T: std::str::FromStr<Err = String>>(&self, field: &str, value: &Spanned<String>) -> Result<T> {
        value
            .get_ref()
            .parse()
            .or_else(|e| self.error(value.span().start, format!("field `{field}`: {e}")))
    }
}

/// Parses suite text. Relative file paths are resolved against `base_dir`.
pub fn parse_suite(text: &str, base_dir: &Path) -> Result<Vec<RunSpec>> {
    let lines = Lines(text);
    let file: SuiteFile = toml::from_str(text).map_err(|e| BenchError::Parse {
        line: e.span().map_or(1, |s| lines.at(s.start)),
        message: e.message().to_string(),
    })?;
    let defaults = file.defaults.map(Spanned::into_inner).unwrap_or_default();

    let mut specs = Vec::new();
    for (index, case) in file.case.into_iter().enumerate() {
        let case_at = case.span().start;
        let fields = case.into_inner().or(&defaults);
        let case_id = fields.id.clone().unwrap_or_else(|| format!("case{}", index + 1));

        let precision = match &fields.precision {
            Some(p) => lines.parse_field::<Precision>("precision", p)?,
            None => Precision::Single,
        };
        let mape_base = match &fields.mape_base {
            Some(m) => lines.parse_field::<MapeBase>("mape_base", m)?,
            None => MapeBase::Prediction,
        };
        let system = system_source(&lines, &fields, case_at, base_dir)?;

        let Some(solver) = &fields.solver else {
            return lines.error(case_at, format!("case `{case_id}`: missing field `solver`"));
        };
        let names: Vec<&str> = match solver.get_ref() {
            toml::Value::String(s) => vec![s.as_str()],
            toml::Value::Array(items) => items.iter().map(|v| v.as_str().unwrap_or("")).collect(),
            _ => return lines.error(solver.span().start, "field `solver`: expected a string or a list of strings"),
        };
        if names.is_empty() {
            return lines.error(solver.span().start, "field `solver`: empty list");
        }
        for name in names {
            let kind = name
                .parse::<SolverKind>()
                .or_else(|e| lines.error(solver.span().start, format!("field `solver`: {e}")))?;
            let mut s = SolverSpec::new(kind);
            s.thr = fields.thr.unwrap_or(s.thr);
            s.workers = fields.workers.unwrap_or(s.workers);
            s.tol = fields.tol.unwrap_or(s.tol);
            s.max_iter = fields.max_iter.unwrap_or(s.max_iter);
            let spec = RunSpec {
                case_id: case_id.clone(),
                system: system.clone(),
                solver: s,
                precision,
                repetitions: fields.reps.unwrap_or(RunSpec::DEFAULT_REPETITIONS),
                mape_base,
            };
            if let Err(e) = spec.validate() {
                return lines.error(case_at, format!("case `{case_id}`: {e}"));
            }
            specs.push(spec);
        }
    }
    Ok(specs)
}

fn system_source(lines: &Lines<'_>, f: &CaseFields, case_at: usize, base_dir: &Path) -> Result<SystemSource> {
    match (&f.input, &f.target) {
        (Some(input), Some(target)) => {
            return Ok(SystemSource::Files {
                input: base_dir.join(input),
                target: base_dir.join(target),
            })
        }
        (None, None) => {}
        _ => return lines.error(case_at, "`input` and `target` must be given together"),
    }
    let (Some(obs), Some(vars)) = (f.obs, f.vars) else {
        return lines.error(case_at, "missing field `obs` or `vars`");
    };
    let distribution = match &f.distribution {
        Some(d) => match d.get_ref().as_str() {
            "normal" => Distribution::StandardNormal,
            "uniform" => Distribution::Uniform,
            other => {
                return lines.error(
                    d.span().start,
                    format!("field `distribution`: unknown distribution `{other}` (expected normal or uniform)"),
                )
            }
        },
        None => Distribution::StandardNormal,
    };
    let spec = SystemSpec::new(obs, vars, f.seed.unwrap_or(0))
        .with_noise(f.noise.unwrap_or(0.0))
        .with_distributions(distribution, distribution);
    if let Err(e) = spec.validate() {
        return lines.error(case_at, e.to_string());
    }
    Ok(SystemSource::Generated(spec))
}

/// Reads a suite from disk, or returns the bundled suite when `name` is its name.
pub fn load_suite(name_or_path: &str) -> Result<Vec<RunSpec>> {
    let path = Path::new(name_or_path);
    if !path.exists() && name_or_path == TABLE1_DESK_NAME {
        return parse_suite(TABLE1_DESK, Path::new("."));
    }
    let text = std::fs::read_to_string(path).map_err(|e| BenchError::io(path, e))?;
    parse_suite(&text, path.parent().unwrap_or(Path::new(".")))
}

/// Runs specs in order, handing each record to `on_record` as soon as it exists.
pub fn run_specs<F>(specs: &[RunSpec], mut on_record: F) -> Result<Vec<BenchmarkRecord>>
where
    F: FnMut(&BenchmarkRecord),
{
    let mut records = Vec::with_capacity(specs.len());
    for spec in specs {
        let record = run_case(spec)?;
        on_record(&record);
        records.push(record);
    }
    Ok(records)
}

pub fn run_suite(name_or_path: &str) -> Result<Vec<BenchmarkRecord>> {
    run_specs(&load_suite(name_or_path)?, |_| {})
}
