//! Batch experiment runner: reads JSON experiment configurations, runs the
//! requested computation and writes CSV reports.

pub mod commands;
pub mod config;

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use circle_thermo::report::Table;
use rayon::prelude::*;
use serde::Deserialize;

pub use config::{Bound, ConfigError, ExperimentConfig};

/// Experiment kinds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Pressure,
    Response,
    Variance,
    Ldp,
    Multifractal,
    ConeCheck,
    Clt,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Pressure => "pressure",
            Command::Response => "response",
            Command::Variance => "variance",
            Command::Ldp => "ldp",
            Command::Multifractal => "multifractal",
            Command::ConeCheck => "cone-check",
            Command::Clt => "clt",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Result of one experiment: the main table, optional named side tables,
/// scalar metrics and free-form notes.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Outcome {
    pub table: Table,
    pub extra_tables: Vec<(String, Table)>,
    pub metrics: Vec<(String, f64)>,
    pub notes: Vec<String>,
}

impl Outcome {
    pub fn metric(&self, name: &str) -> Option<f64> {
        self.metrics.iter().find(|(k, _)| k == name).map(|&(_, v)| v)
    }

    pub(crate) fn push(&mut self, name: &str, value: f64) {
        self.metrics.push((name.to_string(), value));
    }

    /// One line of `key=value` pairs followed by notes.
    pub fn summary(&self, case_id: &str, command: Command) -> String {
        let mut parts = vec![format!("case={case_id}"), format!("command={command}")];
        parts.extend(self.metrics.iter().map(|(k, v)| format!("{k}={}", fmt_summary(*v))));
        parts.extend(self.notes.iter().cloned());
        parts.join(" ")
    }

    /// Writes the main table to `path` and each side table next to it as
    /// `<stem>_<name>.csv`.
    pub fn write(&self, path: &Path, timestamp: bool) -> std::io::Result<Vec<PathBuf>> {
        self.table.write(path, timestamp)?;
        let mut written = vec![path.to_path_buf()];
        let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        for (name, table) in &self.extra_tables {
            let side = path.with_file_name(format!("{stem}_{name}.csv"));
            table.write(&side, timestamp)?;
            written.push(side);
        }
        Ok(written)
    }
}

fn fmt_summary(v: f64) -> String {
    if v == 0.0 || (1e-3..1e6).contains(&v.abs()) {
        format!("{v:.6}")
    } else {
        format!("{v:.6e}")
    }
}

/// Failure of a single run, mapped to the process exit code.
#[derive(Debug)]
pub enum RunError {
    Config(String),
    Compute { case_id: String, error: circle_thermo::Error },
    Io(String),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Compute { .. } | RunError::Io(_) => 1,
        }
    }
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Config(m) => write!(f, "configuration error: {m}"),
            RunError::Compute { case_id, error } => write!(f, "case {case_id}: {error}"),
            RunError::Io(m) => write!(f, "output error: {m}"),
        }
    }
}

impl From<ConfigError> for RunError {
    fn from(e: ConfigError) -> Self {
        RunError::Config(e.to_string())
    }
}

/// Identifier of a configuration: its `case_id`, else the file stem.
pub fn case_id(cfg: &ExperimentConfig, path: &Path) -> String {
    cfg.case_id
        .clone()
        .unwrap_or_else(|| path.file_stem().map_or_else(|| "case".to_string(), |s| s.to_string_lossy().into_owned()))
}

/// Runs `command` on a parsed configuration.
pub fn execute(command: Command, cfg: &ExperimentConfig, case_id: &str) -> Result<Outcome, RunError> {
    commands::dispatch(command, cfg, case_id)
}

/// Options of a single run from the command line.
#[derive(Debug, Clone)]
pub struct RunOptions {
    pub config: PathBuf,
    pub out: Option<PathBuf>,
    pub timestamp: bool,
}

/// Loads, runs and writes one experiment; returns the summary line.
pub fn run(command: Command, opts: &RunOptions) -> Result<String, RunError> {
    let cfg = ExperimentConfig::load(&opts.config)?;
    let id = case_id(&cfg, &opts.config);
    let outcome = execute(command, &cfg, &id)?;
    let out =
        opts.out.clone().or_else(|| cfg.output.clone()).unwrap_or_else(|| PathBuf::from(format!("{id}_{command}.csv")));
    outcome.write(&out, opts.timestamp).map_err(|e| RunError::Io(format!("{}: {e}", out.display())))?;
    Ok(outcome.summary(&id, command))
}

/// Verdict on one metric threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub case_id: String,
    pub metric: String,
    pub value: Option<f64>,
    pub bound: Bound,
    pub pass: bool,
}

/// Outcome of one corpus entry.
#[derive(Debug)]
pub struct CaseResult {
    pub path: PathBuf,
    pub case_id: String,
    pub result: Result<Vec<Check>, RunError>,
}

impl CaseResult {
    pub fn passed(&self) -> bool {
        self.result.as_ref().is_ok_and(|checks| checks.iter().all(|c| c.pass))
    }
}

/// Aggregate of a corpus run.
#[derive(Debug)]
pub struct CorpusReport {
    pub cases: Vec<CaseResult>,
}

impl CorpusReport {
    /// 0 if every case passes, 2 if any configuration is invalid, else 1.
    pub fn exit_code(&self) -> i32 {
        if self.cases.iter().any(|c| matches!(c.result, Err(RunError::Config(_)))) {
            2
        } else if self.cases.iter().all(CaseResult::passed) {
            0
        } else {
            1
        }
    }

    pub fn failures(&self) -> Vec<&CaseResult> {
        self.cases.iter().filter(|c| !c.passed()).collect()
    }

    /// One line per threshold check or failed case.
    pub fn lines(&self) -> Vec<String> {
        let mut lines = Vec::new();
        for case in &self.cases {
            match &case.result {
                Ok(checks) => lines.extend(checks.iter().map(|c| {
                    let value = c.value.map_or_else(|| "missing".to_string(), fmt_summary);
                    let verdict = if c.pass { "PASS" } else { "FAIL" };
                    format!("{verdict} {} {}={value} bound={}", c.case_id, c.metric, fmt_bound(&c.bound))
                })),
                Err(e) => lines.push(format!("FAIL {} {e}", case.case_id)),
            }
        }
        lines
    }
}

fn fmt_bound(b: &Bound) -> String {
    let mut parts = Vec::new();
    if let Some(v) = b.min {
        parts.push(format!("min:{v:e}"));
    }
    if let Some(v) = b.max {
        parts.push(format!("max:{v:e}"));
    }
    if let (Some(t), Some(tol)) = (b.target, b.tol) {
        parts.push(format!("target:{t}±{tol:e}"));
    }
    parts.join(",")
}

/// `*.json` files of `dir`, sorted.
pub fn corpus_files(dir: &Path) -> std::io::Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|e| e == "json"))
        .collect();
    files.sort();
    Ok(files)
}

fn run_case(path: &Path, out_dir: &Path, timestamp: bool) -> CaseResult {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let cfg = match ExperimentConfig::load(path) {
        Ok(cfg) => cfg,
        Err(e) => return CaseResult { path: path.to_path_buf(), case_id: stem, result: Err(e.into()) },
    };
    let id = case_id(&cfg, path);
    let result = (|| {
        let command =
            cfg.command.ok_or_else(|| RunError::Config(format!("{}: missing \"command\"", path.display())))?;
        let outcome = execute(command, &cfg, &id)?;
        let out = out_dir.join(format!("{stem}.csv"));
        outcome.write(&out, timestamp).map_err(|e| RunError::Io(format!("{}: {e}", out.display())))?;
        Ok(cfg
            .thresholds
            .iter()
            .map(|(metric, bound)| {
                let value = outcome.metric(metric);
                Check {
                    case_id: id.clone(),
                    metric: metric.clone(),
                    value,
                    bound: *bound,
                    pass: value.is_some_and(|v| bound.accepts(v)),
                }
            })
            .collect())
    })();
    CaseResult { path: path.to_path_buf(), case_id: id, result }
}

/// Runs every configuration of `dir` in parallel and checks the embedded
/// thresholds. `None` when the directory holds no configurations.
pub fn corpus(dir: &Path, out_dir: &Path, timestamp: bool) -> std::io::Result<Option<CorpusReport>> {
    let files = corpus_files(dir)?;
    if files.is_empty() {
        return Ok(None);
    }
    let cases = files.par_iter().map(|p| run_case(p, out_dir, timestamp)).collect();
    Ok(Some(CorpusReport { cases }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn summary_formatting() {
        assert_eq!(fmt_summary(std::f64::consts::LN_2), "0.693147");
        assert_eq!(fmt_summary(0.0), "0.000000");
        assert_eq!(fmt_summary(1.5e-12), "1.500000e-12");
    }

    #[test]
    fn command_names_round_trip() {
        for c in [
            Command::Pressure,
            Command::Response,
            Command::Variance,
            Command::Ldp,
            Command::Multifractal,
            Command::ConeCheck,
            Command::Clt,
        ] {
            let parsed: Command = serde_json::from_str(&format!("\"{c}\"")).unwrap();
            assert_eq!(parsed, c);
        }
    }
}
