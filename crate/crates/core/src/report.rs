//! CSV, JSON and plain-text renderings of a study.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::eigensolver::SolverPath;
use crate::error::{Error, Result};
use crate::extrapolation::ConvergenceTable;

pub const CSV_FILE: &str = "convergence.csv";
pub const JSON_FILE: &str = "report.json";
pub const TIMINGS_FILE: &str = "timings.json";

pub const CSV_COLUMNS: [&str; 13] = [
    "eigen",
    "multiplicity",
    "level_n",
    "h",
    "lambda_h",
    "lambda_extrap",
    "err_raw",
    "err_extrap",
    "order_raw",
    "order_extrap",
    "superclose",
    "err_u",
    "err_sigma",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Ok,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelSummary {
    pub n: usize,
    pub h: f64,
    pub num_edges: usize,
    pub num_triangles: usize,
    pub eigenvalues: Vec<f64>,
    pub residuals: Vec<f64>,
    pub s_norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyReport {
    pub preset: String,
    pub levels: Vec<usize>,
    pub k: usize,
    pub order: f64,
    pub solver: SolverPath,
    pub seed: u64,
    pub status: Status,
    pub error: Option<String>,
    pub level_results: Vec<LevelSummary>,
    pub table: ConvergenceTable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelTiming {
    pub n: usize,
    pub assemble_and_solve_s: f64,
    pub postprocess_s: f64,
}

fn num(v: Option<f64>) -> String {
    match v {
        Some(x) => format!("{x:.11e}"),
        None => String::new(),
    }
}

fn eigen_label(members: &[usize]) -> String {
    members
        .iter()
        .map(|i| (i + 1).to_string())
        .collect::<Vec<_>>()
        .join("+")
}

/// One row per (eigenvalue or cluster, level); numbers carry 12 significant digits.
/// The `eigen` column lists 1-based eigenvalue indices joined by `+`.
pub fn to_csv(table: &ConvergenceTable) -> String {
    let mut out = CSV_COLUMNS.join(",");
    out.push('\n');
    for entry in &table.entries {
        for row in &entry.rows {
            let fields = [
                eigen_label(&entry.members),
                entry.members.len().to_string(),
                row.level_n.to_string(),
                num(Some(row.h)),
                num(Some(row.lambda_h)),
                num(row.lambda_extrap),
                num(row.err_raw),
                num(row.err_extrap),
                num(row.order_raw),
                num(row.order_extrap),
                num(row.superclose),
                num(row.err_u),
                num(row.err_sigma),
            ];
            out.push_str(&fields.join(","));
            out.push('\n');
        }
    }
    out
}

pub fn to_json(report: &StudyReport) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report serializes");
    s.push('\n');
    s
}

pub fn from_json(text: &str) -> Result<StudyReport> {
    serde_json::from_str(text).map_err(|e| Error::InvalidArgument(format!("malformed report: {e}")))
}

pub fn text_table(report: &StudyReport) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "preset {}  levels {:?}  k {}  p {}  status {:?}",
        report.preset, report.levels, report.k, report.order, report.status
    );
    let _ = writeln!(
        out,
        "{:>6} {:>5} {:>16} {:>16} {:>10} {:>10} {:>7} {:>7} {:>10} {:>10}",
        "eigen", "n", "lambda_h", "lambda_extrap", "err_raw", "err_extrap", "p_raw", "p_ext", "superclose", "err_u"
    );
    let f = |v: Option<f64>, w: usize, prec: usize, sci: bool| match v {
        Some(x) if sci => format!("{x:>w$.prec$e}"),
        Some(x) => format!("{x:>w$.prec$}"),
        None => format!("{:>w$}", "-"),
    };
    for entry in &report.table.entries {
        for row in &entry.rows {
            let _ = writeln!(
                out,
                "{:>6} {:>5} {} {} {} {} {} {} {} {}",
                eigen_label(&entry.members),
                row.level_n,
                f(Some(row.lambda_h), 16, 10, false),
                f(row.lambda_extrap, 16, 10, false),
                f(row.err_raw, 10, 3, true),
                f(row.err_extrap, 10, 3, true),
                f(row.order_raw, 7, 3, false),
                f(row.order_extrap, 7, 3, false),
                f(row.superclose, 10, 3, true),
                f(row.err_u, 10, 3, true),
            );
        }
    }
    if let Some(e) = &report.error {
        let _ = writeln!(out, "FAILED: {e}");
    }
    out
}

fn write(path: PathBuf, contents: &str) -> Result<()> {
    fs::write(&path, contents).map_err(|e| Error::io(&path, e))
}

/// Writes the CSV, the JSON report and the timing sidecar into `dir`.
///
/// Timings live in their own file so the report stays byte-identical across
/// repeated runs.
pub fn emit_reports(report: &StudyReport, timings: &[LevelTiming], dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write(dir.join(CSV_FILE), &to_csv(&report.table))?;
    write(dir.join(JSON_FILE), &to_json(report))?;
    let t = serde_json::to_string_pretty(timings).expect("timings serialize");
    write(dir.join(TIMINGS_FILE), &t)?;
    Ok(())
}
