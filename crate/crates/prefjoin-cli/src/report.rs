//! Machine-readable run reports, one JSON object per line.

use std::fs::OpenOptions;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::error::CliError;

#[derive(Debug, Serialize)]
pub struct JoinReport {
    pub command: &'static str,
    pub measure: String,
    pub preference: String,
    pub theta_star: Option<String>,
    pub theta_star_decimal: Option<f64>,
    pub best_score: Option<i64>,
    pub pairs: usize,
    pub outer_rows: Option<usize>,
    pub pivotal_count: usize,
    pub thresholds_evaluated: usize,
    pub terminated_early: bool,
    pub peak_candidates: usize,
    pub skipped_records: usize,
    pub wall_time_ms: u128,
}

#[derive(Debug, Serialize)]
pub struct EvalReport {
    pub command: &'static str,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
    pub dropped_truth_pairs: usize,
    pub wall_time_ms: u128,
}

/// Append one JSON line to `path`, creating the file if needed.
pub fn append_line<T: Serialize>(path: &Path, report: &T) -> Result<(), CliError> {
    let mut file = OpenOptions::new().create(true).append(true).open(path)?;
    let line = serde_json::to_string(report)
        .map_err(|e| CliError::Input(format!("report serialization: {e}")))?;
    writeln!(file, "{line}")?;
    Ok(())
}
