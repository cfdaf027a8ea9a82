pub mod inclusion;
pub mod inpaint;
pub mod minimax;
pub mod schedule;
pub mod selftest;

use fbfep_core::splitting::{Algorithm, RunError, RunRecord};
use fbfep_core::{validate_schedule, PolySchedule, ScheduleReport};
use serde::Serialize;

use crate::error::{invalid, CliError, CliResult};
use crate::output::{write_history, write_json, write_metrics, OutDir};

/// Horizon for the sampled limsup when `e != a`.
pub const REPORT_HORIZON: usize = 1000;
/// Exponent of the default schedule for the generic commands.
pub const DEFAULT_EXPONENT: f64 = 0.51;
/// Target value of `limsup (lambda beta / mu + lambda / eta)` for the default schedule.
pub const DEFAULT_MARGIN: f64 = 0.4;

fn inverse(v: f64) -> f64 {
    if v.is_infinite() {
        0.0
    } else {
        1.0 / v
    }
}

/// `lambda_n beta_n` held at `DEFAULT_MARGIN / (1/mu + 1/eta)`, so the step
/// condition holds with margin for every `n`.
pub fn default_schedule(mu: f64, eta: f64) -> CliResult<PolySchedule> {
    let denom = inverse(mu) + inverse(eta);
    let c = if denom > 0.0 { DEFAULT_MARGIN / denom } else { 1.0 };
    PolySchedule::new(c, DEFAULT_EXPONENT, 1.0, DEFAULT_EXPONENT).map_err(invalid)
}

#[derive(Debug, Serialize)]
pub struct ScheduleFile {
    pub schedule: PolySchedule,
    /// `null` when infinite.
    pub mu: f64,
    pub eta: f64,
    #[serde(flatten)]
    pub report: ScheduleReport,
    pub warnings: Vec<String>,
}

/// Validates `s`, writes `schedule_report.json` and echoes the warnings
/// that concern `algorithm` (all of them when `None`). A failed condition
/// is reported but does not stop the run.
pub fn report_schedule(
    out: &OutDir,
    s: &PolySchedule,
    mu: f64,
    eta: f64,
    horizon: usize,
    algorithm: Option<Algorithm>,
) -> CliResult<ScheduleFile> {
    let report = validate_schedule(s, mu, eta, horizon).map_err(invalid)?;
    let warnings = report.warnings();
    let mut echoed = report;
    match algorithm {
        Some(Algorithm::Fbf) => echoed.condition_fbf_ep = true,
        Some(Algorithm::FbfEp) => echoed.condition_fbf = true,
        None => {}
    }
    for w in echoed.warnings() {
        eprintln!("warning: {w}");
    }
    let file = ScheduleFile { schedule: *s, mu, eta, report, warnings };
    write_json(&out.file("schedule_report.json"), &file)?;
    Ok(file)
}

/// Writes `metrics.csv` (and `history.csv` when recorded) for finished and
/// failed runs alike; failures come back as [`CliError::Diverged`] after
/// the partial metrics are on disk.
pub fn flush_run(out: &OutDir, result: Result<RunRecord<f64>, RunError<f64>>) -> CliResult<RunRecord<f64>> {
    match result {
        Ok(rec) => {
            write_metrics(&out.file("metrics.csv"), &rec.rows)?;
            if let Some(h) = &rec.history {
                write_history(&out.file("history.csv"), h)?;
            }
            Ok(rec)
        }
        Err(RunError { error, partial }) => {
            write_metrics(&out.file("metrics.csv"), &partial.rows)?;
            match error {
                fbfep_core::Error::Divergence { .. } => {
                    Err(CliError::Diverged(format!("{error}; {} rows written", partial.rows.len())))
                }
                other => Err(invalid(other)),
            }
        }
    }
}

pub fn dense(rows: &[Vec<f64>], what: &str) -> CliResult<fbfep_core::ops::DenseMatrix<f64>> {
    if rows.is_empty() || rows[0].is_empty() {
        return Err(CliError::Config(format!("`{what}` must be a non-empty matrix")));
    }
    fbfep_core::ops::DenseMatrix::from_rows(rows).map_err(|e| CliError::Config(format!("`{what}`: {e}")))
}
