use std::io::Write;

use super::TrialRecord;
use crate::error::{Error, Result};

/// Column order of the CSV report.
pub const CSV_HEADER: [&str; 10] = [
    "master_seed",
    "suite",
    "cell",
    "trial",
    "dim",
    "constraint_value",
    "constraint_value_2",
    "observed",
    "bound",
    "margin",
];

/// A trial that could not be set up (e.g. calibration failed).
#[derive(Debug, Clone, PartialEq)]
pub struct SkippedTrial {
    pub cell: String,
    pub trial: usize,
    pub dim: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellSummary {
    pub cell: String,
    pub dim: usize,
    pub trials: usize,
    pub violations: usize,
    pub min_margin: f64,
    /// Largest `observed / bound` over trials with a positive bound.
    pub best_ratio: f64,
    /// Every check in the cell compares zero against zero.
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport {
    pub suite: String,
    pub master_seed: u64,
    pub tolerance: f64,
    pub trials: Vec<TrialRecord>,
    pub min_margin: f64,
    pub violations: usize,
    /// Tightness witnesses whose `|margin|` exceeded `witness_tolerance`.
    pub witness_failures: usize,
    pub witness_tolerance: f64,
    pub skipped: Vec<SkippedTrial>,
    pub cells: Vec<CellSummary>,
}

impl VerificationReport {
    pub fn from_records(
        suite: &str,
        master_seed: u64,
        tolerance: f64,
        witness_tolerance: f64,
        trials: Vec<TrialRecord>,
        skipped: Vec<SkippedTrial>,
    ) -> Self {
        let violations = trials.iter().filter(|r| r.is_violation()).count();
        let min_margin = trials.iter().map(|r| r.margin).fold(f64::INFINITY, f64::min);
        let witness_failures = trials
            .iter()
            .filter(|r| r.witness && !(r.margin.abs() <= witness_tolerance))
            .count()
            + skipped.iter().filter(|s| s.reason.starts_with("witness")).count();

        let mut cells: Vec<CellSummary> = Vec::new();
        for r in &trials {
            let idx = match cells.iter().position(|c| c.cell == r.cell && c.dim == r.dim) {
                Some(i) => i,
                None => {
                    cells.push(CellSummary {
                        cell: r.cell.clone(),
                        dim: r.dim,
                        trials: 0,
                        violations: 0,
                        min_margin: f64::INFINITY,
                        best_ratio: f64::NEG_INFINITY,
                        degenerate: true,
                    });
                    cells.len() - 1
                }
            };
            let c = &mut cells[idx];
            c.trials += 1;
            c.violations += usize::from(r.is_violation());
            c.min_margin = c.min_margin.min(r.margin);
            if r.bound > 0.0 {
                c.best_ratio = c.best_ratio.max(r.observed / r.bound);
            }
            c.degenerate &= r.bound == 0.0 && r.observed == 0.0;
        }

        Self {
            suite: suite.to_string(),
            master_seed,
            tolerance,
            trials,
            min_margin,
            violations,
            witness_failures,
            witness_tolerance,
            skipped,
            cells,
        }
    }

    /// No inequality was falsified and every tightness witness hit its bound.
    pub fn passed(&self) -> bool {
        self.violations == 0 && self.witness_failures == 0
    }

    pub fn witnesses(&self) -> impl Iterator<Item = &TrialRecord> {
        self.trials.iter().filter(|r| r.witness)
    }

    /// One-line human-readable summary.
    pub fn summary(&self) -> String {
        format!(
            "suite={} trials={} violations={} witness_failures={} skipped={} min_margin={:.6e} status={}",
            self.suite,
            self.trials.len(),
            self.violations,
            self.witness_failures,
            self.skipped.len(),
            self.min_margin,
            if self.passed() { "PASS" } else { "FAIL" }
        )
    }
}

/// `{:.16e}`: 17 significant digits, enough to round-trip any double.
pub(crate) fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes the report as CSV (header row first, one row per trial).
pub fn write_csv<W: Write>(report: &VerificationReport, out: W) -> Result<()> {
    let io = |e: csv::Error| Error::InvalidArgument(format!("writing CSV: {e}"));
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER).map_err(io)?;
    let seed = report.master_seed.to_string();
    for r in &report.trials {
        w.write_record([
            seed.as_str(),
            report.suite.as_str(),
            r.cell.as_str(),
            &r.trial.to_string(),
            &r.dim.to_string(),
            &fmt_f64(r.constraint_value),
            &r.constraint_value_2.map(fmt_f64).unwrap_or_default(),
            &fmt_f64(r.observed),
            &fmt_f64(r.bound),
            &fmt_f64(r.margin),
        ])
        .map_err(io)?;
    }
    w.flush()
        .map_err(|e| Error::InvalidArgument(format!("writing CSV: {e}")))?;
    Ok(())
}
