//! Falsification harness.
//!
//! Each suite turns one of the inequalities into many concrete checks,
//! records every check as a [`TrialRecord`], and summarizes them in a
//! [`VerificationReport`]. Randomized suites derive a seed per trial from the
//! master seed with a counter-based split, so results do not depend on how
//! the trials are scheduled across threads.

mod calibrate;
mod inequalities;
mod report;
mod sampling;
mod sweeps;

pub use calibrate::{calibrate_pair_to_kl, calibrate_reference_to_kl};
pub use inequalities::{
    allocation_grid, check_allocation_inequality, check_scalar_inequalities, check_trace_inequality,
    AllocationObjective, ScalarGrid,
};
pub use report::{write_csv, CellSummary, SkippedTrial, VerificationReport, CSV_HEADER};
pub use sampling::{random_affine, random_gaussian, random_spd, trial_seed};
pub use sweeps::{sweep_infimum, sweep_symmetry, sweep_triangle, SweepConfig};

/// Which way an inequality points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sense {
    /// `observed <= bound`.
    Upper,
    /// `observed < bound`.
    StrictUpper,
    /// `observed >= bound`.
    Lower,
    /// `observed == bound`.
    Equal,
}

/// One concrete check of an inequality.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    /// Parameters of the cell the trial belongs to, `;`-separated.
    pub cell: String,
    pub trial: usize,
    pub seed: u64,
    pub dim: usize,
    /// The achieved constraint (e.g. forward KL after calibration).
    pub constraint_value: f64,
    /// Second constraint, for checks with two budgets.
    pub constraint_value_2: Option<f64>,
    pub observed: f64,
    pub bound: f64,
    /// Always `bound - observed`, unclamped.
    pub margin: f64,
    pub sense: Sense,
    pub tolerance: f64,
    /// The trial is an extremal construction that should sit on the bound.
    pub witness: bool,
}

impl TrialRecord {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        cell: impl Into<String>,
        trial: usize,
        seed: u64,
        dim: usize,
        constraint_value: f64,
        observed: f64,
        bound: f64,
        sense: Sense,
        tolerance: f64,
    ) -> Self {
        Self {
            cell: cell.into(),
            trial,
            seed,
            dim,
            constraint_value,
            constraint_value_2: None,
            observed,
            bound,
            margin: bound - observed,
            sense,
            tolerance,
            witness: false,
        }
    }

    pub fn with_second_constraint(mut self, value: f64) -> Self {
        self.constraint_value_2 = Some(value);
        self
    }

    pub fn as_witness(mut self) -> Self {
        self.witness = true;
        self
    }

    /// Whether the record falsifies its inequality. NaN margins always do.
    pub fn is_violation(&self) -> bool {
        let m = self.margin;
        if m.is_nan() {
            return true;
        }
        match self.sense {
            Sense::Upper => m < -self.tolerance,
            Sense::StrictUpper => m <= 0.0,
            Sense::Lower => m > self.tolerance,
            Sense::Equal => m.abs() > self.tolerance,
        }
    }
}

/// Formats a cell label from its parameters.
pub(crate) fn cell_label(params: &[f64]) -> String {
    params
        .iter()
        .map(|p| format!("{p}"))
        .collect::<Vec<_>>()
        .join(";")
}
