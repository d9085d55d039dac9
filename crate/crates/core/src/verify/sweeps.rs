use rayon::prelude::*;

use super::calibrate::{calibrate_pair_to_kl, calibrate_reference_to_kl};
use super::report::{SkippedTrial, VerificationReport};
use super::sampling::{random_affine_with, random_gaussian_with, rng_from, trial_seed};
use super::{cell_label, Sense, TrialRecord};
use crate::bounds::{inf_reverse_kl, sup_reverse_kl, triangle_bound};
use crate::error::{Error, Result};
use crate::extremal::{embed_in_frame, extremal_inf_pair, extremal_sup_pair};
use crate::gaussian::kl;

/// Parameters shared by the randomized sweeps.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    /// Random trials per cell, not counting the extremal witness.
    pub trials_per_cell: usize,
    pub master_seed: u64,
    /// Natural-log eigenvalue range of sampled covariances.
    pub log_eig_range: (f64, f64),
    /// Standard deviation of sampled mean entries.
    pub mean_scale: f64,
    pub tolerance: f64,
    /// Largest `|margin|` a witness may show.
    pub witness_tolerance: f64,
    /// Multiplies every bound before comparison. Anything but 1 deliberately
    /// corrupts the bound; used to show the witnesses catch a wrong formula.
    pub bound_scale: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            trials_per_cell: 1000,
            master_seed: 0,
            log_eig_range: (-1.5, 1.5),
            mean_scale: 1.0,
            tolerance: 1e-8,
            witness_tolerance: 1e-8,
            bound_scale: 1.0,
        }
    }
}

impl SweepConfig {
    pub fn with_trials(mut self, trials: usize) -> Self {
        self.trials_per_cell = trials;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.master_seed = seed;
        self
    }

    fn validate(&self) -> Result<()> {
        let (lo, hi) = self.log_eig_range;
        if !(lo <= hi && lo >= -6.0 && hi <= 6.0) {
            return Err(Error::InvalidArgument(format!(
                "log-eigenvalue range [{lo}, {hi}] must be ordered and inside [-6, 6]"
            )));
        }
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !(positive(self.mean_scale) && positive(self.bound_scale)) {
            return Err(Error::InvalidArgument("mean and bound scales must be positive".into()));
        }
        if !(self.tolerance >= 0.0 && self.witness_tolerance >= 0.0) {
            return Err(Error::InvalidArgument("tolerances must be >= 0".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy)]
struct Job {
    cell: usize,
    dim: usize,
    trial: usize,
}

type Outcome = std::result::Result<TrialRecord, SkippedTrial>;

fn check_dims(dims: &[usize]) -> Result<()> {
    if dims.is_empty() || dims.contains(&0) {
        return Err(Error::InvalidArgument("dims must be non-empty and all >= 1".into()));
    }
    Ok(())
}

/// Enumerates (cell, dim, trial) in a fixed order, runs them in parallel and
/// collects the results back in that order.
fn run(
    cells: usize,
    dims: &[usize],
    trials: usize,
    work: impl Fn(Job) -> Outcome + Sync,
) -> (Vec<TrialRecord>, Vec<SkippedTrial>) {
    let mut jobs = Vec::with_capacity(cells * dims.len() * trials);
    for cell in 0..cells {
        for (d, &dim) in dims.iter().enumerate() {
            for trial in 0..trials {
                jobs.push(Job {
                    cell: cell * dims.len() + d,
                    dim,
                    trial,
                });
            }
        }
    }
    let outcomes: Vec<Outcome> = jobs.par_iter().map(|&j| work(j)).collect();
    let mut records = Vec::with_capacity(outcomes.len());
    let mut skipped = Vec::new();
    for o in outcomes {
        match o {
            Ok(r) => records.push(r),
            Err(s) => skipped.push(s),
        }
    }
    (records, skipped)
}

fn skip(label: &str, job: Job, reason: impl std::fmt::Display, witness: bool) -> SkippedTrial {
    SkippedTrial {
        cell: label.to_string(),
        trial: job.trial,
        dim: job.dim,
        reason: if witness {
            format!("witness: {reason}")
        } else {
            reason.to_string()
        },
    }
}

#[derive(Clone, Copy)]
enum Direction {
    Sup,
    Inf,
}

fn reverse_sweep(budgets: &[f64], dims: &[usize], cfg: &SweepConfig, dir: Direction) -> Result<VerificationReport> {
    cfg.validate()?;
    check_dims(dims)?;
    if let Some(&b) = budgets.iter().find(|&&b| !(b.is_finite() && b > 0.0)) {
        return Err(Error::InvalidArgument(format!("budget {b} must be finite and > 0")));
    }
    let (suite, sense) = match dir {
        Direction::Sup => ("symmetry", Sense::Upper),
        Direction::Inf => ("infimum", Sense::Lower),
    };
    let bound_at = |forward: f64| -> Result<f64> {
        let b = match dir {
            Direction::Sup => sup_reverse_kl(forward)?.value,
            Direction::Inf => inf_reverse_kl(forward)?.value,
        };
        Ok(b * cfg.bound_scale)
    };

    // Trial 0 of every cell is the extremal pair in a random frame.
    let work = |job: Job| -> Outcome {
        let budget = budgets[job.cell / dims.len()];
        let label = cell_label(&[budget]);
        let seed = trial_seed(cfg.master_seed, job.cell as u64, job.trial as u64);
        let mut rng = rng_from(seed);
        let witness = job.trial == 0;
        let mut attempt = || -> Result<TrialRecord> {
            let (g1, g2) = if witness {
                let pair = match dir {
                    Direction::Sup => extremal_sup_pair(budget, job.dim)?,
                    Direction::Inf => extremal_inf_pair(budget, job.dim)?,
                };
                let frame = random_affine_with(&mut rng, job.dim)?;
                let pair = embed_in_frame(&pair, &frame)?;
                (pair.g1, pair.g2)
            } else {
                let g1 = random_gaussian_with(&mut rng, job.dim, cfg.log_eig_range, cfg.mean_scale)?;
                let g2 = random_gaussian_with(&mut rng, job.dim, cfg.log_eig_range, cfg.mean_scale)?;
                (calibrate_pair_to_kl(&g1, &g2, budget)?, g2)
            };
            let forward = kl(&g1, &g2)?;
            let observed = kl(&g2, &g1)?;
            // The witness is judged against the nominal budget; random trials
            // against the budget they actually reached.
            let bound = bound_at(if witness { budget } else { forward })?;
            let record = TrialRecord::new(
                label.clone(),
                job.trial,
                seed,
                job.dim,
                forward,
                observed,
                bound,
                sense,
                cfg.tolerance,
            );
            Ok(if witness { record.as_witness() } else { record })
        };
        attempt().map_err(|e| skip(&label, job, e, witness))
    };

    let (records, skipped) = run(budgets.len(), dims, cfg.trials_per_cell + 1, work);
    Ok(VerificationReport::from_records(
        suite,
        cfg.master_seed,
        cfg.tolerance,
        cfg.witness_tolerance,
        records,
        skipped,
    ))
}

/// Checks `KL(N₂‖N₁) <= sup_reverse_kl(KL(N₁‖N₂))` on random pairs calibrated
/// to each budget in `eps_list`, for every dimension in `dims`. Each cell
/// also holds one extremal witness (trial 0) that must meet the bound.
pub fn sweep_symmetry(eps_list: &[f64], dims: &[usize], cfg: &SweepConfig) -> Result<VerificationReport> {
    reverse_sweep(eps_list, dims, cfg, Direction::Sup)
}

/// Mirror of [`sweep_symmetry`] for `KL(N₂‖N₁) >= inf_reverse_kl(M)`.
pub fn sweep_infimum(m_list: &[f64], dims: &[usize], cfg: &SweepConfig) -> Result<VerificationReport> {
    reverse_sweep(m_list, dims, cfg, Direction::Inf)
}

/// Checks `KL(N₁‖N₃) < triangle_bound(ε₁, ε₂)` on random triples where
/// `KL(N₁‖N₂)` is calibrated to `ε₁` and `KL(N₂‖N₃)` to `ε₂`.
///
/// The cell `(0, 0)` only admits `N₁ = N₂ = N₃`; it is checked for equality
/// and reported as degenerate instead of against the strict inequality.
pub fn sweep_triangle(cells: &[(f64, f64)], dims: &[usize], cfg: &SweepConfig) -> Result<VerificationReport> {
    cfg.validate()?;
    check_dims(dims)?;
    if let Some(&(a, b)) = cells
        .iter()
        .find(|(a, b)| !(a.is_finite() && *a >= 0.0 && b.is_finite() && *b >= 0.0))
    {
        return Err(Error::InvalidArgument(format!("budgets ({a}, {b}) must be finite and >= 0")));
    }

    let work = |job: Job| -> Outcome {
        let (eps1, eps2) = cells[job.cell / dims.len()];
        let label = cell_label(&[eps1, eps2]);
        let seed = trial_seed(cfg.master_seed, job.cell as u64, job.trial as u64);
        let mut rng = rng_from(seed);
        let mut attempt = || -> Result<TrialRecord> {
            let n1 = random_gaussian_with(&mut rng, job.dim, cfg.log_eig_range, cfg.mean_scale)?;
            let n2 = random_gaussian_with(&mut rng, job.dim, cfg.log_eig_range, cfg.mean_scale)?;
            let n3 = random_gaussian_with(&mut rng, job.dim, cfg.log_eig_range, cfg.mean_scale)?;
            let n1 = calibrate_pair_to_kl(&n1, &n2, eps1)?;
            let n3 = calibrate_reference_to_kl(&n2, &n3, eps2)?;
            let k12 = kl(&n1, &n2)?;
            let k23 = kl(&n2, &n3)?;
            let observed = kl(&n1, &n3)?;
            let degenerate = eps1 == 0.0 && eps2 == 0.0;
            let (bound, sense) = if degenerate {
                (0.0, Sense::Equal)
            } else {
                (triangle_bound(k12, k23)?.value * cfg.bound_scale, Sense::StrictUpper)
            };
            Ok(TrialRecord::new(
                label.clone(),
                job.trial,
                seed,
                job.dim,
                k12,
                observed,
                bound,
                sense,
                cfg.tolerance,
            )
            .with_second_constraint(k23))
        };
        attempt().map_err(|e| skip(&label, job, e, false))
    };

    let (records, skipped) = run(cells.len(), dims, cfg.trials_per_cell, work);
    Ok(VerificationReport::from_records(
        "triangle",
        cfg.master_seed,
        cfg.tolerance,
        cfg.witness_tolerance,
        records,
        skipped,
    ))
}
