//! Moving one Gaussian of a pair so the KL divergence hits a prescribed value.
//!
//! The moving Gaussian travels along `N(μₐ + s(μ - μₐ), (1-s)Σₐ + sΣ)` from
//! the fixed anchor (`s = 0`, divergence 0) to its original position
//! (`s = 1`). Targets below the divergence at `s = 1` are found by a bracketed
//! root search on `s`; larger targets keep the covariance and stretch the mean offset,
//! which enters the divergence quadratically and can be solved in closed form.

use crate::error::{Error, Result};
use crate::gaussian::{kl, Gaussian};

/// Relative accuracy demanded of a calibrated divergence (on top of an
/// absolute `1e-15` floor).
pub const CALIBRATION_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Copy)]
enum Moving {
    /// `KL(moving ‖ anchor)`.
    First,
    /// `KL(anchor ‖ moving)`.
    Second,
}

fn divergence(anchor: &Gaussian, moving: &Gaussian, which: Moving) -> Result<f64> {
    match which {
        Moving::First => kl(moving, anchor),
        Moving::Second => kl(anchor, moving),
    }
}

fn interpolate(anchor: &Gaussian, other: &Gaussian, s: f64) -> Result<Gaussian> {
    let mean = anchor.mean() + (other.mean() - anchor.mean()) * s;
    let cov = anchor.cov() * (1.0 - s) + other.cov() * s;
    Gaussian::from_trusted(mean, cov)
}

fn with_mean_offset(anchor: &Gaussian, other: &Gaussian, c: f64) -> Result<Gaussian> {
    let mean = anchor.mean() + (other.mean() - anchor.mean()) * c;
    Gaussian::from_trusted(mean, other.cov().clone())
}

/// Absolute accuracy floor of the closed-form divergence; tiny targets are
/// only met to this level.
const KL_NOISE: f64 = 1e-15;

fn within(value: f64, target: f64, rel: f64) -> bool {
    (value - target).abs() <= rel * target
}

fn calibrate(anchor: &Gaussian, other: &Gaussian, target: f64, which: Moving) -> Result<Gaussian> {
    if anchor.dim() != other.dim() {
        return Err(Error::DimensionMismatch {
            expected: anchor.dim(),
            found: other.dim(),
        });
    }
    if !(target.is_finite() && target >= 0.0) {
        return Err(Error::InvalidArgument(format!("calibration target {target} must be >= 0")));
    }
    if target == 0.0 {
        return Ok(anchor.clone());
    }
    let full = divergence(anchor, other, which)?;
    if within(full, target, 1e-13) {
        return Ok(other.clone());
    }

    let result = if target < full {
        // d(0) = 0 < target < d(1). Illinois regula falsi keeps a sign-change
        // bracket, so a non-monotone stretch of the path cannot derail it;
        // every fourth step bisects to guarantee the bracket shrinks.
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        let (mut h_lo, mut h_hi) = (-target, full - target);
        let mut side = 0i8;
        let mut best = other.clone();
        let mut best_gap = f64::INFINITY;
        for iter in 0..200 {
            let mut mid = if iter % 4 == 3 {
                0.5 * (lo + hi)
            } else {
                (lo * h_hi - hi * h_lo) / (h_hi - h_lo)
            };
            if !(mid > lo && mid < hi) {
                mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
            }
            let g = interpolate(anchor, other, mid)?;
            let h = divergence(anchor, &g, which)? - target;
            if h.abs() < best_gap {
                best_gap = h.abs();
                best = g;
            }
            if h.abs() <= 1e-13 * target {
                break;
            }
            if h < 0.0 {
                lo = mid;
                h_lo = h;
                if side == -1 {
                    h_hi *= 0.5;
                }
                side = -1;
            } else {
                hi = mid;
                h_hi = h;
                if side == 1 {
                    h_lo *= 0.5;
                }
                side = 1;
            }
        }
        best
    } else {
        // d(c) = base + c²·q along the mean stretch, with d(1) = full.
        let base = divergence(anchor, &with_mean_offset(anchor, other, 0.0)?, which)?;
        let quad = full - base;
        if !(quad > 0.0) || !(target > base) {
            return Err(Error::Calibration(format!(
                "target {target} unreachable: divergence {full} at the original position \
                 and no mean offset to stretch"
            )));
        }
        let mut c = ((target - base) / quad).sqrt();
        let mut g = with_mean_offset(anchor, other, c)?;
        // A couple of Newton steps on c absorb round-off in base and quad.
        for _ in 0..3 {
            let d = divergence(anchor, &g, which)?;
            if within(d, target, 1e-13) {
                break;
            }
            let slope = 2.0 * c * quad;
            c -= (d - target) / slope;
            g = with_mean_offset(anchor, other, c)?;
        }
        g
    };

    let achieved = divergence(anchor, &result, which)?;
    if (achieved - target).abs() <= CALIBRATION_TOLERANCE * target + KL_NOISE {
        Ok(result)
    } else {
        Err(Error::Calibration(format!(
            "reached {achieved} instead of {target}"
        )))
    }
}

/// Returns a Gaussian `g` on the path from `g2` to `g1` (or on the mean
/// stretch beyond `g1`) with `KL(g ‖ g2) = target` to relative accuracy
/// [`CALIBRATION_TOLERANCE`].
pub fn calibrate_pair_to_kl(g1: &Gaussian, g2: &Gaussian, target: f64) -> Result<Gaussian> {
    calibrate(g2, g1, target, Moving::First)
}

/// Returns a Gaussian `g` on the path from `anchor` to `other` (or beyond)
/// with `KL(anchor ‖ g) = target`.
pub fn calibrate_reference_to_kl(anchor: &Gaussian, other: &Gaussian, target: f64) -> Result<Gaussian> {
    calibrate(anchor, other, target, Moving::Second)
}
