//! Gaussian pairs that attain the reverse-KL supremum and infimum.
//!
//! In canonical form the reference is `N(0, I)` and the other Gaussian has
//! the same mean and covariance `diag(λ, 1, …, 1)`, with `λ = w1(2ε)` for the
//! supremum and `λ = w2(2M)` for the infimum. Any common invertible affine
//! map preserves both divergences, so [`embed_in_frame`] produces attaining
//! pairs in arbitrary coordinates.

use nalgebra::{DMatrix, DVector};

use crate::bounds::{inf_reverse_kl, sup_reverse_kl};
use crate::document::pair_to_json;
use crate::error::{domain, Error, Result};
use crate::gaussian::{apply_affine, kl, make_gaussian, AffineMap, Gaussian};
use crate::scalar::{f, w1, w2};

/// Maps worse conditioned than this are refused by [`embed_in_frame`].
pub const MAX_FRAME_CONDITION: f64 = 1e8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExtremalKind {
    SupAttainer,
    InfAttainer,
}

/// `g1`, `g2` with `KL(g1‖g2) = forward_constraint` and `KL(g2‖g1)` equal to
/// the corresponding bound.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtremalPair {
    pub forward_constraint: f64,
    pub g1: Gaussian,
    pub g2: Gaussian,
    pub kind: ExtremalKind,
}

impl ExtremalPair {
    pub fn dim(&self) -> usize {
        self.g1.dim()
    }

    pub fn forward_kl(&self) -> Result<f64> {
        kl(&self.g1, &self.g2)
    }

    pub fn reverse_kl(&self) -> Result<f64> {
        kl(&self.g2, &self.g1)
    }

    /// The bound this pair is meant to attain.
    pub fn target_bound(&self) -> Result<f64> {
        Ok(match self.kind {
            ExtremalKind::SupAttainer => sup_reverse_kl(self.forward_constraint)?.value,
            ExtremalKind::InfAttainer => inf_reverse_kl(self.forward_constraint)?.value,
        })
    }

    /// Two-document JSON array `[g1, g2]`.
    pub fn to_json(&self) -> String {
        pair_to_json(&self.g1, &self.g2)
    }
}

fn canonical(lambda: f64, n: usize) -> Result<(Gaussian, Gaussian)> {
    let mut diag = DVector::from_element(n, 1.0);
    diag[0] = lambda;
    let g1 = make_gaussian(DVector::zeros(n), DMatrix::from_diagonal(&diag))?;
    Ok((g1, Gaussian::standard(n)?))
}

fn check_args(budget: f64, n: usize, what: &'static str) -> Result<()> {
    if !(budget.is_finite() && budget > 0.0) {
        return Err(domain(what, budget, "finite budget > 0"));
    }
    if n == 0 {
        return Err(domain(what, 0.0, "dimension n >= 1"));
    }
    Ok(())
}

/// Pair attaining the reverse-KL supremum at forward budget `eps`.
pub fn extremal_sup_pair(eps: f64, n: usize) -> Result<ExtremalPair> {
    check_args(eps, n, "extremal_sup_pair")?;
    let (g1, g2) = canonical(w1(2.0 * eps)?, n)?;
    Ok(ExtremalPair {
        forward_constraint: eps,
        g1,
        g2,
        kind: ExtremalKind::SupAttainer,
    })
}

/// Pair attaining the reverse-KL infimum at forward budget `m`.
pub fn extremal_inf_pair(m: f64, n: usize) -> Result<ExtremalPair> {
    check_args(m, n, "extremal_inf_pair")?;
    let (g1, g2) = canonical(w2(2.0 * m)?, n)?;
    Ok(ExtremalPair {
        forward_constraint: m,
        g1,
        g2,
        kind: ExtremalKind::InfAttainer,
    })
}

/// Pushes both Gaussians of `pair` through the same affine map.
pub fn embed_in_frame(pair: &ExtremalPair, map: &AffineMap) -> Result<ExtremalPair> {
    if map.dim() != pair.dim() {
        return Err(Error::DimensionMismatch {
            expected: pair.dim(),
            found: map.dim(),
        });
    }
    if map.condition() > MAX_FRAME_CONDITION {
        return Err(Error::IllConditioned {
            condition: map.condition(),
            limit: MAX_FRAME_CONDITION,
        });
    }
    Ok(ExtremalPair {
        forward_constraint: pair.forward_constraint,
        g1: apply_affine(map, &pair.g1)?,
        g2: apply_affine(map, &pair.g2)?,
        kind: pair.kind,
    })
}

/// Result of moving a pair off the attaining configuration at fixed forward KL.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeOutcome {
    pub forward: f64,
    pub reverse: f64,
    pub bound: f64,
}

/// Moves a second eigenvalue from 1 to `1 + delta` and shrinks the deviation
/// of the extremal eigenvalue from 1 by the factor that restores the forward
/// KL to its budget. Returns the resulting divergences in canonical form.
///
/// Needs `n >= 2` and a perturbation whose own forward cost stays within the
/// budget.
pub fn perturbation_probe(kind: ExtremalKind, budget: f64, n: usize, delta: f64) -> Result<ProbeOutcome> {
    check_args(budget, n, "perturbation_probe")?;
    if n < 2 {
        return Err(domain("perturbation_probe", n as f64, "n >= 2"));
    }
    let second = 1.0 + delta;
    let second_cost = f(second)? - 1.0;
    let level = 2.0 * budget;
    if !(second_cost < level) {
        return Err(domain("perturbation_probe", delta, "perturbation cost below the budget"));
    }
    let extreme = match kind {
        ExtremalKind::SupAttainer => w1(level)?,
        ExtremalKind::InfAttainer => w2(level)?,
    };
    let eigen_at = |s: f64| 1.0 + s * (extreme - 1.0);
    let excess = |s: f64| f(eigen_at(s)).map(|v| v - 1.0 + second_cost - level);

    // excess(0) < 0 < excess(1) and excess is increasing in s.
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if excess(mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let s = if excess(lo)?.abs() <= excess(hi)?.abs() { lo } else { hi };

    let mut diag = DVector::from_element(n, 1.0);
    diag[0] = eigen_at(s);
    diag[1] = second;
    let g1 = make_gaussian(DVector::zeros(n), DMatrix::from_diagonal(&diag))?;
    let g2 = Gaussian::standard(n)?;
    let bound = match kind {
        ExtremalKind::SupAttainer => sup_reverse_kl(budget)?.value,
        ExtremalKind::InfAttainer => inf_reverse_kl(budget)?.value,
    };
    Ok(ProbeOutcome {
        forward: kl(&g1, &g2)?,
        reverse: kl(&g2, &g1)?,
        bound,
    })
}
