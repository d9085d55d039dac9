//! Real branches of the Lambert W function.
//!
//! `W(x)` is the inverse of `w ↦ w·eʷ`. On the reals it has two branches
//! that meet at the branch point `x = -1/e`, `W = -1`:
//!
//! * [`Branch::Principal`] (`W₀`), defined on `[-1/e, ∞)` with range `[-1, ∞)`;
//! * [`Branch::MinusOne`] (`W₋₁`), defined on `[-1/e, 0)` with range `(-∞, -1]`.
//!
//! Evaluation seeds a Halley iteration on `w·eʷ - x` from a region-specific
//! initial guess. Close to the branch point the square-root series in
//! `p = ±√(2(1 + e·x))` is already accurate to working precision and is
//! returned directly.

use std::f64::consts::E;

use crate::error::{domain, Result};

/// Largest-magnitude argument still accepted as the branch point when it lies
/// below `-1/e`.
pub const BRANCH_POINT_SLOP: f64 = 1e-15;

/// `-1/e` rounded to the nearest double.
pub const BRANCH_POINT: f64 = -0.367_879_441_171_442_33;

const MAX_HALLEY_STEPS: usize = 50;

// e = E_HI + E_LO to roughly 32 significant digits; used to form 1 + e·x
// without cancellation near the branch point.
const E_HI: f64 = E;
const E_LO: f64 = 1.445_646_891_729_250_2e-16;

/// Below this `|p|` the branch-point series is returned without refinement.
const SERIES_ONLY: f64 = 1e-2;

// Coefficients of W = Σ cₖ pᵏ about the branch point.
const BRANCH_SERIES: [f64; 10] = [
    -1.0,
    1.0,
    -1.0 / 3.0,
    11.0 / 72.0,
    -43.0 / 540.0,
    769.0 / 17280.0,
    -221.0 / 8505.0,
    680_863.0 / 43_545_600.0,
    -1963.0 / 204_120.0,
    226_287_557.0 / 37_623_398_400.0,
];

/// Which real branch of W to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    /// `W₀`, range `[-1, ∞)`.
    Principal,
    /// `W₋₁`, range `(-∞, -1]`.
    MinusOne,
}

impl Branch {
    fn name(self) -> &'static str {
        match self {
            Branch::Principal => "lambert_w(principal)",
            Branch::MinusOne => "lambert_w(minus_one)",
        }
    }
}

/// `1 + e·x`, accurate to a few ulps of the result even when it is tiny.
fn branch_offset(x: f64) -> f64 {
    E_HI.mul_add(x, 1.0) + E_LO * x
}

fn branch_series(p: f64) -> f64 {
    BRANCH_SERIES.iter().rev().fold(0.0, |acc, &c| acc.mul_add(p, c))
}

/// Evaluates the requested real branch of the Lambert W function at `x`.
///
/// Arguments within [`BRANCH_POINT_SLOP`] below `-1/e` are treated as the
/// branch point itself.
pub fn lambert_w(branch: Branch, x: f64) -> Result<f64> {
    if x.is_nan() {
        return Err(domain(branch.name(), x, "finite argument"));
    }
    let q = branch_offset(x);
    if q < 0.0 {
        if x >= BRANCH_POINT - BRANCH_POINT_SLOP {
            return Ok(-1.0);
        }
        return Err(domain(branch.name(), x, "x >= -1/e"));
    }
    match branch {
        Branch::Principal => {
            if x.is_infinite() {
                return Err(domain(branch.name(), x, "finite argument"));
            }
            if x == 0.0 {
                return Ok(0.0);
            }
        }
        Branch::MinusOne => {
            if x >= 0.0 {
                return Err(domain(branch.name(), x, "-1/e <= x < 0"));
            }
        }
    }

    let p = match branch {
        Branch::Principal => (2.0 * q).sqrt(),
        Branch::MinusOne => -(2.0 * q).sqrt(),
    };
    if p.abs() < SERIES_ONLY {
        return Ok(branch_series(p));
    }

    let seed = if x < -0.25 {
        branch_series(p)
    } else {
        match branch {
            Branch::Principal if x < 3.0 => x.ln_1p(),
            Branch::Principal => asymptotic_seed(x.ln()),
            Branch::MinusOne => asymptotic_seed((-x).ln()),
        }
    };
    Ok(halley(x, seed, branch))
}

/// Branch-point series for an argument given through its offset
/// `q = 1 + e·x`, when `q` is small enough for the series alone to be exact
/// to working precision. Lets callers that know `q` more accurately than `x`
/// bypass the rounding of `x`.
pub(crate) fn near_branch_point(branch: Branch, q: f64) -> Option<f64> {
    let r = (2.0 * q).sqrt();
    let p = match branch {
        Branch::Principal => r,
        Branch::MinusOne => -r,
    };
    (q >= 0.0 && r < SERIES_ONLY).then(|| branch_series(p))
}

/// `L₁ - L₂ + L₂/L₁` with `L₂ = ln|L₁|`, the leading terms of the
/// asymptotic expansion of W at `+∞` (W₀) and `0⁻` (W₋₁).
fn asymptotic_seed(l1: f64) -> f64 {
    let l2 = l1.abs().ln();
    l1 - l2 + l2 / l1
}

fn halley(x: f64, mut w: f64, branch: Branch) -> f64 {
    for _ in 0..MAX_HALLEY_STEPS {
        let ew = w.exp();
        let residual = w * ew - x;
        let wp1 = w + 1.0;
        let denom = ew * wp1 - (w + 2.0) * residual / (2.0 * wp1);
        if denom == 0.0 || !denom.is_finite() {
            break;
        }
        let step = residual / denom;
        let mut next = w - step;
        // Keep the iterate on its branch; overshooting -1 would switch branches.
        match branch {
            Branch::Principal if next < -1.0 => next = 0.5 * (w - 1.0),
            Branch::MinusOne if next > -1.0 => next = 0.5 * (w - 1.0),
            _ => {}
        }
        let converged = (next - w).abs() <= 1e-15 * (1.0 + next.abs());
        w = next;
        if converged {
            break;
        }
    }
    w
}

/// Derivative `W'(x) = W(x) / (x (1 + W(x)))`.
///
/// Undefined at `x = 0` and at the branch point `x = -1/e`.
pub fn lambert_w_derivative(branch: Branch, x: f64) -> Result<f64> {
    const WHAT: &str = "lambert_w_derivative";
    if x == 0.0 {
        return Err(domain(WHAT, x, "x != 0"));
    }
    if branch_offset(x) <= 0.0 {
        return Err(domain(WHAT, x, "x > -1/e"));
    }
    let w = lambert_w(branch, x)?;
    let wp1 = 1.0 + w;
    if wp1 == 0.0 {
        return Err(domain(WHAT, x, "x > -1/e"));
    }
    Ok(w / (x * wp1))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn residual_ok(w: f64, x: f64) -> bool {
        (w * w.exp() - x).abs() <= 1e-13 * x.abs().max(1.0)
    }

    #[test]
    fn exact_points() {
        assert_eq!(lambert_w(Branch::Principal, 0.0).unwrap(), 0.0);
        assert!((lambert_w(Branch::Principal, E).unwrap() - 1.0).abs() < 1e-15);
        let bp = -(-1.0f64).exp();
        assert!((lambert_w(Branch::MinusOne, bp).unwrap() + 1.0).abs() < 1e-13);
        assert!((lambert_w(Branch::Principal, bp).unwrap() + 1.0).abs() < 1e-13);
        let x = -2.0 * (-2.0f64).exp();
        assert!((lambert_w(Branch::MinusOne, x).unwrap() + 2.0).abs() < 1e-14);
    }

    #[test]
    fn principal_grid_inverts_defining_map() {
        for i in 0..=600 {
            let t = -1.0 + 6.0 * i as f64 / 600.0;
            let x = t * t.exp();
            let w = lambert_w(Branch::Principal, x).unwrap();
            // Conditioning near t = -1 limits how well t itself can be recovered.
            let tol = if t > -0.9 { 1e-12 } else { 1e-7 };
            assert!((w - t).abs() <= tol * (1.0 + t.abs()), "t={t} w={w}");
            assert!(residual_ok(w, x));
        }
    }

    #[test]
    fn minus_one_grid() {
        for i in 1..=400 {
            let t = -1.0 - 30.0 * i as f64 / 400.0;
            let x = t * t.exp();
            let w = lambert_w(Branch::MinusOne, x).unwrap();
            assert!(residual_ok(w, x));
            assert!(w <= -1.0);
        }
    }

    #[test]
    fn slop_below_branch_point_is_clamped() {
        let x = BRANCH_POINT - 5e-16;
        assert_eq!(lambert_w(Branch::Principal, x).unwrap(), -1.0);
        assert_eq!(lambert_w(Branch::MinusOne, x).unwrap(), -1.0);
        assert!(lambert_w(Branch::Principal, -0.37).is_err());
    }

    #[test]
    fn domain_errors() {
        assert!(lambert_w(Branch::MinusOne, 0.0).is_err());
        assert!(lambert_w(Branch::MinusOne, 1.0).is_err());
        assert!(lambert_w(Branch::Principal, f64::NAN).is_err());
        assert!(lambert_w(Branch::Principal, -0.5).is_err());
        assert!(lambert_w_derivative(Branch::Principal, 0.0).is_err());
        assert!(lambert_w_derivative(Branch::MinusOne, BRANCH_POINT).is_err());
    }

    #[test]
    fn branch_ordering() {
        for i in 1..200 {
            let x = BRANCH_POINT * i as f64 / 200.0;
            let w0 = lambert_w(Branch::Principal, x).unwrap();
            let wm = lambert_w(Branch::MinusOne, x).unwrap();
            assert!(wm < -1.0 && -1.0 < w0 && w0 < 0.0, "x={x}");
        }
    }

    fn central_difference(branch: Branch, x: f64, h: f64) -> f64 {
        (lambert_w(branch, x + h).unwrap() - lambert_w(branch, x - h).unwrap()) / (2.0 * h)
    }

    #[test]
    fn derivative_values() {
        let d = lambert_w_derivative(Branch::Principal, E).unwrap();
        assert!((d - 1.0 / (2.0 * E)).abs() < 1e-15);
        let d = lambert_w_derivative(Branch::Principal, 1e-8).unwrap();
        assert!((d - 1.0).abs() < 1e-7);
        let d = lambert_w_derivative(Branch::MinusOne, -0.1).unwrap();
        let fd = central_difference(Branch::MinusOne, -0.1, 1e-6);
        assert!(((d - fd) / d).abs() < 1e-6, "{d} vs {fd}");
    }

    #[test]
    fn derivative_matches_finite_differences() {
        for &x in &[-0.3, -0.2, -0.05, 0.3, 1.0, 10.0, 1e3] {
            let d = lambert_w_derivative(Branch::Principal, x).unwrap();
            let fd = central_difference(Branch::Principal, x, 1e-6 * x.abs().max(1e-3));
            assert!(((d - fd) / d).abs() < 1e-6, "x={x}");
        }
        for &x in &[-0.3, -0.2, -0.01, -1e-4] {
            let d = lambert_w_derivative(Branch::MinusOne, x).unwrap();
            let fd = central_difference(Branch::MinusOne, x, 1e-6 * x.abs());
            assert!(((d - fd) / d).abs() < 1e-6, "x={x}");
        }
    }
}
