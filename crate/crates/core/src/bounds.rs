//! Closed-form bounds between forward and reverse KL divergence of
//! Gaussians, and for the relaxed triangle inequality.
//!
//! All of them are dimension free. Every bound goes through
//! [`crate::scalar::w1`] / [`crate::scalar::w2`]; only
//! [`triangle_bound_lambert_form`] calls Lambert W directly, as an
//! independent transcription of the same formula.

use crate::error::{domain, Result};
use crate::lambert_w::{lambert_w, Branch};
use crate::scalar::{f, w1, w2};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundKind {
    /// Largest reverse KL given forward KL `<= ε`.
    SupReverse,
    /// Smallest reverse KL given forward KL `>= M`.
    InfReverse,
    /// Upper bound on `KL(N₁‖N₃)` from budgets on `KL(N₁‖N₂)` and `KL(N₂‖N₃)`.
    Triangle,
    NArySup,
    NAryInf,
}

/// A bound value together with the recipe for attaining it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundResult {
    pub value: f64,
    pub kind: BoundKind,
    /// The single non-unit eigenvalue of the whitened covariance at which the
    /// bound is attained (with equal means). Present for `SupReverse`
    /// (in `(0, 1]`) and `InfReverse` (in `[1, ∞)`).
    pub extremal_eigenvalue: Option<f64>,
    /// The inequality is strict: observed values never reach `value`.
    pub strict: bool,
}

fn nonnegative(x: f64, what: &'static str) -> Result<f64> {
    if x.is_finite() && x >= 0.0 {
        Ok(x)
    } else {
        Err(domain(what, x, "finite value >= 0"))
    }
}

fn positive(x: f64, what: &'static str) -> Result<f64> {
    if x.is_finite() && x > 0.0 {
        Ok(x)
    } else {
        Err(domain(what, x, "finite value > 0"))
    }
}

fn positive_dim(n: usize, what: &'static str) -> Result<()> {
    if n == 0 {
        Err(domain(what, 0.0, "n >= 1"))
    } else {
        Ok(())
    }
}

/// `½(1/λ + ln λ - 1)`, the reverse KL of `N(0, diag(λ, 1, …, 1))`
/// against `N(0, I)`.
fn reverse_of_eigenvalue(lambda: f64) -> f64 {
    0.5 * (1.0 / lambda + lambda.ln() - 1.0)
}

/// Supremum of `KL(N₂‖N₁)` over all Gaussian pairs with `KL(N₁‖N₂) <= ε`:
/// `½(1/w1(2ε) - ln(1/w1(2ε)) - 1)`.
pub fn sup_reverse_kl(eps: f64) -> Result<BoundResult> {
    let eps = nonnegative(eps, "sup_reverse_kl")?;
    let lambda = w1(2.0 * eps)?;
    Ok(BoundResult {
        value: reverse_of_eigenvalue(lambda).max(0.0),
        kind: BoundKind::SupReverse,
        extremal_eigenvalue: Some(lambda),
        strict: false,
    })
}

/// Small-budget expansion `ε + 2ε^{3/2}` of [`sup_reverse_kl`].
pub fn sup_reverse_kl_series(eps: f64) -> Result<f64> {
    let eps = nonnegative(eps, "sup_reverse_kl_series")?;
    Ok(eps + 2.0 * eps * eps.sqrt())
}

/// Infimum of `KL(N₂‖N₁)` over all Gaussian pairs with `KL(N₁‖N₂) >= M`:
/// `½(1/w2(2M) - ln(1/w2(2M)) - 1)`.
pub fn inf_reverse_kl(m: f64) -> Result<BoundResult> {
    let m = positive(m, "inf_reverse_kl")?;
    let lambda = w2(2.0 * m)?;
    Ok(BoundResult {
        value: reverse_of_eigenvalue(lambda).max(0.0),
        kind: BoundKind::InfReverse,
        extremal_eigenvalue: Some(lambda),
        strict: false,
    })
}

/// `sup { Σ f(1/xᵢ) : Σ f(xᵢ) <= n + ε } = f(1/w1(ε)) + n - 1`.
pub fn nary_sup_bound(eps: f64, n: usize) -> Result<f64> {
    let eps = nonnegative(eps, "nary_sup_bound")?;
    positive_dim(n, "nary_sup_bound")?;
    Ok(f(1.0 / w1(eps)?)? + (n - 1) as f64)
}

/// `inf { Σ f(1/xᵢ) : Σ f(xᵢ) >= n + M } = f(1/w2(M)) + n - 1`.
pub fn nary_inf_bound(m: f64, n: usize) -> Result<f64> {
    let m = nonnegative(m, "nary_inf_bound")?;
    positive_dim(n, "nary_inf_bound")?;
    Ok(f(1.0 / w2(m)?)? + (n - 1) as f64)
}

/// Relaxed triangle inequality: if `KL(N₁‖N₂) <= ε₁` and `KL(N₂‖N₃) <= ε₂`
/// then `KL(N₁‖N₃)` is strictly below
///
/// `ε₁ + ε₂ + ½((w2(2ε₁)-1)(w2(2ε₂)-1) + w2(2ε₂)(√(2ε₁) + √(2ε₂/w1(2ε₂)))²)`.
pub fn triangle_bound(eps1: f64, eps2: f64) -> Result<BoundResult> {
    let eps1 = nonnegative(eps1, "triangle_bound")?;
    let eps2 = nonnegative(eps2, "triangle_bound")?;
    let a = w2(2.0 * eps1)?;
    let b = w2(2.0 * eps2)?;
    let b_low = w1(2.0 * eps2)?;
    let shift = (2.0 * eps1).sqrt() + (2.0 * eps2 / b_low).sqrt();
    let value = eps1 + eps2 + 0.5 * ((a - 1.0) * (b - 1.0) + b * shift * shift);
    debug_assert!({
        let alt = triangle_bound_lambert_form(eps1, eps2).unwrap_or(value);
        (alt - value).abs() <= 1e-9 * value.max(1.0)
    });
    Ok(BoundResult {
        value,
        kind: BoundKind::Triangle,
        extremal_eigenvalue: None,
        strict: true,
    })
}

/// The triangle bound written directly in Lambert W terms,
/// `ε₁ + ε₂ + ½(W₁W₂ + W₁ + W₂ + 1 - W₂(√(2ε₁) + √(2ε₂/(-V₂)))²)` with
/// `Wᵢ = W₋₁(-e^{-(1+2εᵢ)})` and `V₂ = W₀(-e^{-(1+2ε₂)})`.
pub fn triangle_bound_lambert_form(eps1: f64, eps2: f64) -> Result<f64> {
    let eps1 = nonnegative(eps1, "triangle_bound_lambert_form")?;
    let eps2 = nonnegative(eps2, "triangle_bound_lambert_form")?;
    let arg = |e: f64| -(-(1.0 + 2.0 * e)).exp();
    let wa = lambert_w(Branch::MinusOne, arg(eps1))?;
    let wb = lambert_w(Branch::MinusOne, arg(eps2))?;
    let vb = lambert_w(Branch::Principal, arg(eps2))?;
    let shift = (2.0 * eps1).sqrt() + (2.0 * eps2 / -vb).sqrt();
    Ok(eps1 + eps2 + 0.5 * (wa * wb + wa + wb + 1.0 - wb * shift * shift))
}

/// Small-budget expansion `3ε₁ + 3ε₂ + 2√(ε₁ε₂)` of [`triangle_bound`].
pub fn triangle_bound_series(eps1: f64, eps2: f64) -> Result<f64> {
    let eps1 = nonnegative(eps1, "triangle_bound_series")?;
    let eps2 = nonnegative(eps2, "triangle_bound_series")?;
    Ok(3.0 * eps1 + 3.0 * eps2 + 2.0 * (eps1 * eps2).sqrt())
}

/// `sup_reverse_kl(inf_reverse_kl(M))`, which returns `M`: the infimum at
/// budget `M` is exactly the budget whose supremum is `M`.
pub fn dual_roundtrip(m: f64) -> Result<f64> {
    let inner = inf_reverse_kl(m)?;
    Ok(sup_reverse_kl(inner.value)?.value)
}

#[cfg(test)]
mod tests {
    use super::*;

    // Reference values computed with 40-digit arithmetic.
    const SUP_AT_HALF: f64 = 1.731_994_809_417_365_3;
    const SUP_AT_1E_4: f64 = 1.013_467_831_375_341_7e-4;
    const INF_AT_1: f64 = 0.363_602_589_927_976_2;
    const W2_AT_2: f64 = 4.505_241_495_792_883;
    const TRIANGLE_01_02: f64 = 3.260_148_463_319_837;
    const TRIANGLE_1E_4: f64 = 8.148_586_027_545_067e-4;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn sup_reverse_values() {
        let b = sup_reverse_kl(0.0).unwrap();
        assert_eq!(b.value, 0.0);
        assert_eq!(b.extremal_eigenvalue, Some(1.0));
        assert!(rel(sup_reverse_kl(0.5).unwrap().value, SUP_AT_HALF) < 1e-13);
        assert!(rel(sup_reverse_kl(1e-4).unwrap().value, SUP_AT_1E_4) < 1e-10);
        assert!(sup_reverse_kl(-1e-9).is_err());
        let lam = sup_reverse_kl(0.5).unwrap().extremal_eigenvalue.unwrap();
        assert!(lam > 0.0 && lam <= 1.0);
    }

    #[test]
    fn series_formulas() {
        assert_eq!(sup_reverse_kl_series(0.0).unwrap(), 0.0);
        assert!(rel(sup_reverse_kl_series(1e-4).unwrap(), 1.02e-4) < 1e-14);
        assert!(rel(sup_reverse_kl_series(1e-2).unwrap(), 0.012) < 1e-14);
        assert_eq!(triangle_bound_series(0.0, 0.0).unwrap(), 0.0);
        assert!(rel(triangle_bound_series(1e-4, 1e-4).unwrap(), 8e-4) < 1e-14);
        assert!(rel(triangle_bound_series(1e-4, 4e-4).unwrap(), 1.9e-3) < 1e-14);
        assert!(triangle_bound_series(-1.0, 0.0).is_err());
    }

    #[test]
    fn inf_reverse_values() {
        let b = inf_reverse_kl(1.0).unwrap();
        assert!(rel(b.value, INF_AT_1) < 1e-13);
        let expected = 0.5 * (1.0 / W2_AT_2 + W2_AT_2.ln() - 1.0);
        assert!(rel(b.value, expected) < 1e-13);
        assert!(b.extremal_eigenvalue.unwrap() >= 1.0);
        assert!(inf_reverse_kl(1e-12).unwrap().value < 1e-11);
        assert!(inf_reverse_kl(0.0).is_err());
        let m = sup_reverse_kl(0.5).unwrap().value;
        assert!(rel(inf_reverse_kl(m).unwrap().value, 0.5) < 1e-12);
    }

    #[test]
    fn nary_bounds() {
        assert_eq!(nary_sup_bound(0.0, 3).unwrap(), 3.0);
        assert_eq!(nary_inf_bound(0.0, 4).unwrap(), 4.0);
        let one = nary_sup_bound(1.0, 1).unwrap();
        assert!(rel(one, 1.0 + 2.0 * SUP_AT_HALF) < 1e-13);
        assert_eq!(nary_sup_bound(1.0, 7).unwrap(), one + 6.0);
        let one = nary_inf_bound(2.0, 1).unwrap();
        assert!(rel(one, 1.0 / W2_AT_2 + W2_AT_2.ln()) < 1e-13);
        assert_eq!(nary_inf_bound(2.0, 5).unwrap(), one + 4.0);
        assert!(nary_sup_bound(1.0, 0).is_err());
    }

    #[test]
    fn triangle_values() {
        let t = triangle_bound(0.0, 0.0).unwrap();
        assert_eq!(t.value, 0.0);
        assert!(t.strict);
        assert!(rel(triangle_bound(0.1, 0.2).unwrap().value, TRIANGLE_01_02) < 1e-12);
        assert!(rel(triangle_bound(1e-4, 1e-4).unwrap().value, TRIANGLE_1E_4) < 1e-10);
        for (a, b) in [(0.1, 0.2), (1.0, 0.01), (3.0, 5.0), (1e-6, 2.0)] {
            let x = triangle_bound(a, b).unwrap().value;
            let y = triangle_bound_lambert_form(a, b).unwrap();
            assert!(rel(x, y) <= 1e-10, "({a},{b}): {x} vs {y}");
        }
        assert!(triangle_bound(0.0, -1.0).is_err());
    }

    #[test]
    fn duality() {
        for m in [1e-3, 1.0, 20.0] {
            assert!(rel(dual_roundtrip(m).unwrap(), m) <= 1e-9, "M={m}");
        }
    }

    #[test]
    fn monotone_and_asymmetric() {
        let mut prev_sup = 0.0;
        let mut prev_inf = 0.0;
        for i in 0..=200 {
            let x = 10f64.powf(-6.0 + 7.7 * i as f64 / 200.0);
            let s = sup_reverse_kl(x).unwrap().value;
            let m = inf_reverse_kl(x).unwrap().value;
            assert!(s > prev_sup && m > prev_inf);
            assert!(s > x && m < x);
            prev_sup = s;
            prev_inf = m;
        }
    }
}
