//! Calculus of `f(x) = x - ln x` on `x > 0`.
//!
//! `f` is strictly convex with minimum `f(1) = 1`, so for every slack
//! `t >= 0` the level set `f(x) = 1 + t` has exactly two roots:
//!
//! * `w1(t) = -W₀(-e^{-(1+t)}) ∈ (0, 1]`
//! * `w2(t) = -W₋₁(-e^{-(1+t)}) ∈ [1, ∞)`
//!
//! Every divergence bound in [`crate::bounds`] is assembled from these two
//! functions. [`root_oracle`] solves the same equations by bisection alone
//! and serves as an independent check on the Lambert W route.

use crate::error::{domain, Error, Result};
use crate::lambert_w::{lambert_w, near_branch_point, Branch};

/// Above this slack `e^{-(1+t)}` is too close to underflow for the Lambert W
/// route and the fallbacks take over.
pub const LAMBERT_SLACK_LIMIT: f64 = 700.0;

/// A validated slack `t >= 0` above the minimum of `f`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct EpsilonBudget(f64);

impl EpsilonBudget {
    pub fn new(t: f64) -> Result<Self> {
        Self::checked(t, "epsilon budget")
    }

    fn checked(t: f64, what: &'static str) -> Result<Self> {
        if t.is_finite() && t >= 0.0 {
            Ok(Self(t))
        } else {
            Err(domain(what, t, "finite t >= 0"))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for EpsilonBudget {
    type Error = Error;

    fn try_from(t: f64) -> Result<Self> {
        Self::new(t)
    }
}

/// Which root of `f(x) = 1 + t` to locate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// The root in `(0, 1]`.
    Lower,
    /// The root in `[1, ∞)`.
    Upper,
}

fn positive(x: f64, what: &'static str) -> Result<f64> {
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(domain(what, x, "finite x > 0"))
    }
}

/// `f(x) = x - ln x`.
pub fn f(x: f64) -> Result<f64> {
    let x = positive(x, "f")?;
    Ok(x - x.ln())
}

/// `f'(x) = 1 - 1/x`.
pub fn f_prime(x: f64) -> Result<f64> {
    let x = positive(x, "f_prime")?;
    Ok(1.0 - 1.0 / x)
}

/// The smaller root of `f(x) = 1 + t`.
///
/// For `t` beyond [`LAMBERT_SLACK_LIMIT`] the root is `e^{w1 - (1+t)}`, which
/// is evaluated directly; once that underflows to zero an
/// [`Error::Underflow`] is returned instead of a meaningless `0`.
pub fn w1(t: f64) -> Result<f64> {
    let t = EpsilonBudget::checked(t, "w1")?.value();
    if t == 0.0 {
        return Ok(1.0);
    }
    if t <= LAMBERT_SLACK_LIMIT {
        // 1 + e·x = 1 - e^(-t) exactly; forming x first would round t away.
        if let Some(w) = near_branch_point(Branch::Principal, -(-t).exp_m1()) {
            return Ok(-w);
        }
        return Ok(-lambert_w(Branch::Principal, -(-(1.0 + t)).exp())?);
    }
    // w1 < 1e-304 here, so the fixed point w = exp(w - 1 - t) is reached in one step.
    let w = (-(1.0 + t)).exp();
    if w == 0.0 {
        Err(Error::Underflow {
            what: "w1",
            value: t,
        })
    } else {
        Ok(w)
    }
}

/// The larger root of `f(x) = 1 + t`. Falls back to bisection where the
/// Lambert W argument would underflow.
pub fn w2(t: f64) -> Result<f64> {
    let t = EpsilonBudget::checked(t, "w2")?.value();
    if t == 0.0 {
        return Ok(1.0);
    }
    if t <= LAMBERT_SLACK_LIMIT {
        // 1 + e·x = 1 - e^(-t) exactly; forming x first would round t away.
        if let Some(w) = near_branch_point(Branch::MinusOne, -(-t).exp_m1()) {
            return Ok(-w);
        }
        return Ok(-lambert_w(Branch::MinusOne, -(-(1.0 + t)).exp())?);
    }
    root_oracle(t, Side::Upper)
}

fn strictly_positive_slack(t: f64, what: &'static str) -> Result<f64> {
    if t > 0.0 && t.is_finite() {
        Ok(t)
    } else {
        Err(domain(what, t, "finite t > 0 (singular at t = 0)"))
    }
}

/// `w1'(t) = -w1 / (1 - w1)`; singular at `t = 0`.
pub fn w1_prime(t: f64) -> Result<f64> {
    let t = strictly_positive_slack(t, "w1_prime")?;
    let w = w1(t)?;
    Ok(-w / (1.0 - w))
}

/// `w2'(t) = -w2 / (1 - w2)`; singular at `t = 0`.
pub fn w2_prime(t: f64) -> Result<f64> {
    let t = strictly_positive_slack(t, "w2_prime")?;
    let w = w2(t)?;
    Ok(-w / (1.0 - w))
}

/// Solves `f(x) = 1 + t` by bisection only.
///
/// The lower root is bracketed in log space, `ln x ∈ [-(2+t), 0]`, so the
/// search keeps full relative precision even when the root is far below the
/// smallest normal double. The upper root is bracketed by
/// `[1, 2 + 2t + 2 ln(2 + 2t) + 10]`.
pub fn root_oracle(t: f64, side: Side) -> Result<f64> {
    let t = EpsilonBudget::checked(t, "root_oracle")?.value();
    if t == 0.0 {
        return Ok(1.0);
    }
    let level = 1.0 + t;
    match side {
        Side::Lower => {
            // g(u) = eᵘ - u - level is decreasing on u <= 0.
            let g = |u: f64| u.exp() - u - level;
            let u = bisect(g, -(1.0 + level), 0.0);
            let x = u.exp();
            if x == 0.0 {
                return Err(Error::Underflow {
                    what: "root_oracle(lower)",
                    value: t,
                });
            }
            Ok(x)
        }
        Side::Upper => {
            let hi = 2.0 + 2.0 * t + 2.0 * (2.0 + 2.0 * t).ln() + 10.0;
            Ok(bisect(|x: f64| x - x.ln() - level, 1.0, hi))
        }
    }
}

/// Bisection of a monotone function with a sign change on `[lo, hi]`, run
/// until the midpoint is no longer representable between the endpoints.
fn bisect(g: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let lo_sign = g(lo).signum();
    for _ in 0..2200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let v = g(mid);
        if v == 0.0 {
            return mid;
        }
        if v.signum() == lo_sign {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // Return whichever endpoint lands closer to the level set.
    if g(lo).abs() <= g(hi).abs() {
        lo
    } else {
        hi
    }
}

/// `f_l(x) = f(1 - x) - 1` for `x ∈ [0, 1)`; the distance of the lower root from 1.
pub fn f_l(x: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&x) {
        return Err(domain("f_l", x, "0 <= x < 1"));
    }
    Ok(f(1.0 - x)? - 1.0)
}

/// `f_r(x) = f(1 + x) - 1` for `x >= 0`.
pub fn f_r(x: f64) -> Result<f64> {
    if !(x >= 0.0 && x.is_finite()) {
        return Err(domain("f_r", x, "finite x >= 0"));
    }
    Ok(f(1.0 + x)? - 1.0)
}

/// `g_l = f_l⁻¹`, i.e. `1 - w1(e)`.
pub fn g_l(e: f64) -> Result<f64> {
    EpsilonBudget::checked(e, "g_l")?;
    Ok(1.0 - w1(e)?)
}

/// `g_r = f_r⁻¹`, i.e. `w2(e) - 1`.
pub fn g_r(e: f64) -> Result<f64> {
    EpsilonBudget::checked(e, "g_r")?;
    Ok(w2(e)? - 1.0)
}

/// `g_l'(e) = 1 / (1 - w1(e)) - 1`.
pub fn g_l_prime(e: f64) -> Result<f64> {
    let e = strictly_positive_slack(e, "g_l_prime")?;
    Ok(1.0 / (1.0 - w1(e)?) - 1.0)
}

/// `g_r'(e) = 1 + 1 / (w2(e) - 1)`.
///
/// At `e = 0` this returns `f64::INFINITY`, the limit from the right. That
/// value is a sentinel rather than an error; callers that need a finite slope
/// must test for it.
pub fn g_r_prime(e: f64) -> Result<f64> {
    let e = EpsilonBudget::checked(e, "g_r_prime")?.value();
    if e == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(1.0 + 1.0 / (w2(e)? - 1.0))
}

/// `Δ(e) = f(1/w1(e)) - f(w1(e)) = 1/w1 - w1 + 2 ln w1`.
///
/// The excess of the reflected value over the level. It is zero at `e = 0`,
/// increasing and convex, which is what makes concentrating all slack in a
/// single coordinate optimal.
pub fn delta_sup(e: f64) -> Result<f64> {
    EpsilonBudget::checked(e, "delta_sup")?;
    let w = w1(e)?;
    Ok(1.0 / w - w + 2.0 * w.ln())
}

/// `Δ(M) = f(w2(M)) - f(1/w2(M)) = w2 - 1/w2 - 2 ln w2`.
pub fn delta_inf(m: f64) -> Result<f64> {
    EpsilonBudget::checked(m, "delta_inf")?;
    let w = w2(m)?;
    Ok(w - 1.0 / w - 2.0 * w.ln())
}

/// `S(t) = sup { f(1/x) : f(x) <= 1 + t } = f(1/w1(t))`.
pub fn scalar_sup_map(t: f64) -> Result<f64> {
    EpsilonBudget::checked(t, "scalar_sup_map")?;
    f(1.0 / w1(t)?)
}

/// `I(t) = inf { f(1/x) : f(x) >= 1 + t } = f(1/w2(t))`.
pub fn scalar_inf_map(t: f64) -> Result<f64> {
    EpsilonBudget::checked(t, "scalar_inf_map")?;
    f(1.0 / w2(t)?)
}

/// Both sides of the product identities
/// `f(a(t1)·a(t2)) = t1 + t2 + 2 + a(t1)a(t2) - a(t1) - a(t2)` for `a = w2`
/// (`upper`) and `a = w1` (`lower`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProductIdentity {
    pub upper: (f64, f64),
    pub lower: (f64, f64),
}

impl ProductIdentity {
    /// Largest `|left - right| / max(1, |left|)` over both identities.
    pub fn max_relative_gap(&self) -> f64 {
        [self.upper, self.lower]
            .iter()
            .map(|&(l, r)| (l - r).abs() / l.abs().max(1.0))
            .fold(0.0, f64::max)
    }
}

pub fn f_product_identity_check(t1: f64, t2: f64) -> Result<ProductIdentity> {
    EpsilonBudget::checked(t1, "f_product_identity_check")?;
    EpsilonBudget::checked(t2, "f_product_identity_check")?;
    let side = |a: f64, b: f64| -> Result<(f64, f64)> {
        Ok((f(a * b)?, t1 + t2 + 2.0 + a * b - a - b))
    };
    Ok(ProductIdentity {
        upper: side(w2(t1)?, w2(t2)?)?,
        lower: side(w1(t1)?, w1(t2)?)?,
    })
}
