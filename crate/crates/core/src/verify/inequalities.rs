//! Grid and sampled checks of the scalar inequalities, the allocation
//! inequality behind the triangle bound, and the trace inequality for SPD
//! matrices.

use rand::Rng;

use super::report::VerificationReport;
use super::sampling::{random_spd_with, rng_from, trial_seed};
use super::{cell_label, Sense, TrialRecord};
use crate::bounds::{nary_inf_bound, nary_sup_bound};
use crate::error::{Error, Result};
use crate::gaussian::symmetric_spectrum;
use crate::lambert_w::{lambert_w, Branch};
use crate::scalar::{
    delta_inf, delta_sup, f, f_prime, f_product_identity_check, g_l, g_r, root_oracle,
    scalar_inf_map, scalar_sup_map, w1, w1_prime, w2, w2_prime, Side,
};

/// Tolerance for purely scalar comparisons.
const SCALAR_TOL: f64 = 1e-10;

fn scaled(tol: f64, v: f64) -> f64 {
    tol * v.abs().max(1.0)
}

/// `w2` with arguments that rounding pushed a hair below zero clamped to 0.
fn w2_clamped(t: f64) -> Result<f64> {
    w2(t.max(0.0))
}

/// Four budgets split into a larger and a smaller part per coordinate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AllocationObjective {
    pub eps_x1: f64,
    pub eps_x2: f64,
    pub eps_y1: f64,
    pub eps_y2: f64,
}

impl AllocationObjective {
    pub fn new(eps_x1: f64, eps_x2: f64, eps_y1: f64, eps_y2: f64) -> Result<Self> {
        let all = [eps_x1, eps_x2, eps_y1, eps_y2];
        if all.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::InvalidArgument(format!("budgets {all:?} must be finite and >= 0")));
        }
        if eps_x1 < eps_x2 || eps_y1 < eps_y2 {
            return Err(Error::InvalidArgument(format!(
                "budgets {all:?} need eps_x1 >= eps_x2 and eps_y1 >= eps_y2"
            )));
        }
        Ok(Self {
            eps_x1,
            eps_x2,
            eps_y1,
            eps_y2,
        })
    }

    /// Admissible interval of `θx`; collapses to `[0, 0]` when `eps_x2 = 0`.
    pub fn theta_x_range(&self) -> (f64, f64) {
        theta_range(self.eps_x1, self.eps_x2)
    }

    pub fn theta_y_range(&self) -> (f64, f64) {
        theta_range(self.eps_y1, self.eps_y2)
    }

    /// `f(w2(εx1 + θx εx2) w2(εy1 + θy εy2)) + f(w2((1-θx) εx2) w2((1-θy) εy2))`.
    pub fn value(&self, theta_x: f64, theta_y: f64) -> Result<f64> {
        let admissible = |t: f64, (lo, hi): (f64, f64)| t >= lo && t <= hi;
        if !(admissible(theta_x, self.theta_x_range()) || self.eps_x2 == 0.0)
            || !(admissible(theta_y, self.theta_y_range()) || self.eps_y2 == 0.0)
        {
            return Err(Error::InvalidArgument(format!(
                "allocation ({theta_x}, {theta_y}) outside the admissible box"
            )));
        }
        let a = w2_clamped(self.eps_x1 + theta_x * self.eps_x2)?;
        let b = w2_clamped(self.eps_y1 + theta_y * self.eps_y2)?;
        let c = w2_clamped((1.0 - theta_x) * self.eps_x2)?;
        let d = w2_clamped((1.0 - theta_y) * self.eps_y2)?;
        Ok(f(a * b)? + f(c * d)?)
    }

    /// Both second budgets are zero, so the value does not depend on θ.
    pub fn is_trivial(&self) -> bool {
        self.eps_x2 == 0.0 && self.eps_y2 == 0.0
    }
}

fn theta_range(e1: f64, e2: f64) -> (f64, f64) {
    if e2 > 0.0 {
        (-e1 / e2, 1.0)
    } else {
        (0.0, 0.0)
    }
}

/// All ordered tuples `(x1 >= x2, y1 >= y2)` drawn from `values`.
pub fn allocation_grid(values: &[f64]) -> Result<Vec<AllocationObjective>> {
    let mut pairs = Vec::new();
    for &a in values {
        for &b in values {
            if a >= b {
                pairs.push((a, b));
            }
        }
    }
    let mut grid = Vec::with_capacity(pairs.len() * pairs.len());
    for &(x1, x2) in &pairs {
        for &(y1, y2) in &pairs {
            grid.push(AllocationObjective::new(x1, x2, y1, y2)?);
        }
    }
    Ok(grid)
}

fn linspace(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |i| {
        if n == 1 || i == 0 {
            lo
        } else if i == n - 1 {
            hi
        } else {
            lo + (hi - lo) * i as f64 / (n - 1) as f64
        }
    })
}

/// For every tuple: `S(0,0) <= S(1,1)` (exact equality when both second
/// budgets are zero), and `S(θx, θy) <= S(1,1)` over a `theta_points²` scan
/// of the admissible box. Tolerance `1e-10·max(1, S(1,1))`.
pub fn check_allocation_inequality(grid: &[AllocationObjective], theta_points: usize) -> Result<VerificationReport> {
    use rayon::prelude::*;
    if theta_points < 2 {
        return Err(Error::InvalidArgument("theta_points must be >= 2".into()));
    }
    let per_tuple: Vec<Result<[TrialRecord; 2]>> = grid
        .par_iter()
        .enumerate()
        .map(|(i, obj)| {
            let label = cell_label(&[obj.eps_x1, obj.eps_x2, obj.eps_y1, obj.eps_y2]);
            let top = obj.value(1.0, 1.0)?;
            let tol = scaled(SCALAR_TOL, top);
            let (sense, base_tol) = if obj.is_trivial() {
                (Sense::Equal, 0.0)
            } else {
                (Sense::Upper, tol)
            };
            let constraint = obj.eps_x1 + obj.eps_x2;
            let second = obj.eps_y1 + obj.eps_y2;
            let base = TrialRecord::new(
                label.clone(),
                2 * i,
                0,
                1,
                constraint,
                obj.value(0.0, 0.0)?,
                top,
                sense,
                base_tol,
            )
            .with_second_constraint(second);

            let (xl, xh) = obj.theta_x_range();
            let (yl, yh) = obj.theta_y_range();
            let nx = if xl == xh { 1 } else { theta_points };
            let ny = if yl == yh { 1 } else { theta_points };
            let mut worst = f64::NEG_INFINITY;
            for tx in linspace(xl, xh, nx) {
                for ty in linspace(yl, yh, ny) {
                    worst = worst.max(obj.value(tx, ty)?);
                }
            }
            let scan = TrialRecord::new(label, 2 * i + 1, 0, 1, constraint, worst, top, Sense::Upper, tol)
                .with_second_constraint(second);
            Ok([base, scan])
        })
        .collect();
    let mut records = Vec::with_capacity(2 * grid.len());
    for r in per_tuple {
        records.extend(r?);
    }
    Ok(VerificationReport::from_records("allocation", 0, SCALAR_TOL, 0.0, records, vec![]))
}

/// `Tr(AB) <= Σ λ_A[i] λ_B[i]` (eigenvalues sorted decreasingly) on random
/// SPD pairs, tolerance `1e-8` relative to the right-hand side.
pub fn check_trace_inequality(dim: usize, trials: usize, master_seed: u64) -> Result<VerificationReport> {
    use rayon::prelude::*;
    const TOL: f64 = 1e-8;
    if dim == 0 || trials == 0 {
        return Err(Error::InvalidArgument("dim and trials must be >= 1".into()));
    }
    let records: Result<Vec<TrialRecord>> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let seed = trial_seed(master_seed, dim as u64, trial as u64);
            let mut rng = rng_from(seed);
            let a = random_spd_with(&mut rng, dim, (-2.0, 2.0));
            let b = random_spd_with(&mut rng, dim, (-2.0, 2.0));
            let observed = (&a * &b).trace();
            let la = symmetric_spectrum(&a)?.eigenvalues;
            let lb = symmetric_spectrum(&b)?.eigenvalues;
            let bound = la.dot(&lb);
            Ok(TrialRecord::new(
                cell_label(&[dim as f64]),
                trial,
                seed,
                dim,
                0.0,
                observed,
                bound,
                Sense::Upper,
                scaled(TOL, bound),
            ))
        })
        .collect();
    Ok(VerificationReport::from_records("trace", master_seed, TOL, 0.0, records?, vec![]))
}

/// Grid sizes for [`check_scalar_inequalities`].
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarGrid {
    /// Points of the log grid on `[1e-6, 1e6]` used for properties of `f`.
    pub x_points: usize,
    /// Largest slack `t` and number of grid points on `[0, t_max]`.
    pub t_max: f64,
    pub t_points: usize,
    /// Points per axis of the `(εx, εy)` grid on `[0, product_eps_max]²`.
    pub product_eps_max: f64,
    pub product_points: usize,
    /// Random `(x, y)` samples per product-grid cell.
    pub product_samples: usize,
    /// Points of the log grid on `[series_eps_min, series_eps_max]`.
    pub series_eps_min: f64,
    pub series_eps_max: f64,
    pub series_points: usize,
    pub seed: u64,
}

impl Default for ScalarGrid {
    fn default() -> Self {
        Self {
            x_points: 2001,
            t_max: 50.0,
            t_points: 1001,
            product_eps_max: 5.0,
            product_points: 21,
            product_samples: 20,
            series_eps_min: 1e-8,
            series_eps_max: 1e-2,
            series_points: 61,
            seed: 0,
        }
    }
}

impl ScalarGrid {
    fn validate(&self) -> Result<()> {
        let ok = self.x_points >= 2
            && self.t_points >= 2
            && self.product_points >= 2
            && self.series_points >= 2
            && self.t_max.is_finite()
            && self.t_max > 0.0
            && self.t_max <= 700.0
            && self.product_eps_max.is_finite()
            && self.product_eps_max > 0.0
            && self.series_eps_min > 0.0
            && self.series_eps_min < self.series_eps_max
            && self.series_eps_max <= 1e-2;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("malformed scalar grid {self:?}")))
        }
    }
}

fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

/// Collects records with a running trial index.
struct Recorder {
    records: Vec<TrialRecord>,
}

impl Recorder {
    fn push(&mut self, check: &str, param: f64, observed: f64, bound: f64, sense: Sense, tol: f64) {
        let trial = self.records.len();
        self.records
            .push(TrialRecord::new(check, trial, 0, 1, param, observed, bound, sense, tol));
    }

    fn push2(&mut self, check: &str, p: (f64, f64), observed: f64, bound: f64, sense: Sense, tol: f64) {
        self.push(check, p.0, observed, bound, sense, tol);
        if let Some(last) = self.records.last_mut() {
            last.constraint_value_2 = Some(p.1);
        }
    }
}

/// Central difference with step `1e-6·t`.
fn central_difference(g: impl Fn(f64) -> Result<f64>, t: f64) -> Result<f64> {
    let h = 1e-6 * t;
    Ok((g(t + h)? - g(t - h)?) / (2.0 * h))
}

/// Runs every scalar inequality and identity on the grids of `grid`.
///
/// Each record's `cell` names the property being checked.
pub fn check_scalar_inequalities(grid: &ScalarGrid) -> Result<VerificationReport> {
    grid.validate()?;
    let mut rec = Recorder { records: Vec::new() };
    let xs = log_grid(1e-6, 1e6, grid.x_points);
    let ts: Vec<f64> = linspace(0.0, grid.t_max, grid.t_points).collect();
    let positive_ts: Vec<f64> = log_grid(1e-6, grid.t_max, grid.t_points);

    // f has minimum 1, attained only at 1, and is convex.
    for &x in &xs {
        let v = f(x)?;
        rec.push("f_minimum", x, v, 1.0, Sense::Lower, 1e-15);
        if (x - 1.0).abs() > 1e-3 {
            rec.push("f_minimum_strict", x, 0.0, v - 1.0, Sense::StrictUpper, 0.0);
        }
        let h = 1e-3 * x;
        let second = f(x - h)? - 2.0 * v + f(x + h)?;
        rec.push("f_convexity", x, second, 0.0, Sense::Lower, 0.0);
    }
    // Reflection x -> 1/x lowers f above 1 and raises it below 1.
    for &x in &xs {
        if x > 1.0 {
            rec.push("reflection_order", x, f(x)?, f(1.0 / x)?, Sense::Lower, 0.0);
        } else if x < 1.0 {
            rec.push("reflection_order", x, f(x)?, f(1.0 / x)?, Sense::Upper, 0.0);
        }
    }
    // Lambert-W roots against the bisection oracle, and as roots of f.
    for &t in &ts {
        let (a, b) = (w1(t)?, w2(t)?);
        let (oa, ob) = (root_oracle(t, Side::Lower)?, root_oracle(t, Side::Upper)?);
        rec.push("w1_oracle", t, a, oa, Sense::Equal, SCALAR_TOL * oa);
        rec.push("w2_oracle", t, b, ob, Sense::Equal, SCALAR_TOL * ob);
        rec.push("w1_root", t, f(a)?, 1.0 + t, Sense::Equal, 1e-12 * (1.0 + t));
        rec.push("w2_root", t, f(b)?, 1.0 + t, Sense::Equal, 1e-12 * (1.0 + t));
        rec.push("w1_range", t, a, 1.0, Sense::Upper, 0.0);
        rec.push("w2_range", t, b, 1.0, Sense::Lower, 0.0);
    }
    // Derivatives of the roots against finite differences.
    for &t in positive_ts.iter().filter(|&&t| t >= 1e-4) {
        let d1 = w1_prime(t)?;
        let d2 = w2_prime(t)?;
        rec.push("w1_derivative", t, d1, central_difference(w1, t)?, Sense::Equal, 1e-5 * d1.abs());
        rec.push("w2_derivative", t, d2, central_difference(w2, t)?, Sense::Equal, 1e-5 * d2.abs());
        rec.push("w1_decreasing", t, d1, 0.0, Sense::StrictUpper, 0.0);
        rec.push("w2_increasing", t, 0.0, d2, Sense::StrictUpper, 0.0);
    }
    // Reflected roots: f(w1) < f(1/w1) and f(1/w2) < f(w2) for t > 0;
    // slope comparison f'(w2) <= -f'(1/w2).
    for &t in &positive_ts {
        let (a, b) = (w1(t)?, w2(t)?);
        rec.push("lower_reflection", t, f(a)?, f(1.0 / a)?, Sense::StrictUpper, 0.0);
        rec.push("upper_reflection", t, f(1.0 / b)?, f(b)?, Sense::StrictUpper, 0.0);
        rec.push("slope_comparison", t, f_prime(b)?, -f_prime(1.0 / b)?, Sense::Upper, SCALAR_TOL);
    }
    // Product identities for w2·w2 and w1·w1.
    let coarse: Vec<f64> = linspace(0.0, grid.t_max, 26).collect();
    for &t1 in &coarse {
        for &t2 in &coarse {
            let id = f_product_identity_check(t1, t2)?;
            let (l, r) = id.upper;
            rec.push2("product_identity_upper", (t1, t2), l, r, Sense::Equal, scaled(SCALAR_TOL, l));
            let (l, r) = id.lower;
            rec.push2("product_identity_lower", (t1, t2), l, r, Sense::Equal, scaled(SCALAR_TOL, l));
        }
    }
    // The upper slack exceeds the lower one: w2 - 1 >= 1 - w1.
    for &e in &ts {
        rec.push("slack_asymmetry", e, g_r(e)?, g_l(e)?, Sense::Lower, 0.0);
    }
    // Sup / inf of f(1/x) under a constraint on f(x).
    let mut rng = rng_from(trial_seed(grid.seed, 1, 0));
    for &t in coarse.iter().skip(1) {
        let (a, b) = (w1(t)?, w2(t)?);
        let (s, i) = (scalar_sup_map(t)?, scalar_inf_map(t)?);
        for k in 0..grid.product_samples {
            let inside = if k == 0 { a } else { rng.random_range(a..=b) };
            rec.push("sup_map", t, f(1.0 / inside)?, s, Sense::Upper, scaled(SCALAR_TOL, s));
            let outside = match k {
                0 => b,
                1 => a,
                _ if k % 2 == 0 => b * (1.0 + rng.random_range(0.0..3.0f64)),
                _ => a * rng.random_range(1e-3..1.0f64),
            };
            rec.push("inf_map", t, f(1.0 / outside)?, i, Sense::Lower, scaled(SCALAR_TOL, i));
        }
    }
    // f(xy) <= f(w2(εx) w2(εy)) whenever f(x) <= 1 + εx and f(y) <= 1 + εy.
    let eps: Vec<f64> = linspace(0.0, grid.product_eps_max, grid.product_points).collect();
    for &ex in &eps {
        for &ey in &eps {
            let (xl, xh, yl, yh) = (w1(ex)?, w2(ex)?, w1(ey)?, w2(ey)?);
            let bound = f(xh * yh)?;
            let tol = scaled(SCALAR_TOL, bound);
            let corners = [(xl, yl), (xl, yh), (xh, yl), (xh, yh)];
            for &(x, y) in &corners {
                rec.push2("product_level", (ex, ey), f(x * y)?, bound, Sense::Upper, tol);
            }
            for _ in 0..grid.product_samples {
                let x = if xl < xh { rng.random_range(xl..=xh) } else { xl };
                let y = if yl < yh { rng.random_range(yl..=yh) } else { yl };
                rec.push2("product_level", (ex, ey), f(x * y)?, bound, Sense::Upper, tol);
            }
        }
    }
    // Δ(t e) <= t Δ(e) for both Δ functions, plus monotonicity and midpoint
    // convexity along the grid.
    let scales = [0.0, 0.1, 0.25, 0.5, 0.75, 0.9, 0.99];
    for &e in positive_ts.iter().step_by(10) {
        let (ds, di) = (delta_sup(e)?, delta_inf(e)?);
        for &s in &scales {
            rec.push2("delta_sup_scaling", (e, s), delta_sup(s * e)?, s * ds, Sense::Upper, scaled(SCALAR_TOL, ds));
            rec.push2("delta_inf_scaling", (e, s), delta_inf(s * e)?, s * di, Sense::Upper, scaled(SCALAR_TOL, di));
        }
    }
    for win in positive_ts.windows(3) {
        let (a, c) = (win[0], win[2]);
        let mid = 0.5 * (a + c);
        for (name, d) in [("delta_sup", delta_sup as fn(f64) -> Result<f64>), ("delta_inf", delta_inf)] {
            let (da, dc, dm) = (d(a)?, d(c)?, d(mid)?);
            let tol = scaled(SCALAR_TOL, dc);
            rec.push(&format!("{name}_increasing"), a, da, dc, Sense::Upper, tol);
            rec.push(&format!("{name}_convexity"), mid, dm, 0.5 * (da + dc), Sense::Upper, tol);
        }
    }
    // Splitting a budget across coordinates never beats concentrating it.
    for &total in coarse.iter().skip(1) {
        for n in [2usize, 3, 5] {
            let sup = nary_sup_bound(total, n)?;
            let inf = nary_inf_bound(total, n)?;
            for _ in 0..grid.product_samples {
                let mut weights: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..1.0f64)).collect();
                let sum: f64 = weights.iter().sum();
                weights.iter_mut().for_each(|w| *w *= total / sum);
                let mut s = 0.0;
                let mut i = 0.0;
                for &part in &weights {
                    s += f(1.0 / w1(part)?)?;
                    i += f(1.0 / w2(part)?)?;
                }
                rec.push2("nary_sup_allocation", (total, n as f64), s, sup, Sense::Upper, scaled(SCALAR_TOL, sup));
                rec.push2("nary_inf_allocation", (total, n as f64), i, inf, Sense::Lower, scaled(SCALAR_TOL, inf));
            }
        }
    }
    // Branch-point expansion of the lower root: W₀(-e^{-(1+2ε)}) against
    // -1 + 2√ε - (4/3)ε, residual at most ε^{3/2}.
    for &e in &log_grid(grid.series_eps_min, grid.series_eps_max, grid.series_points) {
        let exact = -w1(2.0 * e)?;
        let direct = lambert_w(Branch::Principal, -(-(1.0 + 2.0 * e)).exp())?;
        let series = -1.0 + 2.0 * e.sqrt() - 4.0 / 3.0 * e;
        let residual = (exact - series).abs();
        rec.push("branch_series_residual", e, residual, e.powf(1.5), Sense::Upper, 0.0);
        // Cross-check the direct Lambert call, limited by the rounding of its argument.
        rec.push("branch_series_direct", e, direct, exact, Sense::Equal, 1e-15 / e.sqrt());
    }
    Ok(VerificationReport::from_records("scalar", grid.seed, SCALAR_TOL, 0.0, rec.records, vec![]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn allocation_examples() {
        let trivial = AllocationObjective::new(2.0, 0.0, 3.0, 0.0).unwrap();
        assert_eq!(trivial.value(0.0, 0.0).unwrap(), trivial.value(1.0, 1.0).unwrap());
        for (a, b, c, d) in [(1.0, 1.0, 1.0, 1.0), (5.0, 0.5, 3.0, 3.0)] {
            let s = AllocationObjective::new(a, b, c, d).unwrap();
            assert!(s.value(0.0, 0.0).unwrap() <= s.value(1.0, 1.0).unwrap() + 1e-10);
        }
        assert!(AllocationObjective::new(0.5, 1.0, 0.0, 0.0).is_err());
        let s = AllocationObjective::new(1.0, 1.0, 1.0, 1.0).unwrap();
        assert!(s.value(-2.0, 0.0).is_err());
    }

    #[test]
    fn small_allocation_grid_passes() {
        let grid = allocation_grid(&[0.0, 0.1, 1.0, 3.0]).unwrap();
        assert_eq!(grid.len(), 100);
        let r = check_allocation_inequality(&grid, 5).unwrap();
        assert!(r.passed(), "{}", r.summary());
        assert!(r.trials.iter().any(|t| t.sense == Sense::Equal));
    }

    #[test]
    fn trace_inequality_small() {
        let r = check_trace_inequality(4, 200, 1).unwrap();
        assert!(r.passed(), "{}", r.summary());
        assert!(check_trace_inequality(0, 1, 1).is_err());
    }

    #[test]
    fn scalar_suite_default_grid() {
        let r = check_scalar_inequalities(&ScalarGrid::default()).unwrap();
        let bad: Vec<_> = r.trials.iter().filter(|t| t.is_violation()).take(5).collect();
        assert!(r.passed(), "{}: {bad:?}", r.summary());
    }

    #[test]
    fn delta_scaling_example() {
        assert!(delta_sup(1.0).unwrap() <= 0.5 * delta_sup(2.0).unwrap());
    }

    #[test]
    fn malformed_grid() {
        let g = ScalarGrid {
            t_points: 1,
            ..ScalarGrid::default()
        };
        assert!(matches!(check_scalar_inequalities(&g), Err(Error::InvalidArgument(_))));
    }
}
