//! Multivariate Gaussians, spectral factorization, affine maps and the
//! closed-form KL divergence.

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

/// Relative asymmetry tolerated (and averaged away) in a covariance.
pub const SYMMETRY_TOLERANCE: f64 = 1e-12;

/// Covariances worse conditioned than this are rejected.
pub const MAX_CONDITION: f64 = 1e12;

/// Negative KL values down to this magnitude are treated as round-off.
pub const KL_ROUNDOFF: f64 = 1e-10;

/// `N(mean, cov)` with a symmetric positive-definite covariance.
///
/// Immutable once built; the Cholesky factor of the covariance is kept
/// alongside it since every divergence needs it.
#[derive(Debug, Clone, PartialEq)]
pub struct Gaussian {
    mean: DVector<f64>,
    cov: DMatrix<f64>,
    chol: DMatrix<f64>,
}

/// Builds a validated Gaussian.
///
/// The covariance is symmetrized as `(Σ + Σᵀ)/2` when its relative asymmetry
/// is at most [`SYMMETRY_TOLERANCE`], and rejected otherwise.
pub fn make_gaussian(mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Gaussian> {
    let n = mean.len();
    if n == 0 {
        return Err(Error::InvalidArgument("dimension must be at least 1".into()));
    }
    if cov.nrows() != cov.ncols() {
        return Err(Error::DimensionMismatch {
            expected: cov.nrows(),
            found: cov.ncols(),
        });
    }
    if cov.nrows() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: cov.nrows(),
        });
    }
    if mean.iter().chain(cov.iter()).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }

    let scale = cov.amax();
    if scale == 0.0 {
        return Err(Error::NotPositiveDefinite);
    }
    let deviation = (&cov - cov.transpose()).amax() / scale;
    if deviation > SYMMETRY_TOLERANCE {
        return Err(Error::Asymmetric { deviation });
    }
    let cov = (&cov + cov.transpose()) * 0.5;

    let chol = Cholesky::new(cov.clone())
        .ok_or(Error::NotPositiveDefinite)?
        .unpack();

    let eig = cov.clone().symmetric_eigenvalues();
    let (lo, hi) = eig
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if lo <= 0.0 {
        return Err(Error::NotPositiveDefinite);
    }
    let condition = hi / lo;
    if condition > MAX_CONDITION {
        return Err(Error::IllConditioned {
            condition,
            limit: MAX_CONDITION,
        });
    }

    Ok(Gaussian { mean, cov, chol })
}

impl Gaussian {
    /// Builds a Gaussian whose covariance is known to be symmetric and
    /// well conditioned (e.g. a convex combination of validated covariances).
    /// Only the Cholesky factorization is checked.
    pub(crate) fn from_trusted(mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        let cov = (&cov + cov.transpose()) * 0.5;
        let chol = Cholesky::new(cov.clone())
            .ok_or(Error::NotPositiveDefinite)?
            .unpack();
        Ok(Gaussian { mean, cov, chol })
    }

    /// `N(0, Iₙ)`.
    pub fn standard(n: usize) -> Result<Self> {
        make_gaussian(DVector::zeros(n), DMatrix::identity(n, n))
    }

    /// Convenience constructor from row-major data.
    pub fn from_rows(mean: &[f64], cov_rows: &[Vec<f64>]) -> Result<Self> {
        for (i, row) in cov_rows.iter().enumerate() {
            if row.len() != cov_rows.len() {
                return Err(Error::Parse(format!(
                    "cov row {i} has {} entries, expected {}",
                    row.len(),
                    cov_rows.len()
                )));
            }
        }
        let m = cov_rows.len();
        let cov = DMatrix::from_fn(m, m, |i, j| cov_rows[i][j]);
        make_gaussian(DVector::from_column_slice(mean), cov)
    }

    /// `N(mean, diag(variances))`.
    pub fn diagonal(mean: &[f64], variances: &[f64]) -> Result<Self> {
        if mean.len() != variances.len() {
            return Err(Error::DimensionMismatch {
                expected: mean.len(),
                found: variances.len(),
            });
        }
        make_gaussian(
            DVector::from_column_slice(mean),
            DMatrix::from_diagonal(&DVector::from_column_slice(variances)),
        )
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }

    /// Lower-triangular `L` with `LLᵀ = Σ`.
    pub fn cholesky_factor(&self) -> &DMatrix<f64> {
        &self.chol
    }

    /// `ln det Σ` from the Cholesky diagonal.
    pub fn log_det(&self) -> f64 {
        2.0 * self.chol.diagonal().iter().map(|d| d.ln()).sum::<f64>()
    }

    /// Eigen-factorization of the covariance.
    pub fn spectral(&self) -> Result<Spectrum> {
        spectral(self)
    }
}

/// `Σ = P diag(λ) Pᵀ` with eigenvalues in decreasing order.
///
/// Each eigenvector is oriented so its largest-magnitude entry is positive,
/// which makes the frame of a diagonal covariance a permutation matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub frame: DMatrix<f64>,
    pub eigenvalues: DVector<f64>,
}

impl Spectrum {
    /// `P diag(λ) Pᵀ`.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        &self.frame * DMatrix::from_diagonal(&self.eigenvalues) * self.frame.transpose()
    }
}

/// Symmetric eigen-decomposition with eigenvalues sorted decreasingly.
pub fn symmetric_spectrum(m: &DMatrix<f64>) -> Result<Spectrum> {
    let n = m.nrows();
    let SymmetricEigen {
        eigenvectors,
        eigenvalues,
    } = SymmetricEigen::try_new(m.clone(), f64::EPSILON, 10_000)
        .ok_or_else(|| Error::Numerical("symmetric eigen-decomposition did not converge".into()))?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eigenvalues[b].total_cmp(&eigenvalues[a]));

    let mut frame = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let mut col = eigenvectors.column(src).clone_owned();
        let pivot = col.iamax();
        if col[pivot] < 0.0 {
            col.neg_mut();
        }
        frame.set_column(dst, &col);
    }
    let eigenvalues = DVector::from_iterator(n, order.iter().map(|&i| eigenvalues[i]));
    Ok(Spectrum { frame, eigenvalues })
}

pub fn spectral(g: &Gaussian) -> Result<Spectrum> {
    symmetric_spectrum(&g.cov)
}

/// Upper limit on the condition number of an [`AffineMap`]'s linear part.
pub const MAX_MAP_CONDITION: f64 = 1e14;

/// `x ↦ A x + b` with `A` invertible.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineMap {
    linear: DMatrix<f64>,
    offset: DVector<f64>,
    condition: f64,
}

impl AffineMap {
    pub fn new(linear: DMatrix<f64>, offset: DVector<f64>) -> Result<Self> {
        let n = linear.nrows();
        if linear.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: linear.ncols(),
            });
        }
        if offset.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: offset.len(),
            });
        }
        if linear.iter().chain(offset.iter()).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        let sv = linear.clone().singular_values();
        let (lo, hi) = sv
            .iter()
            .fold((f64::INFINITY, 0.0f64), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        let condition = if lo > 0.0 { hi / lo } else { f64::INFINITY };
        if !(condition <= MAX_MAP_CONDITION) {
            return Err(Error::IllConditioned {
                condition,
                limit: MAX_MAP_CONDITION,
            });
        }
        Ok(Self {
            linear,
            offset,
            condition,
        })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            linear: DMatrix::identity(n, n),
            offset: DVector::zeros(n),
            condition: 1.0,
        }
    }

    pub fn dim(&self) -> usize {
        self.offset.len()
    }

    pub fn linear(&self) -> &DMatrix<f64> {
        &self.linear
    }

    pub fn offset(&self) -> &DVector<f64> {
        &self.offset
    }

    /// Ratio of extreme singular values of the linear part.
    pub fn condition(&self) -> f64 {
        self.condition
    }

    pub fn apply_point(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.linear * x + &self.offset
    }

    /// `x ↦ A⁻¹(x - b)`.
    pub fn inverse(&self) -> Result<Self> {
        let inv = self
            .linear
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::Numerical("affine map is singular".into()))?;
        let offset = -(&inv * &self.offset);
        Self::new(inv, offset)
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &AffineMap) -> Result<Self> {
        if self.dim() != inner.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: inner.dim(),
            });
        }
        Self::new(
            &self.linear * &inner.linear,
            &self.linear * &inner.offset + &self.offset,
        )
    }
}

/// Push-forward of `g` through `map`: `N(Aμ + b, AΣAᵀ)`.
pub fn apply_affine(map: &AffineMap, g: &Gaussian) -> Result<Gaussian> {
    if map.dim() != g.dim() {
        return Err(Error::DimensionMismatch {
            expected: g.dim(),
            found: map.dim(),
        });
    }
    let mean = map.apply_point(&g.mean);
    let cov = &map.linear * &g.cov * map.linear.transpose();
    let cov = (&cov + cov.transpose()) * 0.5;
    make_gaussian(mean, cov)
}

/// The map `x ↦ B⁻¹(x - μ)` with `B = P D^{1/2}`, which sends `g` to `N(0, I)`.
pub fn whitening_map(g: &Gaussian) -> Result<AffineMap> {
    let Spectrum { frame, eigenvalues } = spectral(g)?;
    let inv_sqrt = eigenvalues.map(|l| 1.0 / l.sqrt());
    let linear = DMatrix::from_diagonal(&inv_sqrt) * frame.transpose();
    let offset = -(&linear * &g.mean);
    AffineMap::new(linear, offset)
}

/// `KL(g1 ‖ g2)` in nats.
///
/// `½(ln det Σ₂/det Σ₁ + tr(Σ₂⁻¹Σ₁) + (μ₂-μ₁)ᵀΣ₂⁻¹(μ₂-μ₁) - n)`, evaluated
/// through triangular solves against the Cholesky factor of `Σ₂`.
pub fn kl(g1: &Gaussian, g2: &Gaussian) -> Result<f64> {
    let n = g1.dim();
    if g2.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: g2.dim(),
        });
    }
    let l2 = &g2.chol;
    let whitened = l2
        .solve_lower_triangular(&g1.chol)
        .ok_or_else(|| Error::Numerical("triangular solve failed".into()))?;
    let trace = whitened.norm_squared();
    let shift = l2
        .solve_lower_triangular(&(&g2.mean - &g1.mean))
        .ok_or_else(|| Error::Numerical("triangular solve failed".into()))?;
    let mahalanobis = shift.norm_squared();
    let log_det_ratio = g2.log_det() - g1.log_det();

    let value = 0.5 * (log_det_ratio + trace + mahalanobis - n as f64);
    if value >= 0.0 {
        Ok(value)
    } else if value >= -KL_ROUNDOFF {
        Ok(0.0)
    } else {
        Err(Error::Numerical(format!("KL evaluated to {value:e}")))
    }
}

/// `KL(N(μ, Σ) ‖ N(0, I)) = ½(-ln det Σ + tr Σ + μᵀμ - n)`.
pub fn kl_to_standard(g: &Gaussian) -> f64 {
    0.5 * (-g.log_det() + g.cov.trace() + g.mean.norm_squared() - g.dim() as f64)
}
