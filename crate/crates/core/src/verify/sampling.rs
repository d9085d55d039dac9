use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::gaussian::{make_gaussian, AffineMap, Gaussian};

/// Log-eigenvalue ranges must lie inside this interval.
pub const LOG_EIGEN_LIMIT: f64 = 6.0;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of trial `trial` in cell `cell`, a pure function of its arguments.
pub fn trial_seed(master: u64, cell: u64, trial: u64) -> u64 {
    splitmix64(splitmix64(master ^ splitmix64(cell)).wrapping_add(trial))
}

pub(crate) fn rng_from(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn check_range(range: (f64, f64)) -> Result<()> {
    let (lo, hi) = range;
    if !(lo.is_finite() && hi.is_finite() && lo <= hi && -LOG_EIGEN_LIMIT <= lo && hi <= LOG_EIGEN_LIMIT) {
        return Err(Error::InvalidArgument(format!(
            "log-eigenvalue range [{lo}, {hi}] must be ordered and inside [-6, 6]"
        )));
    }
    Ok(())
}

/// Haar-distributed orthogonal matrix: QR of a Gaussian matrix with the
/// signs of `diag(R)` folded into `Q`.
pub(crate) fn random_orthogonal<R: Rng>(rng: &mut R, n: usize) -> DMatrix<f64> {
    let a = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = a.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

fn log_uniform<R: Rng>(rng: &mut R, (lo, hi): (f64, f64)) -> f64 {
    if lo == hi {
        lo.exp()
    } else {
        rng.random_range(lo..hi).exp()
    }
}

pub(crate) fn random_spd_with<R: Rng>(rng: &mut R, dim: usize, range: (f64, f64)) -> DMatrix<f64> {
    let q = random_orthogonal(rng, dim);
    let eig = DVector::from_fn(dim, |_, _| log_uniform(rng, range));
    let m = &q * DMatrix::from_diagonal(&eig) * q.transpose();
    (&m + m.transpose()) * 0.5
}

/// Random SPD matrix with log-uniform eigenvalues in `exp(range)` and a
/// random orthogonal frame. Deterministic in its arguments.
pub fn random_spd(dim: usize, seed: u64, log_eig_range: (f64, f64)) -> Result<DMatrix<f64>> {
    if dim == 0 {
        return Err(Error::InvalidArgument("dimension must be at least 1".into()));
    }
    check_range(log_eig_range)?;
    Ok(random_spd_with(&mut rng_from(seed), dim, log_eig_range))
}

pub(crate) fn random_gaussian_with<R: Rng>(
    rng: &mut R,
    dim: usize,
    range: (f64, f64),
    mean_scale: f64,
) -> Result<Gaussian> {
    let cov = random_spd_with(rng, dim, range);
    let mean = DVector::from_fn(dim, |_, _| mean_scale * rng.sample::<f64, _>(StandardNormal));
    make_gaussian(mean, cov)
}

/// Random Gaussian: covariance from [`random_spd`], mean with independent
/// `N(0, mean_scale²)` entries.
pub fn random_gaussian(dim: usize, seed: u64, log_eig_range: (f64, f64), mean_scale: f64) -> Result<Gaussian> {
    if dim == 0 {
        return Err(Error::InvalidArgument("dimension must be at least 1".into()));
    }
    check_range(log_eig_range)?;
    random_gaussian_with(&mut rng_from(seed), dim, log_eig_range, mean_scale)
}

pub(crate) fn random_affine_with<R: Rng>(rng: &mut R, dim: usize) -> Result<AffineMap> {
    let left = random_orthogonal(rng, dim);
    let right = random_orthogonal(rng, dim);
    let sv = DVector::from_fn(dim, |_, _| rng.random_range(-1.0..1.0f64).exp());
    let linear = left * DMatrix::from_diagonal(&sv) * right.transpose();
    let offset = DVector::from_fn(dim, |_, _| rng.sample::<f64, _>(StandardNormal));
    AffineMap::new(linear, offset)
}

/// Random invertible affine map with singular values in `[e⁻¹, e]`
/// (condition number at most `e²`) and a standard-normal offset.
pub fn random_affine(dim: usize, seed: u64) -> Result<AffineMap> {
    if dim == 0 {
        return Err(Error::InvalidArgument("dimension must be at least 1".into()));
    }
    random_affine_with(&mut rng_from(seed), dim)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::symmetric_spectrum;

    #[test]
    fn forced_unit_eigenvalue() {
        let m = random_spd(1, 42, (0.0, 0.0)).unwrap();
        assert_eq!(m[(0, 0)], 1.0);
    }

    #[test]
    fn eigenvalues_stay_in_range() {
        let m = random_spd(3, 7, (-1.0, 1.0)).unwrap();
        let sp = symmetric_spectrum(&m).unwrap();
        let e = std::f64::consts::E;
        assert!(sp.eigenvalues.iter().all(|&l| l >= 1.0 / e - 1e-12 && l <= e + 1e-12));
        assert!(sp.eigenvalues[0] / sp.eigenvalues[2] <= e * e + 1e-10);
    }

    #[test]
    fn deterministic() {
        assert_eq!(random_spd(5, 9, (-2.0, 2.0)).unwrap(), random_spd(5, 9, (-2.0, 2.0)).unwrap());
        assert_ne!(random_spd(5, 9, (-2.0, 2.0)).unwrap(), random_spd(5, 10, (-2.0, 2.0)).unwrap());
        assert_eq!(trial_seed(1, 2, 3), trial_seed(1, 2, 3));
        assert_ne!(trial_seed(1, 2, 3), trial_seed(1, 3, 2));
    }

    #[test]
    fn bad_ranges() {
        assert!(random_spd(2, 0, (1.0, -1.0)).is_err());
        assert!(random_spd(2, 0, (-7.0, 0.0)).is_err());
        assert!(random_spd(0, 0, (0.0, 0.0)).is_err());
    }

    #[test]
    fn orthogonal_frames() {
        let mut rng = rng_from(3);
        let q = random_orthogonal(&mut rng, 6);
        assert!((q.transpose() * &q - DMatrix::identity(6, 6)).amax() < 1e-12);
        let a = random_affine(4, 11).unwrap();
        assert!(a.condition() <= std::f64::consts::E.powi(2) + 1e-9);
    }
}
