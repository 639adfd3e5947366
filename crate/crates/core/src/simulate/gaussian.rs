//! Multivariate normal scenarios.

use nalgebra::{DMatrix, SymmetricEigen};
use ndarray::Array2;
use rand::Rng;

use crate::error::{Error, Result};
use crate::sample::Sample;
use crate::scalar::Scalar;

/// Smallest eigenvalue a covariance may have before it is rejected.
pub const PSD_TOL: f64 = -1e-10;

/// `(1 - rho) I + rho 11'`.
pub fn equicorrelation(d: usize, rho: f64) -> DMatrix<f64> {
    DMatrix::from_fn(d, d, |a, b| if a == b { 1.0 } else { rho })
}

/// `rho^{|a - b|}`.
pub fn toeplitz(d: usize, rho: f64) -> DMatrix<f64> {
    DMatrix::from_fn(d, d, |a, b| rho.powi(a.abs_diff(b) as i32))
}

/// `(1 - xi) equicorrelation(rho) + xi toeplitz(rho)`.
pub fn mixture_covariance(d: usize, rho: f64, xi: f64) -> DMatrix<f64> {
    equicorrelation(d, rho) * (1.0 - xi) + toeplitz(d, rho) * xi
}

pub fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    SymmetricEigen::new(m.clone()).eigenvalues.min()
}

/// Lower Cholesky factor after a PSD check.
pub fn checked_cholesky(cov: &DMatrix<f64>, what: &str) -> Result<DMatrix<f64>> {
    let min = min_eigenvalue(cov);
    if min < PSD_TOL {
        return Err(Error::InvalidParameter(format!(
            "{what} covariance is not positive semidefinite (smallest eigenvalue {min:e})"
        )));
    }
    cov.clone().cholesky().map(|c| c.l()).ok_or_else(|| {
        Error::InvalidParameter(format!("{what} covariance is singular"))
    })
}

/// `n` draws of `N(0, L L')`, one per row.
pub fn correlated_normals<R: Rng + ?Sized>(chol: &DMatrix<f64>, n: usize, rng: &mut R) -> Array2<f64> {
    let d = chol.nrows();
    let mut out = Array2::zeros((n, d));
    let mut z = vec![0.0; d];
    for mut row in out.rows_mut() {
        z.iter_mut().for_each(|v| *v = f64::standard_normal(rng));
        for a in 0..d {
            row[a] = (0..=a).map(|b| chol[(a, b)] * z[b]).sum();
        }
    }
    out
}

fn check_rho(rho: f64) -> Result<()> {
    if !(0.0..1.0).contains(&rho) {
        return Err(Error::InvalidParameter(format!("rho must lie in [0, 1), got {rho}")));
    }
    Ok(())
}

pub fn gaussian_mixture_sample<R: Rng + ?Sized>(
    d: usize,
    rho: f64,
    xi: f64,
    n: usize,
    rng: &mut R,
) -> Result<Sample<f64>> {
    check_rho(rho)?;
    if !(0.0..=1.0).contains(&xi) {
        return Err(Error::InvalidParameter(format!("xi must lie in [0, 1], got {xi}")));
    }
    if d < 2 {
        return Err(Error::Dimension(format!("dimension must be at least 2, got {d}")));
    }
    let chol = checked_cholesky(&mixture_covariance(d, rho, xi), "mixture")?;
    Ok(Sample::new(correlated_normals(&chol, n, rng)))
}

pub fn sign_invariant_gaussian_sample<R: Rng + ?Sized>(d: usize, rho: f64, n: usize, rng: &mut R) -> Result<Sample<f64>> {
    gaussian_mixture_sample(d, rho, 0.0, n, rng)
}
