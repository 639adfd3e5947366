//! Three correlated Gaussian processes on an equispaced grid.
//!
//! Component `c` of an observation is `cos(2 pi t) + e_c(t)` at
//! `t_i = i / grid`. The errors have covariance `R (x) K` with
//! `K(s, t) = exp(-|s - t|)` and equal-time correlations
//! `R = [[1, .5 + delta, .5 - delta], [., 1, .5], [., ., 1]]`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use ndarray::Array2;
use rand::Rng;

use super::gaussian::checked_cholesky;
use crate::error::{Error, Result};
use crate::sample::{FunctionalLayout, Sample};
use crate::scalar::Scalar;

pub const COMPONENTS: usize = 3;

pub fn grid_points(grid: usize) -> Vec<f64> {
    (0..grid).map(|i| i as f64 / grid as f64).collect()
}

pub fn mean_curve(grid: usize) -> Vec<f64> {
    grid_points(grid).into_iter().map(|t| (2.0 * PI * t).cos()).collect()
}

pub fn temporal_covariance(grid: usize) -> DMatrix<f64> {
    let t = grid_points(grid);
    DMatrix::from_fn(grid, grid, |a, b| (-(t[a] - t[b]).abs()).exp())
}

pub fn cross_correlation(delta: f64) -> DMatrix<f64> {
    DMatrix::from_row_slice(
        3,
        3,
        &[1.0, 0.5 + delta, 0.5 - delta, 0.5 + delta, 1.0, 0.5, 0.5 - delta, 0.5, 1.0],
    )
}

/// Cholesky factors of the temporal and cross-sectional covariances.
#[derive(Debug, Clone)]
pub struct FunctionalModel {
    grid: usize,
    mean: Vec<f64>,
    chol_time: DMatrix<f64>,
    chol_cross: DMatrix<f64>,
}

impl FunctionalModel {
    pub fn new(delta: f64, grid: usize) -> Result<Self> {
        if grid < 2 {
            return Err(Error::InvalidParameter(format!("grid must be at least 2, got {grid}")));
        }
        if !delta.is_finite() {
            return Err(Error::InvalidParameter("delta must be finite".into()));
        }
        Ok(Self {
            grid,
            mean: mean_curve(grid),
            chol_time: checked_cholesky(&temporal_covariance(grid), "temporal")?,
            chol_cross: checked_cholesky(&cross_correlation(delta), "cross-correlation")?,
        })
    }

    pub fn layout(&self) -> FunctionalLayout {
        FunctionalLayout {
            components: COMPONENTS,
            grid: self.grid,
        }
    }

    pub fn chol_time(&self) -> &DMatrix<f64> {
        &self.chol_time
    }

    /// `n` observations, component-major rows of width `3 * grid`.
    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Sample<f64>> {
        let g = self.grid;
        let mut out = Array2::zeros((n, COMPONENTS * g));
        let mut z = DMatrix::<f64>::zeros(g, COMPONENTS);
        for mut row in out.rows_mut() {
            z.iter_mut().for_each(|v| *v = f64::standard_normal(rng));
            // Columns of L_K Z L_R' are the three component paths.
            let e = &self.chol_time * &z * self.chol_cross.transpose();
            for c in 0..COMPONENTS {
                for t in 0..g {
                    row[c * g + t] = self.mean[t] + e[(t, c)];
                }
            }
        }
        Sample::functional(out, self.layout())
    }
}

pub fn functional_sample<R: Rng + ?Sized>(n: usize, delta: f64, grid: usize, rng: &mut R) -> Result<Sample<f64>> {
    FunctionalModel::new(delta, grid)?.sample(n, rng)
}
