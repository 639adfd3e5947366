//! Rank standardization and empirical-copula summaries.

use ndarray::{Array2, ArrayView1};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::sample::Sample;
use crate::scalar::Scalar;

/// Column-wise empirical CDF transform of a sample, entries in `(0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RankSample {
    values: Array2<f64>,
}

impl RankSample {
    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn nrows(&self) -> usize {
        self.values.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.values.ncols()
    }

    pub fn column(&self, j: usize) -> ArrayView1<'_, f64> {
        self.values.column(j)
    }

    /// The ranks as an ordinary sample.
    pub fn to_sample(&self) -> Sample<f64> {
        Sample::new(self.values.clone())
    }
}

/// Average ranks of `column` (1-based), ties sharing the mean rank.
fn average_ranks<T: Scalar>(column: ArrayView1<'_, T>) -> Vec<f64> {
    let n = column.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| column[a].total_order(&column[b]));
    let mut ranks = vec![0.0; n];
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && column[order[end]] == column[order[start]] {
            end += 1;
        }
        // Ranks start+1..=end share their mean.
        let rank = (start + 1 + end) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = rank;
        }
        start = end;
    }
    ranks
}

/// `U_ij = rank(X_ij within column j) / n`, ties by average rank.
pub fn rank_transform<T: Scalar>(x: &Sample<T>) -> Result<RankSample> {
    let (n, d) = (x.nrows(), x.ncols());
    if n == 0 {
        return Err(Error::Empty("rank transform of an empty sample"));
    }
    let mut values = Array2::zeros((n, d));
    for j in 0..d {
        let ranks = average_ranks(x.data().column(j));
        for (i, r) in ranks.into_iter().enumerate() {
            values[[i, j]] = r / n as f64;
        }
    }
    Ok(RankSample { values })
}

/// Fraction of rows whose every coordinate is at most `u_j`.
pub fn empirical_copula(u: &RankSample, point: &[f64]) -> Result<f64> {
    if point.len() != u.ncols() {
        return Err(Error::DimensionMismatch {
            expected: u.ncols(),
            actual: point.len(),
        });
    }
    let hits = u
        .values
        .rows()
        .into_iter()
        .filter(|row| row.iter().zip(point).all(|(v, p)| v <= p))
        .count();
    Ok(hits as f64 / u.nrows() as f64)
}

/// `(1/n) sum_i [C(U_ia, U_ib) - C(U_ib, U_ia)]^2` with `C` the empirical
/// copula of columns `a` and `b`.
pub fn bivariate_symmetry_index(u: &RankSample, a: usize, b: usize) -> Result<f64> {
    let d = u.ncols();
    if a >= d || b >= d {
        return Err(Error::InvalidParameter(format!(
            "columns ({a}, {b}) out of range for {d} columns"
        )));
    }
    let (x, y) = (u.column(a), u.column(b));
    let n = x.len();
    let copula = |s: f64, t: f64| {
        x.iter().zip(y.iter()).filter(|(&p, &q)| p <= s && q <= t).count() as f64 / n as f64
    };
    let terms: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let diff = copula(x[i], y[i]) - copula(y[i], x[i]);
            diff * diff
        })
        .collect();
    Ok(terms.iter().sum::<f64>() / n as f64)
}

/// Symmetry index of every column pair; zero diagonal.
pub fn pairwise_symmetry_matrix(u: &RankSample) -> Result<Array2<f64>> {
    let d = u.ncols();
    if d < 2 {
        return Err(Error::Dimension(format!("need at least 2 columns, got {d}")));
    }
    let mut m = Array2::zeros((d, d));
    for a in 0..d {
        for b in a + 1..d {
            let s = bivariate_symmetry_index(u, a, b)?;
            m[[a, b]] = s;
            m[[b, a]] = s;
        }
    }
    Ok(m)
}
