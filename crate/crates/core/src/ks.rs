//! Empirical CDFs and the two-sample Kolmogorov–Smirnov machinery.
//!
//! Critical values and p-values use the asymptotic Kolmogorov
//! distribution. For small samples they are approximate: the exact
//! finite-sample law of the statistic is discrete and is not tabulated.

use crate::error::{Error, Result};
use crate::scalar::{sort_scalars, Scalar};

/// Right-continuous empirical distribution function.
#[derive(Debug, Clone, PartialEq)]
pub struct Ecdf<T> {
    sorted: Vec<T>,
}

impl<T: Scalar> Ecdf<T> {
    pub fn new(mut values: Vec<T>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Empty("ECDF needs at least one value"));
        }
        sort_scalars(&mut values);
        Ok(Self { sorted: values })
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn sorted_values(&self) -> &[T] {
        &self.sorted
    }

    /// `#{values <= t} / n`.
    pub fn eval(&self, t: T) -> T {
        let count = self.sorted.partition_point(|&v| v <= t);
        T::of_usize(count) / T::of_usize(self.sorted.len())
    }
}

/// KS statistic of two ascending slices in lattice units: returns
/// `max_t |m * #{a <= t} - n * #{b <= t}|` with `n = a.len()`,
/// `m = b.len()`. The statistic is this value over `n * m`.
///
/// Tied values are merged before differencing, so equal observations
/// within or across samples are handled exactly.
pub fn ks_lattice_sorted<T: Scalar>(a: &[T], b: &[T]) -> u64 {
    lattice(a, b)
}

/// [`ks_lattice_sorted`] on ascending [`Scalar::sort_key`] values.
///
/// Inside a run of equal values from one sample the gap is linear in the
/// count, so evaluating after every single step cannot exceed the value at
/// the run ends. Only cross-sample ties need a joint step.
pub(crate) fn ks_lattice_keys(a: &[u64], b: &[u64]) -> u64 {
    let (n, m) = (a.len() as i64, b.len() as i64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut best = 0i64;
    while i < a.len() && j < b.len() {
        let (x, y) = (a[i], b[j]);
        if x == y {
            while i < a.len() && a[i] == x {
                i += 1;
            }
            while j < b.len() && b[j] == x {
                j += 1;
            }
        } else {
            let step_a = x < y;
            i += usize::from(step_a);
            j += usize::from(!step_a);
        }
        best = best.max((i as i64 * m - j as i64 * n).abs());
    }
    best as u64
}

#[inline]
fn lattice<K: PartialOrd + Copy>(a: &[K], b: &[K]) -> u64 {
    let (n, m) = (a.len() as i64, b.len() as i64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut best = 0i64;
    while i < a.len() && j < b.len() {
        let t = if a[i] <= b[j] { a[i] } else { b[j] };
        while i < a.len() && a[i] <= t {
            i += 1;
        }
        while j < b.len() && b[j] <= t {
            j += 1;
        }
        best = best.max((i as i64 * m - j as i64 * n).abs());
    }
    // Past this point one ECDF is 1 and the gap only shrinks.
    best as u64
}

/// KS statistic of two ascending slices.
pub fn ks_sorted<T: Scalar>(a: &[T], b: &[T]) -> f64 {
    ks_lattice_sorted(a, b) as f64 / (a.len() as f64 * b.len() as f64)
}

/// `sup_t |F_x(t) - F_y(t)|` for the empirical CDFs of `x` and `y`.
pub fn ks_two_sample<T: Scalar>(x: &[T], y: &[T]) -> Result<f64> {
    if x.is_empty() || y.is_empty() {
        return Err(Error::Empty("KS test needs two nonempty samples"));
    }
    let mut a = x.to_vec();
    let mut b = y.to_vec();
    sort_scalars(&mut a);
    sort_scalars(&mut b);
    Ok(ks_sorted(&a, &b))
}

const SERIES_TOL: f64 = 1e-12;

/// Kolmogorov limit distribution
/// `K(x) = 1 - 2 sum_{j>=1} (-1)^(j-1) exp(-2 j^2 x^2)`.
///
/// For `x < 1.18` the alternating series converges slowly and the
/// equivalent Jacobi theta form
/// `K(x) = sqrt(2 pi)/x sum_{j>=1} exp(-(2j-1)^2 pi^2 / (8 x^2))`
/// is summed instead. Both are truncated once a term drops below `1e-12`.
pub fn kolmogorov_cdf(x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x < 1.18 {
        let c = -std::f64::consts::PI.powi(2) / (8.0 * x * x);
        let mut sum = 0.0;
        for j in 1.. {
            let k = (2 * j - 1) as f64;
            let term = (c * k * k).exp();
            sum += term;
            if term < SERIES_TOL {
                break;
            }
        }
        ((2.0 * std::f64::consts::PI).sqrt() / x * sum).clamp(0.0, 1.0)
    } else {
        let mut sum = 0.0;
        for j in 1.. {
            let jf = j as f64;
            let term = (-2.0 * jf * jf * x * x).exp();
            sum += if j % 2 == 1 { term } else { -term };
            if term < SERIES_TOL {
                break;
            }
        }
        (1.0 - 2.0 * sum).clamp(0.0, 1.0)
    }
}

/// `K^{-1}(p)` by bisection to `1e-10`.
pub fn kolmogorov_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "Kolmogorov quantile needs p in (0, 1), got {p}"
        )));
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while kolmogorov_cdf(hi) < p {
        hi *= 2.0;
    }
    while hi - lo > 1e-10 {
        let mid = 0.5 * (lo + hi);
        if kolmogorov_cdf(mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn check_sizes(n1: usize, n2: usize) -> Result<()> {
    if n1 == 0 || n2 == 0 {
        return Err(Error::InvalidParameter(format!(
            "sample sizes must be >= 1, got ({n1}, {n2})"
        )));
    }
    Ok(())
}

/// Asymptotic critical value `K^{-1}(1 - level) * sqrt((n1 + n2) / (n1 n2))`.
pub fn ks_critical_value(n1: usize, n2: usize, level: f64) -> Result<f64> {
    check_sizes(n1, n2)?;
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "level must lie in (0, 1), got {level}"
        )));
    }
    let (a, b) = (n1 as f64, n2 as f64);
    Ok(kolmogorov_quantile(1.0 - level)? * ((a + b) / (a * b)).sqrt())
}

/// Asymptotic p-value `1 - K(stat * sqrt(n1 n2 / (n1 + n2)))`.
pub fn ks_p_value(stat: f64, n1: usize, n2: usize) -> f64 {
    let (a, b) = (n1.max(1) as f64, n2.max(1) as f64);
    (1.0 - kolmogorov_cdf(stat * (a * b / (a + b)).sqrt())).clamp(0.0, 1.0)
}
