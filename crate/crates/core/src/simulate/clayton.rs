//! Nested Clayton copulas sampled with Marshall-Olkin frailties.
//!
//! The outer frailty is `V0 ~ Gamma(1/theta0)`. Given `V0`, the inner
//! frailty has Laplace transform `exp(-V0 ((1 + t)^a - 1))` with
//! `a = theta0 / theta1`, an exponentially tilted positive stable law.
//! Coordinates are `psi(E / V)` with `psi(t) = (1 + t)^(-1/theta)`.

use std::f64::consts::PI;

use ndarray::Array2;
use rand::Rng;
use rand_distr::{Distribution, Exp1, Gamma};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sample::Sample;

/// Which pair of coordinates shares the inner generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClaytonVariant {
    /// `C0(u1, C1(u2, u3))`.
    C1,
    /// `C0(C1(u1, u2), u3)`.
    C2,
}

impl ClaytonVariant {
    /// 0-based (outer, inner, inner) coordinates.
    fn layout(self) -> [usize; 3] {
        match self {
            Self::C1 => [0, 1, 2],
            Self::C2 => [2, 0, 1],
        }
    }
}

/// Inverse of `tau = theta / (theta + 2)`.
pub fn kendall_tau_to_clayton_theta(tau: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&tau) {
        return Err(Error::InvalidParameter(format!("tau must lie in [0, 1), got {tau}")));
    }
    Ok(2.0 * tau / (1.0 - tau))
}

/// `(theta0, theta1)` for integer `xi` in `0..=7`.
pub fn clayton_parameters(xi: u32) -> Result<(f64, f64)> {
    if xi > 7 {
        return Err(Error::InvalidParameter(format!("xi must lie in 0..=7, got {xi}")));
    }
    let shift = f64::from(xi) / 60.0;
    Ok((
        kendall_tau_to_clayton_theta(5.0 / 12.0 - shift)?,
        kendall_tau_to_clayton_theta(5.0 / 12.0 + shift)?,
    ))
}

/// Bivariate Clayton CDF.
pub fn clayton_cdf(theta: f64, u: f64, v: f64) -> f64 {
    if u <= 0.0 || v <= 0.0 {
        return 0.0;
    }
    (u.powf(-theta) + v.powf(-theta) - 1.0).powf(-1.0 / theta)
}

/// Positive stable variable with Laplace transform `exp(-c t^a)`,
/// `0 < a < 1` (Kanter's representation).
fn positive_stable<R: Rng + ?Sized>(a: f64, c: f64, rng: &mut R) -> f64 {
    let u = PI * rng.random::<f64>();
    let e: f64 = Exp1.sample(rng);
    let s = (a * u).sin() / u.sin().powf(1.0 / a) * (((1.0 - a) * u).sin() / e).powf((1.0 - a) / a);
    c.powf(1.0 / a) * s
}

/// Variable with Laplace transform `exp(-v ((1 + t)^a - 1))`.
pub fn tilted_stable<R: Rng + ?Sized>(a: f64, v: f64, rng: &mut R) -> f64 {
    if a >= 1.0 {
        return v;
    }
    // Split into m pieces so each rejection step accepts with
    // probability exp(-v/m) >= 1/e.
    let m = v.ceil().max(1.0);
    let c = v / m;
    let mut total = 0.0;
    for _ in 0..m as usize {
        loop {
            let s = positive_stable(a, c, rng);
            if rng.random::<f64>() <= (-s).exp() {
                total += s;
                break;
            }
        }
    }
    total
}

/// Draws from the three-dimensional nested Clayton copula with outer
/// parameter `theta0` and inner parameter `theta1`.
pub fn nested_clayton_sample<R: Rng + ?Sized>(
    variant: ClaytonVariant,
    theta0: f64,
    theta1: f64,
    n: usize,
    rng: &mut R,
) -> Result<Sample<f64>> {
    if !(theta0 > 0.0 && theta1.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "Clayton parameters must be positive and finite, got ({theta0}, {theta1})"
        )));
    }
    if theta0 > theta1 {
        return Err(Error::InvalidParameter(format!(
            "nesting requires theta0 <= theta1, got ({theta0}, {theta1})"
        )));
    }
    let outer = Gamma::new(1.0 / theta0, 1.0).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let a = theta0 / theta1;
    let [o, i1, i2] = variant.layout();
    let psi = |theta: f64, t: f64| (1.0 + t).powf(-1.0 / theta);
    let mut out = Array2::zeros((n, 3));
    for mut row in out.rows_mut() {
        let v0: f64 = outer.sample(rng);
        let v01 = tilted_stable(a, v0, rng);
        let e: [f64; 3] = [Exp1.sample(rng), Exp1.sample(rng), Exp1.sample(rng)];
        row[o] = psi(theta0, e[0] / v0);
        row[i1] = psi(theta1, e[1] / v01);
        row[i2] = psi(theta1, e[2] / v01);
    }
    Ok(Sample::new(out))
}

pub fn hierarchical_clayton_sample<R: Rng + ?Sized>(
    variant: ClaytonVariant,
    xi: u32,
    n: usize,
    rng: &mut R,
) -> Result<Sample<f64>> {
    let (theta0, theta1) = clayton_parameters(xi)?;
    nested_clayton_sample(variant, theta0, theta1, n, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ks::ks_p_value;
    use crate::ks::ks_two_sample;
    use crate::rng::RngSeed;

    /// O(n^2) Kendall tau for continuous data.
    fn kendall_tau(x: &[f64], y: &[f64]) -> f64 {
        let n = x.len();
        let mut s = 0i64;
        for i in 0..n {
            for j in i + 1..n {
                let p = (x[i] - x[j]) * (y[i] - y[j]);
                s += if p > 0.0 { 1 } else { -1 };
            }
        }
        s as f64 / (n * (n - 1) / 2) as f64
    }

    #[test]
    fn theta_from_tau() {
        assert_eq!(kendall_tau_to_clayton_theta(0.0).unwrap(), 0.0);
        assert!((kendall_tau_to_clayton_theta(1.0 / 3.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((kendall_tau_to_clayton_theta(5.0 / 12.0).unwrap() - 10.0 / 7.0).abs() < 1e-14);
        assert!(kendall_tau_to_clayton_theta(1.0).is_err());
        let (t0, t1) = clayton_parameters(5).unwrap();
        assert!((t0 - 1.0).abs() < 1e-14 && (t1 - 2.0).abs() < 1e-14);
        assert!(clayton_parameters(8).is_err());
    }

    #[test]
    fn nesting_violation_is_an_error() {
        assert!(nested_clayton_sample(ClaytonVariant::C1, 2.0, 1.0, 10, &mut RngSeed(1).rng()).is_err());
    }

    #[test]
    fn tilted_stable_moments() {
        // Mean is v a and variance v a (1 - a) from the Laplace exponent.
        let (a, v) = (0.6, 2.5);
        let mut rng = RngSeed(2).rng();
        let draws: Vec<f64> = (0..200_000).map(|_| tilted_stable(a, v, &mut rng)).collect();
        let mean = draws.iter().sum::<f64>() / draws.len() as f64;
        let var = draws.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / draws.len() as f64;
        assert!((mean - v * a).abs() < 0.01, "mean {mean}");
        assert!((var - v * a * (1.0 - a)).abs() < 0.02, "var {var}");
    }

    #[test]
    fn bivariate_margins_match_closed_form() {
        let n = 100_000;
        let (t0, t1) = (10.0 / 7.0, 2.0);
        let x = nested_clayton_sample(ClaytonVariant::C1, t0, t1, n, &mut RngSeed(3).rng()).unwrap();
        let d = x.data();
        let grid = [0.1, 0.3, 0.5, 0.7, 0.9];
        for (pair, theta) in [((1, 2), t1), ((0, 1), t0), ((0, 2), t0)] {
            for &u in &grid {
                for &v in &grid {
                    let hits = d.rows().into_iter().filter(|r| r[pair.0] <= u && r[pair.1] <= v).count();
                    let emp = hits as f64 / n as f64;
                    let exact = clayton_cdf(theta, u, v);
                    let se = (exact * (1.0 - exact) / n as f64).sqrt();
                    assert!((emp - exact).abs() < 4.0 * se + 1e-12, "{pair:?} ({u},{v}): {emp} vs {exact}");
                }
            }
        }
    }

    #[test]
    fn inner_kendall_tau_at_xi_six() {
        let x = hierarchical_clayton_sample(ClaytonVariant::C2, 6, 6000, &mut RngSeed(4).rng()).unwrap();
        let d = x.data();
        let a: Vec<f64> = d.column(0).to_vec();
        let b: Vec<f64> = d.column(1).to_vec();
        let tau = kendall_tau(&a, &b);
        // Standard error of tau is about 0.008 at this n.
        assert!((tau - (5.0 / 12.0 + 0.1)).abs() < 0.03, "tau {tau}");
        let c: Vec<f64> = d.column(2).to_vec();
        assert!((kendall_tau(&a, &c) - (5.0 / 12.0 - 0.1)).abs() < 0.03);
    }

    #[test]
    fn marginals_are_uniform() {
        let mut rng = RngSeed(5).rng();
        let reference: Vec<f64> = (0..10_000).map(|i| (i as f64 + 0.5) / 10_000.0).collect();
        let mut low_p = 0;
        for _ in 0..20 {
            let x = hierarchical_clayton_sample(ClaytonVariant::C1, 3, 10_000, &mut rng).unwrap();
            for j in 0..3 {
                let col = x.data().column(j).to_vec();
                // KS against a fine uniform grid approximates the one-sample test.
                let stat = ks_two_sample(&col, &reference).unwrap();
                let p = ks_p_value(stat * std::f64::consts::SQRT_2, 10_000, 10_000);
                low_p += usize::from(p < 0.01);
            }
        }
        assert!(low_p <= 3, "{low_p} of 60 marginals rejected");
    }

    #[test]
    fn xi_zero_is_plain_clayton() {
        let (t0, t1) = clayton_parameters(0).unwrap();
        assert_eq!(t0, t1);
        let x = hierarchical_clayton_sample(ClaytonVariant::C2, 0, 50_000, &mut RngSeed(6).rng()).unwrap();
        for (a, b) in [(0, 1), (0, 2), (1, 2)] {
            let hits = x.data().rows().into_iter().filter(|r| r[a] <= 0.4 && r[b] <= 0.6).count();
            let exact = clayton_cdf(t0, 0.4, 0.6);
            assert!((hits as f64 / 50_000.0 - exact).abs() < 0.01);
        }
    }
}
