//! Simulation scenarios and the Monte Carlo power-curve harness.

pub mod clayton;
pub mod functional;
pub mod gaussian;

use std::io::Write;

use nalgebra::DMatrix;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use clayton::{hierarchical_clayton_sample, kendall_tau_to_clayton_theta, ClaytonVariant};
pub use functional::{functional_sample, FunctionalModel};
pub use gaussian::{gaussian_mixture_sample, sign_invariant_gaussian_sample};

use crate::error::{Error, Result};
use crate::group::{permutation_generators, signed_permutation_generators, GroupSpec};
use crate::invariance::TestPlan;
use crate::rng::RngSeed;
use crate::sample::Sample;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScenarioKind {
    /// `N(0, (1 - xi) equicorrelation(rho) + xi toeplitz(rho))`, parameter `xi`.
    GaussianMixtureCov { dim: usize, rho: f64 },
    /// Nested Clayton copula, integer parameter `xi`.
    HierarchicalClayton { variant: ClaytonVariant },
    /// `N(0, equicorrelation(rho))` against sign-invariant exchangeability,
    /// parameter `rho`.
    SignInvariantGaussian { dim: usize },
    /// Three correlated processes, parameter `delta`.
    FunctionalGaussian { grid: usize },
}

impl ScenarioKind {
    pub fn parameter_name(&self) -> &'static str {
        match self {
            Self::GaussianMixtureCov { .. } | Self::HierarchicalClayton { .. } => "xi",
            Self::SignInvariantGaussian { .. } => "rho",
            Self::FunctionalGaussian { .. } => "delta",
        }
    }

    pub fn default_grid(&self) -> Vec<f64> {
        let steps = |count: usize, step: f64| (0..count).map(|i| i as f64 * step).collect();
        match self {
            Self::GaussianMixtureCov { .. } | Self::SignInvariantGaussian { .. } => steps(11, 0.1),
            Self::HierarchicalClayton { .. } => steps(8, 1.0),
            Self::FunctionalGaussian { .. } => steps(7, 0.05),
        }
    }

    /// The group whose invariance is tested.
    pub fn group(&self) -> Result<GroupSpec<f64>> {
        match *self {
            Self::GaussianMixtureCov { dim, .. } => permutation_generators(dim),
            Self::HierarchicalClayton { .. } => permutation_generators(3),
            Self::SignInvariantGaussian { dim } => signed_permutation_generators(dim),
            Self::FunctionalGaussian { grid } => permutation_generators(functional::COMPONENTS)?.lift_to_blocks(grid),
        }
    }

    fn prepare(&self, param: f64) -> Result<Prepared> {
        Ok(match *self {
            Self::GaussianMixtureCov { dim, rho } => {
                check_unit(rho, "rho", false)?;
                check_unit(param, "xi", true)?;
                check_dim(dim)?;
                Prepared::Normal(gaussian::checked_cholesky(
                    &gaussian::mixture_covariance(dim, rho, param),
                    "mixture",
                )?)
            }
            Self::HierarchicalClayton { variant } => {
                if param.fract() != 0.0 || !(0.0..=7.0).contains(&param) {
                    return Err(Error::InvalidParameter(format!(
                        "xi must be an integer in 0..=7, got {param}"
                    )));
                }
                Prepared::Clayton(variant, param as u32)
            }
            Self::SignInvariantGaussian { dim } => {
                check_unit(param, "rho", false)?;
                check_dim(dim)?;
                Prepared::Normal(gaussian::checked_cholesky(
                    &gaussian::equicorrelation(dim, param),
                    "equicorrelation",
                )?)
            }
            Self::FunctionalGaussian { grid } => Prepared::Functional(FunctionalModel::new(param, grid)?),
        })
    }
}

fn check_unit(v: f64, name: &str, closed: bool) -> Result<()> {
    let ok = v >= 0.0 && (v < 1.0 || (closed && v == 1.0));
    if !ok {
        let range = if closed { "[0, 1]" } else { "[0, 1)" };
        return Err(Error::InvalidParameter(format!("{name} must lie in {range}, got {v}")));
    }
    Ok(())
}

fn check_dim(d: usize) -> Result<()> {
    if d < 2 {
        return Err(Error::Dimension(format!("dimension must be at least 2, got {d}")));
    }
    Ok(())
}

/// A scenario at one parameter value, ready to draw samples.
enum Prepared {
    Normal(DMatrix<f64>),
    Clayton(ClaytonVariant, u32),
    Functional(FunctionalModel),
}

impl Prepared {
    fn draw<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Sample<f64>> {
        match self {
            Self::Normal(chol) => Ok(Sample::new(gaussian::correlated_normals(chol, n, rng))),
            Self::Clayton(variant, xi) => hierarchical_clayton_sample(*variant, *xi, n, rng),
            Self::Functional(model) => model.sample(n, rng),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub kind: ScenarioKind,
    pub n: usize,
    pub params: Vec<f64>,
}

impl Scenario {
    pub fn new(kind: ScenarioKind, n: usize, params: Vec<f64>) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidParameter(format!("n must be at least 2, got {n}")));
        }
        if params.is_empty() {
            return Err(Error::Empty("parameter grid"));
        }
        for &p in &params {
            kind.prepare(p)?;
        }
        Ok(Self { kind, n, params })
    }

    /// One sample at parameter value `param`.
    pub fn sample<R: Rng + ?Sized>(&self, param: f64, rng: &mut R) -> Result<Sample<f64>> {
        self.kind.prepare(param)?.draw(self.n, rng)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerPoint {
    pub param: f64,
    pub rejections: usize,
    pub replicates: usize,
    pub power: f64,
    /// `sqrt(p (1 - p) / R)`.
    pub se: f64,
}

impl PowerPoint {
    pub fn new(param: f64, rejections: usize, replicates: usize) -> Self {
        let power = rejections as f64 / replicates as f64;
        Self {
            param,
            rejections,
            replicates,
            power,
            se: (power * (1.0 - power) / replicates as f64).sqrt(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerCurve {
    pub scenario: Scenario,
    pub plan: TestPlan,
    pub seed: u64,
    pub points: Vec<PowerPoint>,
}

impl PowerCurve {
    /// CSV with columns `param,power,se,replicates,seed`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["param", "power", "se", "replicates", "seed"])?;
        for p in &self.points {
            w.write_record([
                p.param.to_string(),
                p.power.to_string(),
                p.se.to_string(),
                p.replicates.to_string(),
                self.seed.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Rejection rate of `plan` at every parameter of `scenario`. Replicate
/// `r` at grid point `g` uses seeds derived from `(seed, g, r)` only.
pub fn power_curve(scenario: &Scenario, plan: &TestPlan, replicates: usize, seed: RngSeed) -> Result<PowerCurve> {
    if replicates == 0 {
        return Err(Error::InvalidParameter("need at least one replicate".into()));
    }
    let group = scenario.kind.group()?;
    let mut points = Vec::with_capacity(scenario.params.len());
    for (g, &param) in scenario.params.iter().enumerate() {
        let prepared = scenario.kind.prepare(param)?;
        let data_seed = seed.derive(2 * g as u64 + 1);
        let test_seed = seed.derive(2 * g as u64 + 2);
        let rejects = (0..replicates)
            .into_par_iter()
            .map(|r| {
                let x = prepared.draw(scenario.n, &mut data_seed.stream(r as u64))?;
                Ok(plan.run(&x, &group, test_seed.derive(r as u64))?.overall_reject)
            })
            .collect::<Result<Vec<bool>>>()?;
        points.push(PowerPoint::new(param, rejects.iter().filter(|&&r| r).count(), replicates));
    }
    Ok(PowerCurve {
        scenario: scenario.clone(),
        plan: *plan,
        seed: seed.0,
        points,
    })
}
