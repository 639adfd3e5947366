//! Tests of `H0: P T^{-1} = P` for every generator `T` of a group.
//!
//! * Procedure A splits the sample in two, draws one uniform direction
//!   per generator and runs `k` two-sample KS tests at level `alpha/k`
//!   (Bonferroni). With orthogonal generators its size lies between
//!   `alpha/k` and `alpha` whatever the distribution.
//! * Procedure B uses the whole sample and `l` directions, takes the
//!   maximum KS statistic `D_{n,l}` over directions and generators, and
//!   calibrates it by resampling.
//! * The permutation null keeps every observation but permutes its
//!   coordinates at random, which is the exchangeability null used for
//!   copula data.
//!
//! Statistics are computed in integer lattice units (`n1 * n2` times the
//! KS distance), so comparisons between an observed statistic and its
//! resampled replicates are exact.

use std::fmt;

use ndarray::{Array2, Axis};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{GroupSpec, LinearMap, MATRIX_TOL};
use crate::ks::{ks_critical_value, ks_lattice_keys, ks_lattice_sorted, ks_p_value};
use crate::projection::{project, project_rows, Direction, DirectionKind, DirectionSampler};
use crate::rng::{RngSeed, SimRng};
use crate::sample::Sample;
use crate::scalar::{sort_scalars, Scalar};
use crate::stabilizer::GroupSampler;

pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// Fewest observations procedure A accepts.
pub const MIN_ROWS_PROCEDURE_A: usize = 20;

/// Largest non-signed-permutation group that is enumerated to draw
/// uniform elements.
pub const ENUMERATION_CAP: usize = 100_000;

// Seed tags.
const TAG_OBSERVED: u64 = 1;
const TAG_RESAMPLE: u64 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Procedure {
    A,
    B,
    PermutationNull,
}

impl fmt::Display for Procedure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::A => "a",
            Self::B => "b",
            Self::PermutationNull => "perm-null",
        })
    }
}

/// How bootstrap samples are drawn for procedure B.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BootstrapScheme {
    /// Resample rows with replacement, then move each resampled row by an
    /// independent uniform element of the group. The resampling law is
    /// group invariant, so replicates follow the null.
    #[default]
    Symmetrized,
    /// Resample rows with replacement only.
    Plain,
}

impl fmt::Display for BootstrapScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Symmetrized => "symmetrized",
            Self::Plain => "plain",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProcedureAConfig {
    pub alpha: f64,
    pub split_seed: RngSeed,
    pub direction_seed: RngSeed,
    /// Diagnostic only: one direction shared by all generators.
    pub share_direction: bool,
}

impl ProcedureAConfig {
    pub fn new(alpha: f64, seed: RngSeed) -> Self {
        Self {
            alpha,
            split_seed: seed.derive(0xa1),
            direction_seed: seed.derive(0xa2),
            share_direction: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProcedureBConfig {
    pub alpha: f64,
    /// Number of random directions `l`.
    pub directions: usize,
    /// Bootstrap replicates `B`.
    pub bootstrap: usize,
    pub seed: RngSeed,
    pub scheme: BootstrapScheme,
}

impl ProcedureBConfig {
    pub fn new(alpha: f64, directions: usize, bootstrap: usize, seed: RngSeed) -> Self {
        Self {
            alpha,
            directions,
            bootstrap,
            seed,
            scheme: BootstrapScheme::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PermutationNullConfig {
    pub alpha: f64,
    pub directions: usize,
    pub replicates: usize,
    pub seed: RngSeed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorOutcome {
    pub label: String,
    /// Indices into the report's direction list.
    pub directions: Vec<usize>,
    pub statistic: f64,
    pub threshold: f64,
    pub p_value: Option<f64>,
    pub reject: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub directions: usize,
    /// Bootstrap or permutation replicates.
    pub replicates: Option<usize>,
    pub bootstrap_scheme: Option<BootstrapScheme>,
    pub split_sizes: Option<(usize, usize)>,
    pub share_direction: bool,
    pub seeds: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub schema_version: u32,
    pub procedure: Procedure,
    pub group: String,
    pub n: usize,
    pub dim: usize,
    pub alpha: f64,
    /// Largest per-generator statistic.
    pub statistic: f64,
    /// Critical value (per-generator threshold for procedure A).
    pub critical_value: f64,
    /// Resampling p-value (B, permutation null) or Bonferroni-adjusted
    /// asymptotic p-value (A).
    pub p_value: Option<f64>,
    pub overall_reject: bool,
    pub per_generator: Vec<GeneratorOutcome>,
    pub config: ConfigEcho,
    /// Directions used for the observed statistic.
    #[serde(skip)]
    pub directions: Vec<Direction<f64>>,
}

impl TestReport {
    /// Pretty JSON; field order follows the struct definition.
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

impl fmt::Display for TestReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "procedure {}  group {}  n={} d={}  alpha={}",
            self.procedure, self.group, self.n, self.dim, self.alpha
        )?;
        writeln!(
            f,
            "{:<24} {:>10} {:>10} {:>10} {:>7}",
            "generator", "statistic", "threshold", "p-value", "reject"
        )?;
        for g in &self.per_generator {
            let p = g.p_value.map_or_else(|| "-".to_string(), |p| format!("{p:.4}"));
            writeln!(
                f,
                "{:<24} {:>10.5} {:>10.5} {:>10} {:>7}",
                g.label, g.statistic, g.threshold, p, g.reject
            )?;
        }
        let p = self.p_value.map_or_else(|| "-".to_string(), |p| format!("{p:.4}"));
        write!(
            f,
            "statistic {:.5}  critical {:.5}  p-value {}  reject H0: {}",
            self.statistic, self.critical_value, p, self.overall_reject
        )
    }
}

/// Assigns each row to one of two subsamples by a fair coin, redrawing
/// until both are nonempty.
pub fn split_sample<T: Scalar, R: Rng + ?Sized>(x: &Sample<T>, rng: &mut R) -> Result<(Sample<T>, Sample<T>)> {
    let n = x.nrows();
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "splitting needs at least 2 rows, got {n}"
        )));
    }
    loop {
        let (mut first, mut second) = (Vec::new(), Vec::new());
        for i in 0..n {
            if rng.random::<bool>() {
                first.push(i);
            } else {
                second.push(i);
            }
        }
        if !first.is_empty() && !second.is_empty() {
            return Ok((x.select_rows(&first), x.select_rows(&second)));
        }
    }
}

fn check_dims<T: Scalar>(x: &Sample<T>, g: &GroupSpec<T>) -> Result<()> {
    if g.dim() != x.ncols() {
        return Err(Error::DimensionMismatch {
            expected: g.dim(),
            actual: x.ncols(),
        });
    }
    Ok(())
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "alpha must lie in (0, 1), got {alpha}"
        )));
    }
    Ok(())
}

fn direction_to_f64<T: Scalar>(h: &Direction<T>) -> Direction<f64> {
    Direction::new(h.coords().iter().map(|c| c.as_f64()).collect(), h.kind()).unwrap_or_else(|_| {
        // Rounding from f32 can move the norm by more than the check allows.
        let coords: Vec<f64> = h.coords().iter().map(|c| c.as_f64()).collect();
        let norm = coords.iter().map(|c| c * c).sum::<f64>().sqrt();
        Direction::new(coords.iter().map(|c| c / norm).collect(), DirectionKind::Sphere)
            .expect("normalized")
    })
}

/// Distribution-free split-sample test with Bonferroni combination.
pub fn test_procedure_a<T: Scalar>(x: &Sample<T>, g: &GroupSpec<T>, cfg: &ProcedureAConfig) -> Result<TestReport> {
    check_alpha(cfg.alpha)?;
    check_dims(x, g)?;
    if x.nrows() < MIN_ROWS_PROCEDURE_A {
        return Err(Error::InvalidParameter(format!(
            "procedure A needs at least {MIN_ROWS_PROCEDURE_A} rows, got {}",
            x.nrows()
        )));
    }
    if let Some(bad) = g.generators().iter().find(|t| !t.is_orthogonal(MATRIX_TOL)) {
        return Err(Error::NotOrthogonal {
            label: bad.label().to_string(),
        });
    }
    let k = g.len();
    let level = cfg.alpha / k as f64;
    let (x1, x2) = split_sample(x, &mut cfg.split_seed.rng())?;
    let (n1, n2) = (x1.nrows(), x2.nrows());
    let threshold = ks_critical_value(n1, n2, level)?;

    let sampler = DirectionSampler::for_sample(x);
    let mut rng = cfg.direction_seed.rng();
    let directions: Vec<Direction<T>> = sampler.draw_many(if cfg.share_direction { 1 } else { k }, &mut rng)?;

    let mut per_generator = Vec::with_capacity(k);
    for (j, t) in g.generators().iter().enumerate() {
        let dir_index = if cfg.share_direction { 0 } else { j };
        let h = &directions[dir_index];
        let mut a = project(&x1, h)?;
        let mut b = project(&x2, &h.pulled_back(t)?)?;
        sort_scalars(&mut a);
        sort_scalars(&mut b);
        let statistic = ks_lattice_sorted(&a, &b) as f64 / (n1 as f64 * n2 as f64);
        per_generator.push(GeneratorOutcome {
            label: t.label().to_string(),
            directions: vec![dir_index],
            statistic,
            threshold,
            p_value: Some(ks_p_value(statistic, n1, n2)),
            reject: statistic > threshold,
        });
    }
    let statistic = per_generator.iter().map(|o| o.statistic).fold(0.0, f64::max);
    let min_p = per_generator
        .iter()
        .filter_map(|o| o.p_value)
        .fold(1.0, f64::min);
    Ok(TestReport {
        schema_version: REPORT_SCHEMA_VERSION,
        procedure: Procedure::A,
        group: g.name().to_string(),
        n: x.nrows(),
        dim: x.ncols(),
        alpha: cfg.alpha,
        statistic,
        critical_value: threshold,
        p_value: Some((min_p * k as f64).min(1.0)),
        overall_reject: per_generator.iter().any(|o| o.reject),
        per_generator,
        config: ConfigEcho {
            directions: directions.len(),
            replicates: None,
            bootstrap_scheme: None,
            split_sizes: Some((n1, n2)),
            share_direction: cfg.share_direction,
            seeds: vec![cfg.split_seed.0, cfg.direction_seed.0],
        },
        directions: directions.iter().map(direction_to_f64).collect(),
    })
}

/// Generators stored with their transposes for fast pull-back.
struct PreparedGroup<'a, T> {
    generators: &'a [LinearMap<T>],
}

impl<'a, T: Scalar> PreparedGroup<'a, T> {
    fn new(g: &'a GroupSpec<T>) -> Self {
        Self {
            generators: g.generators(),
        }
    }

    fn k(&self) -> usize {
        self.generators.len()
    }

    /// Lattice KS values `[direction][generator]` comparing `<h_i, X>`
    /// with `<h_i, T_j X>` over the full sample.
    fn lattice_table(&self, x: ndarray::ArrayView2<'_, T>, dirs: &[Direction<T>]) -> Vec<Vec<u64>> {
        let d = x.ncols();
        let k = self.k();
        let stride = k + 1;
        let weight = dirs.first().map_or(T::one(), |h| h.kind().weight());
        let mut stack = Array2::zeros((dirs.len() * stride, d));
        let mut buf = vec![T::zero(); d];
        for (i, h) in dirs.iter().enumerate() {
            stack
                .row_mut(i * stride)
                .assign(&ndarray::ArrayView1::from(h.coords()));
            for (j, t) in self.generators.iter().enumerate() {
                t.transpose_apply_into(h.coords(), &mut buf);
                stack
                    .row_mut(i * stride + j + 1)
                    .assign(&ndarray::ArrayView1::from(&buf[..]));
            }
        }
        let proj = project_rows(x, &stack, weight);
        let n = x.nrows();
        let mut keys = vec![0u64; proj.len()];
        for (row, chunk) in proj.axis_iter(Axis(0)).zip(keys.chunks_mut(n)) {
            for (k, &v) in chunk.iter_mut().zip(row.iter()) {
                *k = v.sort_key();
            }
            chunk.sort_unstable();
        }
        (0..dirs.len())
            .map(|i| {
                let base = &keys[i * stride * n..(i * stride + 1) * n];
                (0..k)
                    .map(|j| {
                        let at = (i * stride + j + 1) * n;
                        ks_lattice_keys(base, &keys[at..at + n])
                    })
                    .collect()
            })
            .collect()
    }

    /// Per-generator maximum over directions, in lattice units.
    fn per_generator_max(&self, x: ndarray::ArrayView2<'_, T>, dirs: &[Direction<T>]) -> Vec<u64> {
        let table = self.lattice_table(x, dirs);
        (0..self.k())
            .map(|j| table.iter().map(|row| row[j]).max().unwrap_or(0))
            .collect()
    }
}

fn check_directions<T: Scalar>(x: &Sample<T>, dirs: &[Direction<T>]) -> Result<()> {
    if dirs.is_empty() {
        return Err(Error::Empty("at least one direction is required"));
    }
    if let Some(h) = dirs.iter().find(|h| h.dim() != x.ncols()) {
        return Err(Error::DimensionMismatch {
            expected: x.ncols(),
            actual: h.dim(),
        });
    }
    if dirs.windows(2).any(|w| w[0].kind() != w[1].kind()) {
        return Err(Error::InvalidParameter("directions must share one kind".into()));
    }
    Ok(())
}

fn lattice_to_stat(lattice: u64, n: usize) -> f64 {
    lattice as f64 / (n as f64 * n as f64)
}

/// `D_{n,l} = max_{i,j} KS(<h_i, X>, <h_i, T_j X>)` on the full sample.
pub fn d_statistic<T: Scalar>(x: &Sample<T>, g: &GroupSpec<T>, dirs: &[Direction<T>]) -> Result<f64> {
    check_dims(x, g)?;
    check_directions(x, dirs)?;
    let lattice = PreparedGroup::new(g)
        .per_generator_max(x.data(), dirs)
        .into_iter()
        .max()
        .unwrap_or(0);
    Ok(lattice_to_stat(lattice, x.nrows()))
}

/// How a null replicate is generated from the observed sample.
#[derive(Clone, Copy)]
struct NullDraw<'a, T> {
    resample: bool,
    symmetrizer: Option<&'a GroupSampler<T>>,
}

/// Per-generator maxima of `count` null replicates, replicate `r` using
/// stream `r` of `seed`. Independent of the rayon thread count.
fn null_replicates<T: Scalar>(
    x: &Sample<T>,
    group: &PreparedGroup<'_, T>,
    sampler: DirectionSampler,
    directions: usize,
    count: usize,
    seed: RngSeed,
    draw: NullDraw<'_, T>,
) -> Result<Vec<Vec<u64>>> {
    let n = x.nrows();
    let d = x.ncols();
    let data = x.data();
    (0..count)
        .into_par_iter()
        .map(|r| {
            let mut rng: SimRng = seed.stream(r as u64);
            let mut xs = if draw.resample {
                let idx: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
                data.select(Axis(0), &idx)
            } else {
                data.to_owned()
            };
            if let Some(sym) = draw.symmetrizer {
                let mut scratch = vec![T::zero(); d];
                for mut row in xs.axis_iter_mut(Axis(0)) {
                    sym.apply_random(&mut rng, row.as_slice_mut().expect("standard layout"), &mut scratch);
                }
            }
            let dirs: Vec<Direction<T>> = sampler.draw_many(directions, &mut rng)?;
            Ok(group.per_generator_max(xs.view(), &dirs))
        })
        .collect()
}

/// Index (0-based) of the `ceil(q * len)`-th order statistic.
fn order_statistic_index(q: f64, len: usize) -> usize {
    let rank = (q * len as f64 - 1e-9).ceil().max(1.0) as usize;
    rank.min(len) - 1
}

/// Empirical `q`-quantile: the `ceil(q * len)`-th order statistic.
pub fn empirical_quantile(values: &[f64], q: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::Empty("quantile of an empty set"));
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    Ok(v[order_statistic_index(q, v.len())])
}

fn sampler_for<T: Scalar>(g: &GroupSpec<T>) -> Result<GroupSampler<T>> {
    GroupSampler::new(g, ENUMERATION_CAP)
}

/// Bootstrap replicates `D*_1..D*_B` of the maximum statistic.
pub fn bootstrap_distribution<T: Scalar>(x: &Sample<T>, g: &GroupSpec<T>, cfg: &ProcedureBConfig) -> Result<Vec<f64>> {
    Ok(bootstrap_lattice(x, g, cfg)?
        .into_iter()
        .map(|per_gen| lattice_to_stat(per_gen.into_iter().max().unwrap_or(0), x.nrows()))
        .collect())
}

fn bootstrap_lattice<T: Scalar>(x: &Sample<T>, g: &GroupSpec<T>, cfg: &ProcedureBConfig) -> Result<Vec<Vec<u64>>> {
    check_dims(x, g)?;
    check_b_config(cfg)?;
    let sym = match cfg.scheme {
        BootstrapScheme::Symmetrized => Some(sampler_for(g)?),
        BootstrapScheme::Plain => None,
    };
    null_replicates(
        x,
        &PreparedGroup::new(g),
        DirectionSampler::for_sample(x),
        cfg.directions,
        cfg.bootstrap,
        cfg.seed.derive(TAG_RESAMPLE),
        NullDraw {
            resample: true,
            symmetrizer: sym.as_ref(),
        },
    )
}

/// The `(1 - alpha)` empirical quantile of the bootstrap replicates.
pub fn bootstrap_critical_value<T: Scalar>(x: &Sample<T>, g: &GroupSpec<T>, cfg: &ProcedureBConfig) -> Result<f64> {
    empirical_quantile(&bootstrap_distribution(x, g, cfg)?, 1.0 - cfg.alpha)
}

fn check_b_config(cfg: &ProcedureBConfig) -> Result<()> {
    check_alpha(cfg.alpha)?;
    if cfg.directions == 0 {
        return Err(Error::InvalidParameter("need at least one direction".into()));
    }
    if cfg.bootstrap == 0 {
        return Err(Error::InvalidParameter("need at least one bootstrap replicate".into()));
    }
    Ok(())
}

/// Shared tail of procedure B and the permutation null: compare the
/// observed per-generator maxima with replicate maxima.
#[allow(clippy::too_many_arguments)]
fn resampling_report<T: Scalar>(
    procedure: Procedure,
    x: &Sample<T>,
    g: &GroupSpec<T>,
    alpha: f64,
    dirs: &[Direction<T>],
    observed: &[u64],
    replicates: &[Vec<u64>],
    config: ConfigEcho,
) -> TestReport {
    let n = x.nrows();
    let count = replicates.len();
    let observed_max = observed.iter().copied().max().unwrap_or(0);
    let mut maxima: Vec<u64> = replicates
        .iter()
        .map(|r| r.iter().copied().max().unwrap_or(0))
        .collect();
    maxima.sort_unstable();
    let critical = maxima[order_statistic_index(1.0 - alpha, count)];
    let p_of = |obs: u64, values: &mut dyn Iterator<Item = u64>| {
        values.filter(|&v| v >= obs).count() as f64 / count as f64
    };
    let per_generator = g
        .generators()
        .iter()
        .zip(observed)
        .enumerate()
        .map(|(j, (t, &obs))| GeneratorOutcome {
            label: t.label().to_string(),
            directions: (0..dirs.len()).collect(),
            statistic: lattice_to_stat(obs, n),
            threshold: lattice_to_stat(critical, n),
            p_value: Some(p_of(obs, &mut replicates.iter().map(|r| r[j]))),
            reject: obs > critical,
        })
        .collect();
    TestReport {
        schema_version: REPORT_SCHEMA_VERSION,
        procedure,
        group: g.name().to_string(),
        n,
        dim: x.ncols(),
        alpha,
        statistic: lattice_to_stat(observed_max, n),
        critical_value: lattice_to_stat(critical, n),
        p_value: Some(p_of(observed_max, &mut maxima.iter().copied())),
        overall_reject: observed_max > critical,
        per_generator,
        config,
        directions: dirs.iter().map(direction_to_f64).collect(),
    }
}

/// Multi-direction test calibrated by bootstrap. Generators need only be
/// invertible; the symmetrized scheme additionally needs a finite group.
pub fn test_procedure_b<T: Scalar>(x: &Sample<T>, g: &GroupSpec<T>, cfg: &ProcedureBConfig) -> Result<TestReport> {
    check_dims(x, g)?;
    check_b_config(cfg)?;
    let prepared = PreparedGroup::new(g);
    let sampler = DirectionSampler::for_sample(x);
    let dirs: Vec<Direction<T>> = sampler.draw_many(cfg.directions, &mut cfg.seed.derive(TAG_OBSERVED).rng())?;
    let observed = prepared.per_generator_max(x.data(), &dirs);
    let replicates = bootstrap_lattice(x, g, cfg)?;
    Ok(resampling_report(
        Procedure::B,
        x,
        g,
        cfg.alpha,
        &dirs,
        &observed,
        &replicates,
        ConfigEcho {
            directions: cfg.directions,
            replicates: Some(cfg.bootstrap),
            bootstrap_scheme: Some(cfg.scheme),
            split_sizes: None,
            share_direction: false,
            seeds: vec![cfg.seed.0],
        },
    ))
}

/// Exchangeability test for (rank-transformed) data: the null
/// distribution of `D_{n,l}` is built by independently moving each row by
/// a uniform element of the permutation group generated by `g`.
pub fn permutation_null_test<T: Scalar>(
    u: &Sample<T>,
    g: &GroupSpec<T>,
    cfg: &PermutationNullConfig,
) -> Result<TestReport> {
    check_dims(u, g)?;
    check_alpha(cfg.alpha)?;
    if !g.is_permutation_group() {
        return Err(Error::NotPermutationGroup {
            name: g.name().to_string(),
        });
    }
    if cfg.directions == 0 || cfg.replicates == 0 {
        return Err(Error::InvalidParameter(
            "need at least one direction and one replicate".into(),
        ));
    }
    let prepared = PreparedGroup::new(g);
    let sampler = DirectionSampler::for_sample(u);
    let dirs: Vec<Direction<T>> = sampler.draw_many(cfg.directions, &mut cfg.seed.derive(TAG_OBSERVED).rng())?;
    let observed = prepared.per_generator_max(u.data(), &dirs);
    let sym = sampler_for(g)?;
    let replicates = null_replicates(
        u,
        &prepared,
        sampler,
        cfg.directions,
        cfg.replicates,
        cfg.seed.derive(TAG_RESAMPLE),
        NullDraw {
            resample: false,
            symmetrizer: Some(&sym),
        },
    )?;
    Ok(resampling_report(
        Procedure::PermutationNull,
        u,
        g,
        cfg.alpha,
        &dirs,
        &observed,
        &replicates,
        ConfigEcho {
            directions: cfg.directions,
            replicates: Some(cfg.replicates),
            bootstrap_scheme: None,
            split_sizes: None,
            share_direction: false,
            seeds: vec![cfg.seed.0],
        },
    ))
}

/// A test procedure with everything but the seed fixed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "procedure", rename_all = "kebab-case")]
pub enum TestPlan {
    A {
        alpha: f64,
    },
    B {
        alpha: f64,
        directions: usize,
        bootstrap: usize,
        scheme: BootstrapScheme,
    },
    PermutationNull {
        alpha: f64,
        directions: usize,
        replicates: usize,
    },
}

impl TestPlan {
    pub fn alpha(&self) -> f64 {
        match *self {
            Self::A { alpha } | Self::B { alpha, .. } | Self::PermutationNull { alpha, .. } => alpha,
        }
    }

    pub fn run<T: Scalar>(&self, x: &Sample<T>, g: &GroupSpec<T>, seed: RngSeed) -> Result<TestReport> {
        match *self {
            Self::A { alpha } => test_procedure_a(x, g, &ProcedureAConfig::new(alpha, seed)),
            Self::B {
                alpha,
                directions,
                bootstrap,
                scheme,
            } => test_procedure_b(
                x,
                g,
                &ProcedureBConfig {
                    alpha,
                    directions,
                    bootstrap,
                    seed,
                    scheme,
                },
            ),
            Self::PermutationNull {
                alpha,
                directions,
                replicates,
            } => permutation_null_test(
                x,
                g,
                &PermutationNullConfig {
                    alpha,
                    directions,
                    replicates,
                    seed,
                },
            ),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{apply_map, closure, permutation_generators, signed_permutation_generators};
    use crate::ks::ks_two_sample;
    use crate::projection::sample_sphere_direction;
    use proptest::prelude::*;
    use rand::Rng;

    fn normal_sample(n: usize, scales: &[f64], seed: u64) -> Sample<f64> {
        let mut rng = RngSeed(seed).rng();
        let data = Array2::from_shape_fn((n, scales.len()), |(_, j)| scales[j] * f64::standard_normal(&mut rng));
        Sample::new(data)
    }

    fn identity_group(d: usize) -> GroupSpec<f64> {
        GroupSpec::new("trivial", vec![LinearMap::identity(d).unwrap()]).unwrap()
    }

    #[test]
    fn split_properties() {
        let x = normal_sample(1000, &[1.0, 1.0], 1);
        let (a, b) = split_sample(&x, &mut RngSeed(2).rng()).unwrap();
        assert_eq!(a.nrows() + b.nrows(), 1000);
        assert!((a.nrows() as i64 - 500).abs() < 80);
        let (a2, _) = split_sample(&x, &mut RngSeed(2).rng()).unwrap();
        assert_eq!(a, a2);
        // Union is the input multiset.
        let mut all: Vec<f64> = a.data().iter().chain(b.data().iter()).copied().collect();
        let mut orig: Vec<f64> = x.data().iter().copied().collect();
        all.sort_by(f64::total_cmp);
        orig.sort_by(f64::total_cmp);
        assert_eq!(all, orig);
        let one = normal_sample(1, &[1.0, 1.0], 3);
        assert!(split_sample(&one, &mut RngSeed(2).rng()).is_err());
        let two = normal_sample(2, &[1.0, 1.0], 3);
        let (p, q) = split_sample(&two, &mut RngSeed(9).rng()).unwrap();
        assert_eq!((p.nrows(), q.nrows()), (1, 1));
    }

    #[test]
    fn split_sizes_concentrate() {
        // |n1 - 500| < 80 is a > 5 sigma event for Binomial(1000, 1/2).
        let x = normal_sample(1000, &[1.0, 1.0], 4);
        for s in 0..200 {
            let (a, _) = split_sample(&x, &mut RngSeed(s).rng()).unwrap();
            assert!((a.nrows() as i64 - 500).abs() < 80);
        }
    }

    #[test]
    fn d_statistic_hand_example() {
        let x = Sample::from_rows(&[vec![0.0, 1.0], vec![2.0, 0.0], vec![5.0, 5.0]]).unwrap();
        let g = permutation_generators::<f64>(2).unwrap();
        let e1 = Direction::new(vec![1.0, 0.0], DirectionKind::Sphere).unwrap();
        let d = d_statistic(&x, &g, &[e1]).unwrap();
        assert!((d - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(ks_two_sample(&[0.0, 2.0, 5.0], &[1.0, 0.0, 5.0]).unwrap(), d);
    }

    #[test]
    fn d_statistic_identity_is_zero_and_single_matches_ks() {
        let x = normal_sample(50, &[1.0, 2.0, 3.0], 5);
        let mut rng = RngSeed(6).rng();
        let dirs = DirectionSampler::Sphere { dim: 3 }.draw_many(5, &mut rng).unwrap();
        assert_eq!(d_statistic(&x, &identity_group(3), &dirs).unwrap(), 0.0);

        let g = permutation_generators::<f64>(3).unwrap();
        let single = GroupSpec::new("one", vec![g.generators()[1].clone()]).unwrap();
        let h = &dirs[0];
        let direct = ks_two_sample(
            &project(&x, h).unwrap(),
            &project(&apply_map(&single.generators()[0], &x).unwrap(), h).unwrap(),
        )
        .unwrap();
        assert_eq!(d_statistic(&x, &single, &dirs[..1]).unwrap(), direct);
        assert!(d_statistic(&x, &g, &[]).is_err());
    }

    #[test]
    fn d_statistic_zero_on_group_closed_multiset() {
        // Integer rows and directions with entries in {0, +-1/2, +-1} keep
        // every projection exact, so equal values compare equal.
        let g = signed_permutation_generators::<f64>(4).unwrap();
        let elems = closure(&g, 1000).unwrap();
        let base = Sample::from_rows(&[vec![1.0, -2.0, 3.0, 0.0], vec![5.0, 4.0, -1.0, 2.0]]).unwrap();
        let mut rows = Vec::new();
        for e in &elems {
            let y = apply_map(e, &base).unwrap();
            rows.extend(y.data().rows().into_iter().map(|r| r.to_vec()));
        }
        let x = Sample::from_rows(&rows).unwrap();
        let dirs: Vec<Direction<f64>> = [
            vec![0.5, 0.5, 0.5, 0.5],
            vec![0.5, -0.5, 0.5, 0.5],
            vec![-0.5, 0.5, -0.5, 0.5],
            vec![0.0, 1.0, 0.0, 0.0],
        ]
        .into_iter()
        .map(|c| Direction::new(c, DirectionKind::Sphere).unwrap())
        .collect();
        assert_eq!(d_statistic(&x, &g, &dirs).unwrap(), 0.0);
        // Dropping one orbit point breaks the symmetry.
        let broken = Sample::from_rows(&rows[1..]).unwrap();
        assert!(d_statistic(&broken, &g, &dirs).unwrap() > 0.0);
    }

    #[test]
    fn quantile_convention() {
        let v: Vec<f64> = (1..=20).map(f64::from).collect();
        assert_eq!(empirical_quantile(&v, 0.95).unwrap(), 19.0);
        assert_eq!(empirical_quantile(&v, 1.0).unwrap(), 20.0);
        assert_eq!(empirical_quantile(&v, 1.0 - 1e-12).unwrap(), 20.0);
        assert_eq!(empirical_quantile(&v, 0.0).unwrap(), 1.0);
        let b: Vec<f64> = (1..=500).map(f64::from).collect();
        assert_eq!(empirical_quantile(&b, 1.0 - 0.05).unwrap(), 475.0);
        assert!(empirical_quantile(&[], 0.5).is_err());
    }

    #[test]
    fn procedure_a_report_shape() {
        let x = normal_sample(200, &[1.0, 1.0, 1.0], 9);
        let g = signed_permutation_generators::<f64>(3).unwrap();
        let cfg = ProcedureAConfig::new(0.05, RngSeed(10));
        let r = test_procedure_a(&x, &g, &cfg).unwrap();
        assert_eq!(r.per_generator.len(), 3);
        assert_eq!(r.directions.len(), 3);
        let (n1, n2) = r.config.split_sizes.unwrap();
        assert_eq!(n1 + n2, 200);
        let c = ks_critical_value(n1, n2, 0.05 / 3.0).unwrap();
        assert!(r.per_generator.iter().all(|o| o.threshold == c));
        assert_eq!(r.overall_reject, r.per_generator.iter().any(|o| o.reject));
        assert_eq!(r, test_procedure_a(&x, &g, &cfg).unwrap());
    }

    #[test]
    fn procedure_a_preconditions() {
        let x = normal_sample(100, &[1.0, 1.0], 11);
        let stretch = LinearMap::from_rows(&[vec![2.0, 0.0], vec![0.0, 1.0]], "stretch").unwrap();
        let g = GroupSpec::new("stretch", vec![stretch]).unwrap();
        let cfg = ProcedureAConfig::new(0.05, RngSeed(1));
        assert!(matches!(test_procedure_a(&x, &g, &cfg), Err(Error::NotOrthogonal { .. })));
        let small = normal_sample(10, &[1.0, 1.0], 11);
        let p = permutation_generators::<f64>(2).unwrap();
        assert!(test_procedure_a(&small, &p, &cfg).is_err());
        let g3 = permutation_generators::<f64>(3).unwrap();
        assert!(matches!(
            test_procedure_a(&x, &g3, &cfg),
            Err(Error::DimensionMismatch { .. })
        ));
        let bad_alpha = ProcedureAConfig::new(1.5, RngSeed(1));
        assert!(test_procedure_a(&x, &p, &bad_alpha).is_err());
    }

    #[test]
    fn procedure_a_power_for_unequal_scales_matches_direct_simulation() {
        let g = permutation_generators::<f64>(2).unwrap();
        let reps = 500;
        let mut rejections = 0;
        for rep in 0..reps {
            let x = normal_sample(1000, &[1.0, 3.0], 1000 + rep);
            let r = test_procedure_a(&x, &g, &ProcedureAConfig::new(0.05, RngSeed(rep))).unwrap();
            rejections += usize::from(r.overall_reject);
        }
        let rate = rejections as f64 / reps as f64;

        // Oracle: at angle t the two halves project to N(0, cos^2 t + 9 sin^2 t)
        // and N(0, sin^2 t + 9 cos^2 t); draw those directly.
        let mut rng = RngSeed(99).rng();
        let mut oracle = 0;
        for _ in 0..reps {
            let n1 = (0..1000).filter(|_| rng.random::<bool>()).count();
            let n2 = 1000 - n1;
            let t = rng.random::<f64>() * std::f64::consts::TAU;
            let (c2, s2) = (t.cos().powi(2), t.sin().powi(2));
            let (sd1, sd2) = ((c2 + 9.0 * s2).sqrt(), (s2 + 9.0 * c2).sqrt());
            let a: Vec<f64> = (0..n1).map(|_| sd1 * f64::standard_normal(&mut rng)).collect();
            let b: Vec<f64> = (0..n2).map(|_| sd2 * f64::standard_normal(&mut rng)).collect();
            let stat = ks_two_sample(&a, &b).unwrap();
            oracle += usize::from(stat > ks_critical_value(n1, n2, 0.05).unwrap());
        }
        let oracle = oracle as f64 / reps as f64;
        let se = (2.0 * oracle * (1.0 - oracle) / reps as f64).sqrt();
        assert!((rate - oracle).abs() < 4.0 * se, "procedure A {rate}, oracle {oracle}");
        // Power is lost only for directions near the diagonals.
        assert!(rate > 0.75, "power {rate}");
    }

    #[test]
    fn procedure_a_size_for_spherical_gaussian() {
        let g = signed_permutation_generators::<f64>(3).unwrap();
        let reps = 2000;
        let mut rejections = 0;
        for rep in 0..reps {
            let x = normal_sample(200, &[1.0, 1.0, 1.0], 50_000 + rep);
            let r = test_procedure_a(&x, &g, &ProcedureAConfig::new(0.05, RngSeed(rep))).unwrap();
            rejections += usize::from(r.overall_reject);
        }
        let rate = rejections as f64 / reps as f64;
        assert!((0.05 / 3.0 - 0.012..=0.05 + 0.012).contains(&rate), "size {rate}");
    }

    #[test]
    fn identity_generator_never_rejects_in_b() {
        let x = normal_sample(100, &[1.0, 1.0], 12);
        let cfg = ProcedureBConfig::new(0.05, 5, 50, RngSeed(13));
        let r = test_procedure_b(&x, &identity_group(2), &cfg).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.critical_value, 0.0);
        assert!(!r.overall_reject);
        assert_eq!(r.p_value, Some(1.0));
    }

    #[test]
    fn bootstrap_critical_value_range_and_alpha_limit() {
        let x = normal_sample(80, &[1.0, 1.0, 1.0], 14);
        let g = permutation_generators::<f64>(3).unwrap();
        let mut cfg = ProcedureBConfig::new(0.05, 4, 60, RngSeed(15));
        let c = bootstrap_critical_value(&x, &g, &cfg).unwrap();
        assert!((0.0..=1.0).contains(&c));
        cfg.alpha = 1e-9;
        let dist = bootstrap_distribution(&x, &g, &cfg).unwrap();
        let max = dist.iter().copied().fold(0.0, f64::max);
        assert_eq!(bootstrap_critical_value(&x, &g, &cfg).unwrap(), max);
    }

    #[test]
    fn procedure_b_is_reproducible_and_orders_agree() {
        let x = normal_sample(120, &[1.0, 1.5, 1.0], 16);
        let g = permutation_generators::<f64>(3).unwrap();
        let cfg = ProcedureBConfig::new(0.05, 8, 100, RngSeed(17));
        let r1 = test_procedure_b(&x, &g, &cfg).unwrap();
        let r2 = test_procedure_b(&x, &g, &cfg).unwrap();
        assert_eq!(r1.to_json().unwrap(), r2.to_json().unwrap());
        assert_eq!(r1.overall_reject, r1.per_generator.iter().any(|o| o.reject));
        assert!(r1.to_string().contains("reject H0"));
    }

    #[test]
    fn bootstrap_is_thread_count_invariant() {
        let x = normal_sample(100, &[1.0, 1.0, 1.0], 18);
        let g = signed_permutation_generators::<f64>(3).unwrap();
        let cfg = ProcedureBConfig::new(0.05, 5, 40, RngSeed(19));
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let a = one.install(|| bootstrap_distribution(&x, &g, &cfg).unwrap());
        let b = four.install(|| bootstrap_distribution(&x, &g, &cfg).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn procedure_b_handles_non_orthogonal_finite_group() {
        // An order-3 map that is not orthogonal: conjugate of a 120 degree rotation.
        let (s, c) = (120f64.to_radians().sin(), 120f64.to_radians().cos());
        let rot = LinearMap::from_rows(&[vec![c, -s], vec![s, c]], "r").unwrap();
        let p = LinearMap::from_rows(&[vec![2.0, 1.0], vec![0.0, 1.0]], "p").unwrap();
        let t = p.compose(&rot).unwrap().compose(&p.inverse().unwrap()).unwrap();
        assert!(!t.is_orthogonal(1e-9));
        let g = GroupSpec::new("C3'", vec![t]).unwrap();
        let x = normal_sample(150, &[1.0, 1.0], 20);
        let cfg = ProcedureBConfig::new(0.05, 5, 50, RngSeed(21));
        let r = test_procedure_b(&x, &g, &cfg).unwrap();
        assert!(r.critical_value > 0.0);
        assert!(test_procedure_a(&x, &g, &ProcedureAConfig::new(0.05, RngSeed(1))).is_err());
    }

    #[test]
    fn permutation_null_rejects_signed_group_and_small_p() {
        let x = normal_sample(60, &[1.0, 1.0, 1.0], 22);
        let g = signed_permutation_generators::<f64>(3).unwrap();
        let cfg = PermutationNullConfig {
            alpha: 0.05,
            directions: 5,
            replicates: 50,
            seed: RngSeed(23),
        };
        assert!(matches!(
            permutation_null_test(&x, &g, &cfg),
            Err(Error::NotPermutationGroup { .. })
        ));
        // Very unequal columns: the observed statistic beats every replicate.
        let y = normal_sample(300, &[1.0, 1.0, 1.0], 24);
        let shifted = Sample::new(y.data().mapv(|v| v) + &ndarray::arr1(&[0.0, 0.0, 10.0]));
        let p = permutation_generators::<f64>(3).unwrap();
        let r = permutation_null_test(&shifted, &p, &cfg).unwrap();
        assert_eq!(r.p_value, Some(0.0));
        assert!(r.overall_reject);
    }

    #[test]
    fn permutation_null_p_values_are_roughly_uniform() {
        let g = permutation_generators::<f64>(3).unwrap();
        let runs = 200;
        let mut ps: Vec<f64> = (0..runs)
            .map(|run| {
                let mut rng = RngSeed(7000 + run).rng();
                let data = Array2::from_shape_fn((300, 3), |_| rng.random::<f64>());
                let cfg = PermutationNullConfig {
                    alpha: 0.05,
                    directions: 20,
                    replicates: 99,
                    seed: RngSeed(run),
                };
                permutation_null_test(&Sample::new(data), &g, &cfg).unwrap().p_value.unwrap()
            })
            .collect();
        ps.sort_by(f64::total_cmp);
        let dist = ps
            .iter()
            .enumerate()
            .map(|(i, &p)| (p - i as f64 / runs as f64).abs().max((p - (i + 1) as f64 / runs as f64).abs()))
            .fold(0.0, f64::max);
        eprintln!("KS distance to uniform {dist}");
        assert!(dist < 0.1, "KS distance to uniform {dist}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn d_statistic_is_order_free(seed in any::<u64>(), shift in 1usize..5) {
            let x = normal_sample(30, &[1.0, 2.0, 0.5], seed);
            let g = signed_permutation_generators::<f64>(3).unwrap();
            let mut rng = RngSeed(seed ^ 1).rng();
            let mut dirs: Vec<Direction<f64>> =
                (0..5).map(|_| sample_sphere_direction(3, &mut rng).unwrap()).collect();
            let d = d_statistic(&x, &g, &dirs).unwrap();
            let len = dirs.len();
            dirs.rotate_left(shift % len);
            let mut gens = g.generators().to_vec();
            gens.reverse();
            let g2 = GroupSpec::new("reordered", gens).unwrap();
            prop_assert_eq!(d, d_statistic(&x, &g2, &dirs).unwrap());
        }

        #[test]
        fn d_statistic_matches_explicit_route(seed in any::<u64>()) {
            let x = normal_sample(25, &[1.0, 1.0, 3.0], seed);
            let g = signed_permutation_generators::<f64>(3).unwrap();
            let dirs = DirectionSampler::Sphere { dim: 3 }.draw_many(3, &mut RngSeed(seed).rng()).unwrap();
            let mut explicit = 0.0f64;
            for h in &dirs {
                for t in g.generators() {
                    let a = project(&x, h).unwrap();
                    let b = project(&apply_map(t, &x).unwrap(), h).unwrap();
                    explicit = explicit.max(ks_two_sample(&a, &b).unwrap());
                }
            }
            prop_assert_eq!(explicit, d_statistic(&x, &g, &dirs).unwrap());
        }
    }
}
