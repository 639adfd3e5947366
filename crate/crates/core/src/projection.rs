//! Random directions and one-dimensional projections.
//!
//! Finite-dimensional samples are projected on directions uniform on the
//! unit sphere. Functional samples (see
//! [`FunctionalLayout`](crate::sample::FunctionalLayout)) are projected on
//! discretized standard Brownian paths, one independent path per
//! component, with the `L^2[0,1]` inner product approximated by a left
//! Riemann sum of weight `1/grid`.

use ndarray::{Array2, ArrayView2};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::LinearMap;
use crate::sample::{FunctionalLayout, Sample};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum DirectionKind {
    Sphere,
    Brownian { components: usize, grid: usize },
}

impl DirectionKind {
    /// Quadrature weight applied to the Euclidean dot product.
    pub fn weight<T: Scalar>(&self) -> T {
        match self {
            Self::Sphere => T::one(),
            Self::Brownian { grid, .. } => T::one() / T::of_usize(*grid),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Direction<T> {
    coords: Vec<T>,
    kind: DirectionKind,
}

impl<T: Scalar> Direction<T> {
    /// Wraps raw coordinates; sphere directions must have unit norm.
    pub fn new(coords: Vec<T>, kind: DirectionKind) -> Result<Self> {
        match kind {
            DirectionKind::Sphere => {
                let norm = coords.iter().map(|&c| c * c).sum::<T>().sqrt();
                if (norm - T::one()).abs() > T::of(1e-6) {
                    return Err(Error::InvalidParameter(format!(
                        "sphere direction has norm {norm}"
                    )));
                }
            }
            DirectionKind::Brownian { components, grid } => {
                if coords.len() != components * grid {
                    return Err(Error::DimensionMismatch {
                        expected: components * grid,
                        actual: coords.len(),
                    });
                }
            }
        }
        Ok(Self { coords, kind })
    }

    pub fn coords(&self) -> &[T] {
        &self.coords
    }

    pub fn kind(&self) -> DirectionKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    /// `T^T h`, kept unnormalized, so that
    /// `project(apply_map(T, X), h) == project(X, h.pulled_back(T))`.
    pub fn pulled_back(&self, map: &LinearMap<T>) -> Result<Self> {
        if map.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: map.dim(),
                actual: self.dim(),
            });
        }
        Ok(Self {
            coords: map.transpose_apply(&self.coords),
            kind: self.kind,
        })
    }
}

/// A uniform direction on the unit sphere of `R^d`: `d` standard normals,
/// normalized (redrawn in the null event of an all-zero draw).
pub fn sample_sphere_direction<T: Scalar, R: Rng + ?Sized>(d: usize, rng: &mut R) -> Result<Direction<T>> {
    if d < 2 {
        return Err(Error::Dimension(format!("direction dimension must be >= 2, got {d}")));
    }
    Ok(Direction {
        coords: sphere_coords(d, rng),
        kind: DirectionKind::Sphere,
    })
}

fn sphere_coords<T: Scalar, R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<T> {
    loop {
        let mut v: Vec<T> = (0..d).map(|_| T::standard_normal(rng)).collect();
        let norm = v.iter().map(|&c| c * c).sum::<T>().sqrt();
        if norm > T::zero() {
            v.iter_mut().for_each(|c| *c = *c / norm);
            return v;
        }
    }
}

/// Independent standard Brownian paths, one per component, observed at
/// `t_i = i/grid`, `i = 1..=grid`, concatenated component-major.
pub fn sample_brownian_direction<T: Scalar, R: Rng + ?Sized>(
    components: usize,
    grid: usize,
    rng: &mut R,
) -> Result<Direction<T>> {
    FunctionalLayout::new(components, grid)?;
    Ok(Direction {
        coords: brownian_coords(components, grid, rng),
        kind: DirectionKind::Brownian { components, grid },
    })
}

fn brownian_coords<T: Scalar, R: Rng + ?Sized>(components: usize, grid: usize, rng: &mut R) -> Vec<T> {
    let step_sd = T::one() / T::of_usize(grid).sqrt();
    let mut coords = Vec::with_capacity(components * grid);
    for _ in 0..components {
        let mut w = T::zero();
        for _ in 0..grid {
            w = w + step_sd * T::standard_normal(rng);
            coords.push(w);
        }
    }
    coords
}

/// Draws directions of the kind matching a sample's layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DirectionSampler {
    Sphere { dim: usize },
    Brownian { components: usize, grid: usize },
}

impl DirectionSampler {
    pub fn for_sample<T: Scalar>(x: &Sample<T>) -> Self {
        match x.layout() {
            Some(l) => Self::Brownian {
                components: l.components,
                grid: l.grid,
            },
            None => Self::Sphere { dim: x.ncols() },
        }
    }

    pub fn dim(&self) -> usize {
        match *self {
            Self::Sphere { dim } => dim,
            Self::Brownian { components, grid } => components * grid,
        }
    }

    pub fn draw<T: Scalar, R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Direction<T>> {
        match *self {
            Self::Sphere { dim } => sample_sphere_direction(dim, rng),
            Self::Brownian { components, grid } => sample_brownian_direction(components, grid, rng),
        }
    }

    pub fn draw_many<T: Scalar, R: Rng + ?Sized>(&self, count: usize, rng: &mut R) -> Result<Vec<Direction<T>>> {
        (0..count).map(|_| self.draw(rng)).collect()
    }
}

/// `<X_i, h>` for every row `X_i` (weighted by `1/grid` for Brownian
/// directions).
pub fn project<T: Scalar>(x: &Sample<T>, h: &Direction<T>) -> Result<Vec<T>> {
    if h.dim() != x.ncols() {
        return Err(Error::DimensionMismatch {
            expected: x.ncols(),
            actual: h.dim(),
        });
    }
    let w = h.kind.weight::<T>();
    Ok(x.data()
        .rows()
        .into_iter()
        .map(|row| row.iter().zip(&h.coords).map(|(&a, &b)| a * b).sum::<T>() * w)
        .collect())
}

/// Projects `x` on many directions at once. `dirs` is `m x d`, one
/// direction per row; the result is `m x n`, one projected sample per row.
pub(crate) fn project_rows<T: Scalar>(x: ArrayView2<'_, T>, dirs: &Array2<T>, weight: T) -> Array2<T> {
    let mut out = dirs.dot(&x.t());
    if weight != T::one() {
        out.mapv_inplace(|v| v * weight);
    }
    out
}

/// Dumps directions as CSV rows: index, kind, coordinates.
pub fn write_directions_csv<T: Scalar, W: std::io::Write>(dirs: &[Direction<T>], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().flexible(true).from_writer(out);
    for (i, h) in dirs.iter().enumerate() {
        let kind = match h.kind {
            DirectionKind::Sphere => "sphere".to_string(),
            DirectionKind::Brownian { components, grid } => format!("brownian:{components}x{grid}"),
        };
        let mut rec = vec![i.to_string(), kind];
        rec.extend(h.coords.iter().map(|c| format!("{:e}", c.as_f64())));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}
