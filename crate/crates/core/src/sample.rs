use ndarray::{Array2, ArrayView1, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Column layout of a discretized functional sample: `components` curves,
/// each observed on the same `grid` equispaced points, stored
/// component-major (component 0 occupies columns `0..grid`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FunctionalLayout {
    pub components: usize,
    pub grid: usize,
}

impl FunctionalLayout {
    pub fn new(components: usize, grid: usize) -> Result<Self> {
        if components == 0 || grid < 2 {
            return Err(Error::InvalidParameter(format!(
                "functional layout needs components >= 1 and grid >= 2 (got {components}, {grid})"
            )));
        }
        Ok(Self { components, grid })
    }

    pub fn width(&self) -> usize {
        self.components * self.grid
    }
}

/// An `n x d` data matrix, one observation per row.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample<T> {
    data: Array2<T>,
    layout: Option<FunctionalLayout>,
}

impl<T: Scalar> Sample<T> {
    pub fn new(data: Array2<T>) -> Self {
        Self { data, layout: None }
    }

    pub fn functional(data: Array2<T>, layout: FunctionalLayout) -> Result<Self> {
        if data.ncols() != layout.width() {
            return Err(Error::DimensionMismatch {
                expected: layout.width(),
                actual: data.ncols(),
            });
        }
        Ok(Self {
            data,
            layout: Some(layout),
        })
    }

    /// Builds a sample from row vectors; all rows must share one length.
    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let n = rows.len();
        let d = rows.first().map(Vec::len).unwrap_or(0);
        let mut flat = Vec::with_capacity(n * d);
        for row in rows {
            if row.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    actual: row.len(),
                });
            }
            flat.extend_from_slice(row);
        }
        let data = Array2::from_shape_vec((n, d), flat).expect("shape checked");
        Ok(Self::new(data))
    }

    pub fn nrows(&self) -> usize {
        self.data.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.data.ncols()
    }

    pub fn data(&self) -> ArrayView2<'_, T> {
        self.data.view()
    }

    pub fn into_data(self) -> Array2<T> {
        self.data
    }

    pub fn row(&self, i: usize) -> ArrayView1<'_, T> {
        self.data.row(i)
    }

    pub fn layout(&self) -> Option<FunctionalLayout> {
        self.layout
    }

    /// Rows at `indices`, in that order (repeats allowed).
    pub fn select_rows(&self, indices: &[usize]) -> Self {
        Self {
            data: self.data.select(Axis(0), indices),
            layout: self.layout,
        }
    }

    /// The first `len` rows.
    pub fn prefix(&self, len: usize) -> Self {
        Self {
            data: self.data.slice(ndarray::s![..len, ..]).to_owned(),
            layout: self.layout,
        }
    }

    /// Same data with a different (or no) functional layout.
    pub fn with_layout(self, layout: Option<FunctionalLayout>) -> Result<Self> {
        match layout {
            Some(l) => Self::functional(self.data, l),
            None => Ok(Self::new(self.data)),
        }
    }

    pub fn map_scalar<U: Scalar>(&self) -> Sample<U> {
        Sample {
            data: self.data.mapv(|x| U::of(x.as_f64())),
            layout: self.layout,
        }
    }
}
