//! Linear maps, generator sets, and the built-in permutation and
//! signed-permutation groups.
//!
//! Testing invariance under a group reduces to testing invariance under
//! each generator, so a [`GroupSpec`] only ever stores generators. The
//! full group is materialized by [`closure`] when a finite listing is
//! needed (tests, small custom groups).

use std::collections::{HashMap, HashSet, VecDeque};
use std::fs;
use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sample::Sample;
use crate::scalar::Scalar;

/// Entrywise tolerance used for matrix identity (closure dedup, structure
/// detection, invertibility).
pub const MATRIX_TOL: f64 = 1e-9;

/// A signed permutation in compact form: `T e_j = sign[j] * e_{perm[j]}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SignedPermutation {
    perm: Vec<usize>,
    sign: Vec<i8>,
}

impl SignedPermutation {
    pub fn new(perm: Vec<usize>, sign: Vec<i8>) -> Result<Self> {
        let d = perm.len();
        if sign.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                actual: sign.len(),
            });
        }
        let mut seen = vec![false; d];
        for &p in &perm {
            if p >= d || std::mem::replace(&mut seen[p], true) {
                return Err(Error::InvalidParameter(format!("{perm:?} is not a permutation")));
            }
        }
        if sign.iter().any(|&s| s != 1 && s != -1) {
            return Err(Error::InvalidParameter("signs must be +1 or -1".into()));
        }
        Ok(Self { perm, sign })
    }

    pub fn identity(d: usize) -> Self {
        Self {
            perm: (0..d).collect(),
            sign: vec![1; d],
        }
    }

    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    /// Image index of basis vector `j`.
    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    pub fn sign(&self) -> &[i8] {
        &self.sign
    }

    pub fn is_unsigned(&self) -> bool {
        self.sign.iter().all(|&s| s == 1)
    }

    /// `out = T x`.
    pub fn apply_into<T: Scalar>(&self, x: &[T], out: &mut [T]) {
        for (j, (&p, &s)) in self.perm.iter().zip(&self.sign).enumerate() {
            out[p] = if s > 0 { x[j] } else { -x[j] };
        }
    }

    /// `out = T^T v`.
    pub fn transpose_apply_into<T: Scalar>(&self, v: &[T], out: &mut [T]) {
        for (j, (&p, &s)) in self.perm.iter().zip(&self.sign).enumerate() {
            out[j] = if s > 0 { v[p] } else { -v[p] };
        }
    }

    fn to_matrix<T: Scalar>(&self) -> Array2<T> {
        let d = self.dim();
        let mut m = Array2::zeros((d, d));
        for (j, (&p, &s)) in self.perm.iter().zip(&self.sign).enumerate() {
            m[[p, j]] = if s > 0 { T::one() } else { -T::one() };
        }
        m
    }

    fn detect<T: Scalar>(m: &Array2<T>) -> Option<Self> {
        let d = m.nrows();
        let tol = T::of(MATRIX_TOL);
        let mut perm = vec![usize::MAX; d];
        let mut sign = vec![0i8; d];
        let mut row_used = vec![false; d];
        for j in 0..d {
            for i in 0..d {
                let v = m[[i, j]];
                if v.abs() <= tol {
                    continue;
                }
                let s = if (v - T::one()).abs() <= tol {
                    1
                } else if (v + T::one()).abs() <= tol {
                    -1
                } else {
                    return None;
                };
                if perm[j] != usize::MAX || row_used[i] {
                    return None;
                }
                perm[j] = i;
                sign[j] = s;
                row_used[i] = true;
            }
            if perm[j] == usize::MAX {
                return None;
            }
        }
        Some(Self { perm, sign })
    }
}

/// An invertible linear self-map of `R^d`, `d >= 2`.
#[derive(Debug, Clone)]
pub struct LinearMap<T> {
    entries: Array2<T>,
    label: String,
    signed_perm: Option<SignedPermutation>,
}

impl<T: Scalar> LinearMap<T> {
    /// Validates shape (square, `d >= 2`) and invertibility
    /// (`|det| > 1e-9`).
    pub fn new(entries: Array2<T>, label: impl Into<String>) -> Result<Self> {
        let label = label.into();
        let (r, c) = entries.dim();
        if r != c {
            return Err(Error::Dimension(format!(
                "linear map `{label}` is {r}x{c}, expected square"
            )));
        }
        if r < 2 {
            return Err(Error::Dimension(format!(
                "linear map `{label}` has dimension {r}, expected >= 2"
            )));
        }
        if entries.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "linear map `{label}` has non-finite entries"
            )));
        }
        let det = determinant(&entries).as_f64();
        if det.abs() <= MATRIX_TOL {
            return Err(Error::Singular { label, det });
        }
        let signed_perm = SignedPermutation::detect(&entries);
        Ok(Self {
            entries,
            label,
            signed_perm,
        })
    }

    pub fn from_rows(rows: &[Vec<T>], label: impl Into<String>) -> Result<Self> {
        let d = rows.len();
        let mut flat = Vec::with_capacity(d * d);
        for row in rows {
            if row.len() != d {
                return Err(Error::Dimension(format!(
                    "matrix row has length {}, expected {d}",
                    row.len()
                )));
            }
            flat.extend_from_slice(row);
        }
        let entries = Array2::from_shape_vec((d, d), flat).expect("shape checked");
        Self::new(entries, label)
    }

    pub fn identity(d: usize) -> Result<Self> {
        Self::new(Array2::eye(d), "I")
    }

    pub fn from_signed_permutation(sp: SignedPermutation, label: impl Into<String>) -> Result<Self> {
        let m = sp.to_matrix();
        let map = Self::new(m, label)?;
        debug_assert_eq!(map.signed_perm.as_ref(), Some(&sp));
        Ok(map)
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &Array2<T> {
        &self.entries
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// The compact form when this map is a signed permutation matrix.
    pub fn as_signed_permutation(&self) -> Option<&SignedPermutation> {
        self.signed_perm.as_ref()
    }

    /// True when `max |T^T T - I| <= tol`.
    pub fn is_orthogonal(&self, tol: f64) -> bool {
        if self.signed_perm.is_some() {
            return true;
        }
        let gram = self.entries.t().dot(&self.entries);
        let tol = T::of(tol);
        gram.indexed_iter().all(|((i, j), &g)| {
            let target = if i == j { T::one() } else { T::zero() };
            (g - target).abs() <= tol
        })
    }

    /// Matrix product `self * other` (apply `other` first).
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: other.dim(),
            });
        }
        Self::new(
            self.entries.dot(&other.entries),
            format!("{}*{}", self.label, other.label),
        )
    }

    pub fn transpose(&self) -> Self {
        let entries = self.entries.t().to_owned();
        let signed_perm = SignedPermutation::detect(&entries);
        Self {
            entries,
            label: format!("{}^T", self.label),
            signed_perm,
        }
    }

    /// Inverse: the transpose for orthogonal maps, an LU solve otherwise.
    pub fn inverse(&self) -> Result<Self> {
        if self.is_orthogonal(MATRIX_TOL) {
            return Ok(self.transpose().with_label(format!("{}^-1", self.label)));
        }
        let inv = lu_inverse(&self.entries).ok_or_else(|| Error::Singular {
            label: self.label.clone(),
            det: 0.0,
        })?;
        Self::new(inv, format!("{}^-1", self.label))
    }

    /// `out = T x`.
    pub fn apply_into(&self, x: &[T], out: &mut [T]) {
        if let Some(sp) = &self.signed_perm {
            return sp.apply_into(x, out);
        }
        for (o, row) in out.iter_mut().zip(self.entries.rows()) {
            *o = row.iter().zip(x).map(|(&a, &b)| a * b).sum();
        }
    }

    /// `out = T^T v`.
    pub fn transpose_apply_into(&self, v: &[T], out: &mut [T]) {
        if let Some(sp) = &self.signed_perm {
            return sp.transpose_apply_into(v, out);
        }
        for (j, o) in out.iter_mut().enumerate() {
            *o = self
                .entries
                .column(j)
                .iter()
                .zip(v)
                .map(|(&a, &b)| a * b)
                .sum();
        }
    }

    pub fn transpose_apply(&self, v: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); self.dim()];
        self.transpose_apply_into(v, &mut out);
        out
    }

    fn key(&self) -> Vec<i64> {
        self.entries
            .iter()
            .map(|x| (x.as_f64() / MATRIX_TOL).round() as i64)
            .collect()
    }
}

impl<T: Scalar> PartialEq for LinearMap<T> {
    /// Entrywise equality within [`MATRIX_TOL`]; labels are ignored.
    fn eq(&self, other: &Self) -> bool {
        let tol = T::of(MATRIX_TOL);
        self.entries.dim() == other.entries.dim()
            && self
                .entries
                .iter()
                .zip(other.entries.iter())
                .all(|(&a, &b)| (a - b).abs() <= tol)
    }
}

/// Applies `map` to every row of `x`.
pub fn apply_map<T: Scalar>(map: &LinearMap<T>, x: &Sample<T>) -> Result<Sample<T>> {
    if map.dim() != x.ncols() {
        return Err(Error::DimensionMismatch {
            expected: map.dim(),
            actual: x.ncols(),
        });
    }
    let data = if let Some(sp) = map.as_signed_permutation() {
        let mut out = Array2::zeros(x.data().dim());
        let mut buf = vec![T::zero(); map.dim()];
        for (src, mut dst) in x.data().rows().into_iter().zip(out.rows_mut()) {
            let row: Vec<T> = src.to_vec();
            sp.apply_into(&row, &mut buf);
            dst.assign(&ndarray::ArrayView1::from(&buf[..]));
        }
        out
    } else {
        x.data().dot(&map.entries().t())
    };
    Sample::new(data).with_layout(x.layout())
}

/// A named, ordered set of generators sharing one dimension.
#[derive(Debug, Clone)]
pub struct GroupSpec<T> {
    dim: usize,
    generators: Vec<LinearMap<T>>,
    name: String,
}

impl<T: Scalar> GroupSpec<T> {
    pub fn new(name: impl Into<String>, generators: Vec<LinearMap<T>>) -> Result<Self> {
        let first = generators
            .first()
            .ok_or(Error::Empty("a group needs at least one generator"))?;
        let dim = first.dim();
        if let Some(bad) = generators.iter().find(|g| g.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: bad.dim(),
            });
        }
        Ok(Self {
            dim,
            generators,
            name: name.into(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn generators(&self) -> &[LinearMap<T>] {
        &self.generators
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    pub fn all_orthogonal(&self, tol: f64) -> bool {
        self.generators.iter().all(|g| g.is_orthogonal(tol))
    }

    /// True when every generator is an (unsigned) coordinate permutation.
    pub fn is_permutation_group(&self) -> bool {
        self.generators
            .iter()
            .all(|g| g.as_signed_permutation().is_some_and(SignedPermutation::is_unsigned))
    }

    /// Lifts a group on `R^c` to `R^(c*grid)` acting blockwise on the
    /// component-major functional layout.
    pub fn lift_to_blocks(&self, grid: usize) -> Result<Self> {
        let c = self.dim;
        let d = c * grid;
        let mut gens = Vec::with_capacity(self.len());
        for g in &self.generators {
            let mut m = Array2::zeros((d, d));
            for ((a, b), &v) in g.entries().indexed_iter() {
                for t in 0..grid {
                    m[[a * grid + t, b * grid + t]] = v;
                }
            }
            gens.push(LinearMap::new(m, g.label())?);
        }
        Self::new(format!("{}[x{grid}]", self.name), gens)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let doc: GroupSpecDoc = serde_json::from_str(s)?;
        doc.into_spec()
    }

    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        Self::from_json_str(&text)
    }

    pub fn to_json_string(&self) -> Result<String> {
        let doc = GroupSpecDoc {
            dim: self.dim,
            name: self.name.clone(),
            generators: self
                .generators
                .iter()
                .map(|g| {
                    MatrixDoc::Rows(
                        g.entries()
                            .rows()
                            .into_iter()
                            .map(|r| r.iter().map(|x| x.as_f64()).collect())
                            .collect(),
                    )
                })
                .collect(),
            labels: Some(self.generators.iter().map(|g| g.label().to_string()).collect()),
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }
}

/// On-disk form: `{"dim": d, "name": s, "generators": [...]}`. Each
/// generator is either a list of rows or a flat row-major list of `d*d`
/// numbers. `labels` is optional.
#[derive(Debug, Serialize, Deserialize)]
struct GroupSpecDoc {
    dim: usize,
    name: String,
    generators: Vec<MatrixDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<String>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum MatrixDoc {
    Rows(Vec<Vec<f64>>),
    Flat(Vec<f64>),
}

impl GroupSpecDoc {
    fn into_spec<T: Scalar>(self) -> Result<GroupSpec<T>> {
        let d = self.dim;
        if let Some(labels) = &self.labels {
            if labels.len() != self.generators.len() {
                return Err(Error::Data(format!(
                    "{} labels for {} generators",
                    labels.len(),
                    self.generators.len()
                )));
            }
        }
        let mut gens = Vec::with_capacity(self.generators.len());
        for (idx, m) in self.generators.into_iter().enumerate() {
            let flat: Vec<f64> = match m {
                MatrixDoc::Rows(rows) => {
                    if rows.len() != d || rows.iter().any(|r| r.len() != d) {
                        return Err(Error::Dimension(format!(
                            "generator {idx} is not {d}x{d}"
                        )));
                    }
                    rows.into_iter().flatten().collect()
                }
                MatrixDoc::Flat(v) => {
                    if v.len() != d * d {
                        return Err(Error::Dimension(format!(
                            "generator {idx} has {} entries, expected {}",
                            v.len(),
                            d * d
                        )));
                    }
                    v
                }
            };
            let label = self
                .labels
                .as_ref()
                .map(|l| l[idx].clone())
                .unwrap_or_else(|| format!("T{}", idx + 1));
            let entries =
                Array2::from_shape_vec((d, d), flat.into_iter().map(T::of).collect()).expect("checked");
            gens.push(LinearMap::new(entries, label)?);
        }
        GroupSpec::new(self.name, gens)
    }
}

fn check_group_dim(d: usize) -> Result<()> {
    if d < 2 {
        return Err(Error::Dimension(format!("group dimension must be >= 2, got {d}")));
    }
    Ok(())
}

/// Generators of the coordinate-permutation group: the transposition
/// (1,2) and the cycle (1,2,...,d). For `d = 2` they coincide and only the
/// transposition is returned.
pub fn permutation_generators<T: Scalar>(d: usize) -> Result<GroupSpec<T>> {
    check_group_dim(d)?;
    let mut swap: Vec<usize> = (0..d).collect();
    swap.swap(0, 1);
    let mut gens = vec![LinearMap::from_signed_permutation(
        SignedPermutation::new(swap, vec![1; d])?,
        "(1 2)",
    )?];
    if d > 2 {
        let cycle: Vec<usize> = (0..d).map(|j| (j + 1) % d).collect();
        let label = format!(
            "({})",
            (1..=d).map(|i| i.to_string()).collect::<Vec<_>>().join(" ")
        );
        gens.push(LinearMap::from_signed_permutation(
            SignedPermutation::new(cycle, vec![1; d])?,
            label,
        )?);
    }
    GroupSpec::new(format!("exchangeable({d})"), gens)
}

/// The permutation generators plus `diag(-1, 1, ..., 1)`.
pub fn signed_permutation_generators<T: Scalar>(d: usize) -> Result<GroupSpec<T>> {
    check_group_dim(d)?;
    let mut gens = permutation_generators::<T>(d)?.generators;
    let mut sign = vec![1i8; d];
    sign[0] = -1;
    gens.push(LinearMap::from_signed_permutation(
        SignedPermutation::new((0..d).collect(), sign)?,
        "diag(-1,1,...,1)",
    )?);
    GroupSpec::new(format!("sign-exchangeable({d})"), gens)
}

/// Every element of the group generated by `spec`, found breadth-first
/// from the identity by multiplying with generators and their inverses.
/// Fails with [`Error::GroupTooLarge`] once more than `cap` distinct
/// elements have been found.
pub fn closure<T: Scalar>(spec: &GroupSpec<T>, cap: usize) -> Result<Vec<LinearMap<T>>> {
    if cap == 0 {
        return Err(Error::InvalidParameter("closure cap must be >= 1".into()));
    }
    let mut steps = Vec::with_capacity(2 * spec.len());
    let mut step_keys = HashSet::new();
    for g in spec.generators() {
        for s in [g.clone(), g.inverse()?] {
            if step_keys.insert(s.key()) {
                steps.push(s);
            }
        }
    }
    let identity = LinearMap::identity(spec.dim())?;
    let mut index: HashMap<Vec<i64>, usize> = HashMap::new();
    index.insert(identity.key(), 0);
    let mut elements = vec![identity];
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        for s in &steps {
            let next = elements[i].compose(s)?;
            let key = next.key();
            if index.contains_key(&key) {
                continue;
            }
            if elements.len() >= cap {
                return Err(Error::GroupTooLarge { cap });
            }
            index.insert(key, elements.len());
            queue.push_back(elements.len());
            elements.push(next.with_label(format!("g{}", elements.len())));
        }
    }
    Ok(elements)
}

/// Standalone form of [`LinearMap::is_orthogonal`].
pub fn is_orthogonal<T: Scalar>(map: &LinearMap<T>, tol: f64) -> bool {
    map.is_orthogonal(tol)
}

/// LU factorization with partial pivoting; returns `(lu, perm, sign)` or
/// `None` on an exactly zero pivot column.
fn lu<T: Scalar>(a: &Array2<T>) -> Option<(Array2<T>, Vec<usize>, T)> {
    let n = a.nrows();
    let mut lu = a.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut sign = T::one();
    for k in 0..n {
        let (p, pmax) = (k..n)
            .map(|i| (i, lu[[i, k]].abs()))
            .max_by(|x, y| x.1.total_order(&y.1))
            .expect("non-empty");
        if pmax == T::zero() {
            return None;
        }
        if p != k {
            for j in 0..n {
                lu.swap([k, j], [p, j]);
            }
            perm.swap(k, p);
            sign = -sign;
        }
        let pivot = lu[[k, k]];
        for i in k + 1..n {
            let f = lu[[i, k]] / pivot;
            lu[[i, k]] = f;
            for j in k + 1..n {
                let v = lu[[k, j]];
                lu[[i, j]] = lu[[i, j]] - f * v;
            }
        }
    }
    Some((lu, perm, sign))
}

fn determinant<T: Scalar>(a: &Array2<T>) -> T {
    match lu(a) {
        Some((lu, _, sign)) => (0..a.nrows()).fold(sign, |acc, i| acc * lu[[i, i]]),
        None => T::zero(),
    }
}

fn lu_inverse<T: Scalar>(a: &Array2<T>) -> Option<Array2<T>> {
    let n = a.nrows();
    let (lu, perm, _) = lu(a)?;
    let mut inv = Array2::zeros((n, n));
    for col in 0..n {
        // Solve L y = P e_col, then U x = y.
        let mut x: Vec<T> = perm
            .iter()
            .map(|&p| if p == col { T::one() } else { T::zero() })
            .collect();
        for i in 0..n {
            for j in 0..i {
                x[i] = x[i] - lu[[i, j]] * x[j];
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                x[i] = x[i] - lu[[i, j]] * x[j];
            }
            x[i] = x[i] / lu[[i, i]];
        }
        for i in 0..n {
            inv[[i, col]] = x[i];
        }
    }
    Some(inv)
}
