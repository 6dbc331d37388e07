//! Coordinate-list sparse boolean matrices and third-order tensors.
//!
//! All coordinates are 0-based. Entries are kept in `BTreeSet`/`BTreeMap`
//! so iteration order (and therefore every export) is deterministic.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// Largest number of logical cells we are willing to materialize densely.
pub const DENSE_LIMIT: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("refusing to densify {rows}x{cols} ({cells} cells > {DENSE_LIMIT})")]
pub struct DenseLimitError {
    pub rows: usize,
    pub cols: usize,
    pub cells: usize,
}

#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct SparseBoolMatrix {
    rows: usize,
    cols: usize,
    entries: BTreeSet<(usize, usize)>,
}

impl SparseBoolMatrix {
    pub fn new(rows: usize, cols: usize) -> Self {
        Self { rows, cols, entries: BTreeSet::new() }
    }

    /// Builds a matrix from coordinates. Panics if any coordinate is out of bounds.
    pub fn from_entries<I: IntoIterator<Item = (usize, usize)>>(rows: usize, cols: usize, it: I) -> Self {
        let mut m = Self::new(rows, cols);
        for (r, c) in it {
            m.insert(r, c);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Sets `(r, c)`; returns `true` if the entry was not already present.
    pub fn insert(&mut self, r: usize, c: usize) -> bool {
        assert!(
            r < self.rows && c < self.cols,
            "coordinate ({r}, {c}) outside {}x{}",
            self.rows,
            self.cols
        );
        self.entries.insert((r, c))
    }

    pub fn remove(&mut self, r: usize, c: usize) -> bool {
        self.entries.remove(&(r, c))
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        self.entries.contains(&(r, c))
    }

    /// Entries in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.entries.iter().copied()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = usize> + '_ {
        self.entries.range((r, 0)..(r + 1, 0)).map(|&(_, c)| c)
    }

    pub fn row_count(&self, r: usize) -> usize {
        self.row(r).count()
    }

    /// `self ∧ ¬other`, elementwise.
    pub fn and_not(&self, other: &Self) -> Self {
        assert_eq!(self.shape(), other.shape(), "and_not shape mismatch");
        Self {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.difference(&other.entries).copied().collect(),
        }
    }

    pub fn or(&self, other: &Self) -> Self {
        assert_eq!(self.shape(), other.shape(), "or shape mismatch");
        Self {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.union(&other.entries).copied().collect(),
        }
    }

    pub fn transpose(&self) -> Self {
        Self::from_entries(self.cols, self.rows, self.iter().map(|(r, c)| (c, r)))
    }

    /// Boolean matrix product: `(i, k)` is set iff some `j` has `self(i, j)` and `rhs(j, k)`.
    pub fn bool_product(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows, "bool_product inner dimension mismatch");
        let mut out = Self::new(self.rows, rhs.cols);
        for (i, j) in self.iter() {
            for k in rhs.row(j) {
                out.entries.insert((i, k));
            }
        }
        out
    }

    /// Keeps the listed columns, in the given order.
    pub fn select_columns(&self, keep: &[usize]) -> Self {
        let pos: BTreeMap<usize, usize> = keep.iter().enumerate().map(|(n, &c)| (c, n)).collect();
        Self::from_entries(
            self.rows,
            keep.len(),
            self.iter().filter_map(|(r, c)| pos.get(&c).map(|&n| (r, n))),
        )
    }

    pub fn select_rows(&self, keep: &[usize]) -> Self {
        self.transpose().select_columns(keep).transpose()
    }

    /// Copies `block` into `self` with its origin at `(r0, c0)`.
    pub fn place(&mut self, r0: usize, c0: usize, block: &Self) {
        for (r, c) in block.iter() {
            self.insert(r0 + r, c0 + c);
        }
    }

    /// Stacks matrices of equal column count on top of each other.
    pub fn vstack(parts: &[&Self]) -> Self {
        let cols = parts.first().map_or(0, |m| m.cols);
        let rows = parts.iter().map(|m| m.rows).sum();
        let mut out = Self::new(rows, cols);
        let mut r0 = 0;
        for m in parts {
            assert_eq!(m.cols, cols, "vstack column mismatch");
            out.place(r0, 0, m);
            r0 += m.rows;
        }
        out
    }

    /// Same entries, larger (or equal) bounds.
    pub fn resized(&self, rows: usize, cols: usize) -> Self {
        Self::from_entries(rows, cols, self.iter())
    }

    pub fn to_dense(&self) -> Result<Vec<Vec<bool>>, DenseLimitError> {
        let cells = self.rows.saturating_mul(self.cols);
        if cells > DENSE_LIMIT {
            return Err(DenseLimitError { rows: self.rows, cols: self.cols, cells });
        }
        let mut d = vec![vec![false; self.cols]; self.rows];
        for (r, c) in self.iter() {
            d[r][c] = true;
        }
        Ok(d)
    }
}

impl fmt::Debug for SparseBoolMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SparseBoolMatrix({}x{}, {:?})", self.rows, self.cols, self.entries)
    }
}

#[derive(Clone, PartialEq, Eq, Default)]
pub struct SparseBoolTensor3 {
    dims: (usize, usize, usize),
    entries: BTreeSet<(usize, usize, usize)>,
}

impl SparseBoolTensor3 {
    pub fn new(dims: (usize, usize, usize)) -> Self {
        Self { dims, entries: BTreeSet::new() }
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        self.dims
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn insert(&mut self, i: usize, j: usize, k: usize) -> bool {
        assert!(
            i < self.dims.0 && j < self.dims.1 && k < self.dims.2,
            "coordinate ({i}, {j}, {k}) outside {:?}",
            self.dims
        );
        self.entries.insert((i, j, k))
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> bool {
        self.entries.contains(&(i, j, k))
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        self.entries.iter().copied()
    }

    /// Folds modes 1 and 2 into rows (mode 1 varying fastest) and keeps mode 3 as columns:
    /// `row = d1 * j + i`, `col = k`.
    pub fn fold_first_two(&self) -> SparseBoolMatrix {
        let (d1, d2, d3) = self.dims;
        SparseBoolMatrix::from_entries(d1 * d2, d3, self.iter().map(|(i, j, k)| (d1 * j + i, k)))
    }

    /// Mode-3 unfolding: rows are `(i, j)` pairs (`row = d2 * i + j`), columns are mode 3.
    pub fn mode3_rows(&self) -> SparseBoolMatrix {
        let (d1, d2, d3) = self.dims;
        SparseBoolMatrix::from_entries(d1 * d2, d3, self.iter().map(|(i, j, k)| (d2 * i + j, k)))
    }

    /// Keeps the listed mode-3 slices in the given order.
    pub fn select_mode3(&self, keep: &[usize]) -> Self {
        let pos: BTreeMap<usize, usize> = keep.iter().enumerate().map(|(n, &k)| (k, n)).collect();
        let mut out = Self::new((self.dims.0, self.dims.1, keep.len()));
        for (i, j, k) in self.iter() {
            if let Some(&n) = pos.get(&k) {
                out.insert(i, j, n);
            }
        }
        out
    }
}

impl fmt::Debug for SparseBoolTensor3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SparseBoolTensor3({:?}, {:?})", self.dims, self.entries)
    }
}

/// Signed counterpart of [`SparseBoolTensor3`]; zero values are never stored.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct SparseIntTensor3 {
    dims: (usize, usize, usize),
    entries: BTreeMap<(usize, usize, usize), i32>,
}

impl SparseIntTensor3 {
    pub fn new(dims: (usize, usize, usize)) -> Self {
        Self { dims, entries: BTreeMap::new() }
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        self.dims
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> i32 {
        self.entries.get(&(i, j, k)).copied().unwrap_or(0)
    }

    pub fn add(&mut self, i: usize, j: usize, k: usize, v: i32) {
        assert!(i < self.dims.0 && j < self.dims.1 && k < self.dims.2);
        let e = self.entries.entry((i, j, k)).or_insert(0);
        *e += v;
        if *e == 0 {
            self.entries.remove(&(i, j, k));
        }
    }

    /// `pos − neg` over signed integers.
    pub fn difference(pos: &SparseBoolTensor3, neg: &SparseBoolTensor3) -> Self {
        assert_eq!(pos.dims(), neg.dims());
        let mut out = Self::new(pos.dims());
        for (i, j, k) in pos.iter() {
            out.add(i, j, k, 1);
        }
        for (i, j, k) in neg.iter() {
            out.add(i, j, k, -1);
        }
        out
    }

    pub fn iter(&self) -> impl Iterator<Item = ((usize, usize, usize), i32)> + '_ {
        self.entries.iter().map(|(&c, &v)| (c, v))
    }
}

impl fmt::Debug for SparseIntTensor3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SparseIntTensor3({:?}, {:?})", self.dims, self.entries)
    }
}
