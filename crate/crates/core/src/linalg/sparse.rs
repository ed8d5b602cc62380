//! CSR sparse matrices.

use super::dense::DenseMatrix;
use super::frame::Frame;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Compressed-sparse-row matrix.
///
/// Invariants: `row_offsets` has `n_rows + 1` monotone entries; column
/// indices are strictly increasing within each row; duplicate triplets are
/// summed at construction.  The `symmetric` flag asserts value-level
/// symmetry and is only set by constructors that guarantee it.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix<T> {
    n_rows: usize,
    n_cols: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<T>,
    symmetric: bool,
}

impl<T: Real> SparseMatrix<T> {
    /// Builds a CSR matrix from unordered `(row, col, value)` triplets.
    ///
    /// Duplicates are summed.  Exact zeros arising from summation are kept so
    /// the pattern stays deterministic.
    pub fn from_triplets(
        n_rows: usize,
        n_cols: usize,
        triplets: &[(usize, usize, T)],
    ) -> Result<Self> {
        for &(i, j, _) in triplets {
            if i >= n_rows || j >= n_cols {
                return Err(Error::dim(format!(
                    "triplet ({}, {}) outside {}x{}",
                    i, j, n_rows, n_cols
                )));
            }
        }
        let mut order: Vec<usize> = (0..triplets.len()).collect();
        order.sort_by_key(|&k| (triplets[k].0, triplets[k].1));
        let mut row_offsets = vec![0usize; n_rows + 1];
        let mut col_indices = Vec::with_capacity(triplets.len());
        let mut values = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for &k in &order {
            let (i, j, v) = triplets[k];
            if last == Some((i, j)) {
                let m = values.len() - 1;
                values[m] += v;
            } else {
                col_indices.push(j);
                values.push(v);
                row_offsets[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..n_rows {
            row_offsets[i + 1] += row_offsets[i];
        }
        let m = SparseMatrix {
            n_rows,
            n_cols,
            row_offsets,
            col_indices,
            values,
            symmetric: false,
        };
        debug_assert!(m.check_invariants().is_ok());
        Ok(m)
    }

    /// Identity matrix.
    pub fn identity(n: usize) -> Self {
        SparseMatrix {
            n_rows: n,
            n_cols: n,
            row_offsets: (0..=n).collect(),
            col_indices: (0..n).collect(),
            values: vec![T::one(); n],
            symmetric: true,
        }
    }

    /// Diagonal matrix from a vector.
    pub fn from_diagonal(diag: &[T]) -> Self {
        let n = diag.len();
        SparseMatrix {
            n_rows: n,
            n_cols: n,
            row_offsets: (0..=n).collect(),
            col_indices: (0..n).collect(),
            values: diag.to_vec(),
            symmetric: true,
        }
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn is_symmetric_flagged(&self) -> bool {
        self.symmetric
    }

    /// Marks the matrix as symmetric after verifying value-level symmetry.
    pub fn into_symmetric(mut self, tol: T) -> Result<Self> {
        if !self.value_symmetry_holds(tol) {
            return Err(Error::param(
                "matrix marked symmetric but values are not symmetric".to_string(),
            ));
        }
        self.symmetric = true;
        Ok(self)
    }

    /// Checks value-level symmetry up to `tol` times the largest entry.
    pub fn value_symmetry_holds(&self, tol: T) -> bool {
        if self.n_rows != self.n_cols {
            return false;
        }
        let scale = self.max_abs().max(T::one());
        for i in 0..self.n_rows {
            for k in self.row_offsets[i]..self.row_offsets[i + 1] {
                let j = self.col_indices[k];
                if (self.values[k] - self.value_at(j, i)).abs() > tol * scale {
                    return false;
                }
            }
        }
        true
    }

    fn check_invariants(&self) -> Result<()> {
        if self.row_offsets.len() != self.n_rows + 1 {
            return Err(Error::param("row_offsets length".to_string()));
        }
        for i in 0..self.n_rows {
            if self.row_offsets[i] > self.row_offsets[i + 1] {
                return Err(Error::param("row_offsets not monotone".to_string()));
            }
            let row = &self.col_indices[self.row_offsets[i]..self.row_offsets[i + 1]];
            for w in row.windows(2) {
                if w[0] >= w[1] {
                    return Err(Error::param(format!(
                        "row {} columns not strictly increasing",
                        i
                    )));
                }
            }
        }
        Ok(())
    }

    /// Entry `(i, j)`, zero when outside the pattern.
    pub fn value_at(&self, i: usize, j: usize) -> T {
        let row = &self.col_indices[self.row_offsets[i]..self.row_offsets[i + 1]];
        match row.binary_search(&j) {
            Ok(k) => self.values[self.row_offsets[i] + k],
            Err(_) => T::zero(),
        }
    }

    pub fn diag(&self) -> Vec<T> {
        (0..self.n_rows.min(self.n_cols))
            .map(|i| self.value_at(i, i))
            .collect()
    }

    pub fn max_abs(&self) -> T {
        self.values
            .iter()
            .fold(T::zero(), |acc, &v| acc.max(v.abs()))
    }

    /// Maximum absolute row sum.
    pub fn inf_norm(&self) -> T {
        let mut best = T::zero();
        for i in 0..self.n_rows {
            let s: T = self.values[self.row_offsets[i]..self.row_offsets[i + 1]]
                .iter()
                .map(|v| v.abs())
                .sum();
            best = best.max(s);
        }
        best
    }

    /// Gershgorin lower bound `min_i (a_ii - sum_{j != i} |a_ij|)`.
    pub fn gershgorin_lower(&self) -> T {
        let mut bound = T::infinity();
        for i in 0..self.n_rows {
            let mut center = T::zero();
            let mut radius = T::zero();
            for k in self.row_offsets[i]..self.row_offsets[i + 1] {
                let j = self.col_indices[k];
                if j == i {
                    center = self.values[k];
                } else {
                    radius += self.values[k].abs();
                }
            }
            bound = bound.min(center - radius);
        }
        bound
    }

    /// Sparse matrix times frame, the workhorse product.
    pub fn spmv(&self, x: &Frame<T>) -> Result<Frame<T>> {
        if x.n_rows() != self.n_cols {
            return Err(Error::dim(format!(
                "spmv: matrix is {}x{}, frame has {} rows",
                self.n_rows,
                self.n_cols,
                x.n_rows()
            )));
        }
        let mut y = Frame::zeros(self.n_rows, x.n_cols());
        for j in 0..x.n_cols() {
            let xc = x.col(j);
            let yc = y.col_mut(j);
            for i in 0..self.n_rows {
                let mut s = T::zero();
                for k in self.row_offsets[i]..self.row_offsets[i + 1] {
                    s += self.values[k] * xc[self.col_indices[k]];
                }
                yc[i] = s;
            }
        }
        Ok(y)
    }

    /// Sparse matrix times vector.
    pub fn spmv_vec(&self, x: &[T]) -> Result<Vec<T>> {
        if x.len() != self.n_cols {
            return Err(Error::dim(format!(
                "spmv_vec: matrix is {}x{}, vector has {} entries",
                self.n_rows,
                self.n_cols,
                x.len()
            )));
        }
        let mut y = vec![T::zero(); self.n_rows];
        for (i, yi) in y.iter_mut().enumerate() {
            let mut s = T::zero();
            for k in self.row_offsets[i]..self.row_offsets[i + 1] {
                s += self.values[k] * x[self.col_indices[k]];
            }
            *yi = s;
        }
        Ok(y)
    }

    /// `self + alpha * other` with pattern union.
    pub fn add_scaled(&self, other: &Self, alpha: T) -> Result<Self> {
        if (self.n_rows, self.n_cols) != (other.n_rows, other.n_cols) {
            return Err(Error::dim(format!(
                "add_scaled: {}x{} vs {}x{}",
                self.n_rows, self.n_cols, other.n_rows, other.n_cols
            )));
        }
        let mut row_offsets = vec![0usize; self.n_rows + 1];
        let mut col_indices = Vec::with_capacity(self.nnz().max(other.nnz()));
        let mut values = Vec::with_capacity(self.nnz().max(other.nnz()));
        for i in 0..self.n_rows {
            let (mut ka, enda) = (self.row_offsets[i], self.row_offsets[i + 1]);
            let (mut kb, endb) = (other.row_offsets[i], other.row_offsets[i + 1]);
            while ka < enda || kb < endb {
                let ja = if ka < enda {
                    self.col_indices[ka]
                } else {
                    usize::MAX
                };
                let jb = if kb < endb {
                    other.col_indices[kb]
                } else {
                    usize::MAX
                };
                if ja < jb {
                    col_indices.push(ja);
                    values.push(self.values[ka]);
                    ka += 1;
                } else if jb < ja {
                    col_indices.push(jb);
                    values.push(alpha * other.values[kb]);
                    kb += 1;
                } else {
                    col_indices.push(ja);
                    values.push(self.values[ka] + alpha * other.values[kb]);
                    ka += 1;
                    kb += 1;
                }
            }
            row_offsets[i + 1] = col_indices.len();
        }
        Ok(SparseMatrix {
            n_rows: self.n_rows,
            n_cols: self.n_cols,
            row_offsets,
            col_indices,
            values,
            symmetric: self.symmetric && other.symmetric,
        })
    }

    pub fn scaled(&self, alpha: T) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= alpha);
        out
    }

    pub fn to_dense(&self) -> DenseMatrix<T> {
        let mut d = DenseMatrix::zeros(self.n_rows, self.n_cols);
        for i in 0..self.n_rows {
            for k in self.row_offsets[i]..self.row_offsets[i + 1] {
                d[(i, self.col_indices[k])] = self.values[k];
            }
        }
        d
    }

    /// Row access for factorization code: `(columns, values)` of row `i`.
    pub(crate) fn row_entries(&self, i: usize) -> (&[usize], &[T]) {
        let range = self.row_offsets[i]..self.row_offsets[i + 1];
        (&self.col_indices[range.clone()], &self.values[range])
    }
}
