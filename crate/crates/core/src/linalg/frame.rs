//! Coefficient frames: `n x p` blocks of discrete functions stored by column.

use super::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// `n x p` matrix whose `p` columns are coefficient vectors of discrete
/// functions.  Stored column-major; `p` is small compared to `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame<T> {
    n_rows: usize,
    n_cols: usize,
    data: Vec<T>,
}

impl<T: Real> Frame<T> {
    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        Frame {
            n_rows,
            n_cols,
            data: vec![T::zero(); n_rows * n_cols],
        }
    }

    pub fn from_fn(n_rows: usize, n_cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut fr = Self::zeros(n_rows, n_cols);
        for j in 0..n_cols {
            for i in 0..n_rows {
                fr[(i, j)] = f(i, j);
            }
        }
        fr
    }

    /// Wraps column-major data; `data.len()` must equal `n_rows * n_cols`.
    pub fn from_columns(n_rows: usize, n_cols: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != n_rows * n_cols {
            return Err(Error::dim(format!(
                "frame buffer has {} entries, shape {}x{} needs {}",
                data.len(),
                n_rows,
                n_cols,
                n_rows * n_cols
            )));
        }
        Ok(Frame {
            n_rows,
            n_cols,
            data,
        })
    }

    /// Single-column frame from a vector.
    pub fn from_vec(data: Vec<T>) -> Self {
        Frame {
            n_rows: data.len(),
            n_cols: 1,
            data,
        }
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn col(&self, j: usize) -> &[T] {
        &self.data[j * self.n_rows..(j + 1) * self.n_rows]
    }

    pub fn col_mut(&mut self, j: usize) -> &mut [T] {
        &mut self.data[j * self.n_rows..(j + 1) * self.n_rows]
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn fill(&mut self, v: T) {
        self.data.iter_mut().for_each(|x| *x = v);
    }

    /// Frobenius inner product `<self, other> = sum_ij self_ij other_ij`.
    pub fn dot(&self, other: &Self) -> T {
        debug_assert_eq!(self.shape(), other.shape());
        self.data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| a * b)
            .sum()
    }

    pub fn norm_fro(&self) -> T {
        self.dot(self).sqrt()
    }

    pub fn max_abs(&self) -> T {
        self.data
            .iter()
            .fold(T::zero(), |acc, &x| acc.max(x.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    fn shape(&self) -> (usize, usize) {
        (self.n_rows, self.n_cols)
    }

    /// `self += alpha * other`.
    pub fn axpy(&mut self, alpha: T, other: &Self) {
        debug_assert_eq!(self.shape(), other.shape());
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a += alpha * b;
        }
    }

    pub fn scale_in_place(&mut self, s: T) {
        self.data.iter_mut().for_each(|x| *x *= s);
    }

    pub fn scaled(&self, s: T) -> Self {
        let mut out = self.clone();
        out.scale_in_place(s);
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.axpy(T::one(), other);
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.axpy(-T::one(), other);
        out
    }

    /// `self^T * other`, a small `p x q` matrix.
    pub fn transpose_mul(&self, other: &Self) -> DenseMatrix<T> {
        debug_assert_eq!(self.n_rows, other.n_rows);
        DenseMatrix::from_fn(self.n_cols, other.n_cols, |i, j| {
            self.col(i)
                .iter()
                .zip(other.col(j))
                .map(|(&a, &b)| a * b)
                .sum()
        })
    }

    /// `self * small`, combining columns by a `p x q` matrix.
    pub fn mul_small(&self, small: &DenseMatrix<T>) -> Self {
        assert_eq!(
            self.n_cols,
            small.rows(),
            "frame columns must match small-matrix rows"
        );
        let mut out = Self::zeros(self.n_rows, small.cols());
        for j in 0..small.cols() {
            for k in 0..self.n_cols {
                let w = small[(k, j)];
                if w == T::zero() {
                    continue;
                }
                let src = self.col(k);
                let dst = out.col_mut(j);
                for (d, &s) in dst.iter_mut().zip(src) {
                    *d += w * s;
                }
            }
        }
        out
    }
}

impl<T> std::ops::Index<(usize, usize)> for Frame<T> {
    type Output = T;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[j * self.n_rows + i]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for Frame<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[j * self.n_rows + i]
    }
}
