//! Dense matrices.
//!
//! Sized for Gram/Rayleigh blocks (`p x p`) and for the dense oracle paths
//! (saddle-point systems, dense eigenpairs), not for large discretizations.

use crate::error::{Error, Result};
use crate::scalar::{real, Real};
use std::ops::{Index, IndexMut};

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Real> DenseMatrix<T> {
    /// Zero matrix of the given shape.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    /// Identity matrix of order `n`.
    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    /// Builds a matrix entry by entry.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    /// Wraps a row-major buffer; `data.len()` must equal `rows * cols`.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::dim(format!(
                "dense buffer has {} entries, shape {}x{} needs {}",
                data.len(),
                rows,
                cols,
                rows * cols
            )));
        }
        Ok(DenseMatrix { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    /// `self * other`.
    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "inner dimensions must agree");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == T::zero() {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| a + b)
            .collect();
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| a - b)
            .collect();
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn scale(&self, s: T) -> Self {
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&a| a * s).collect(),
        }
    }

    pub fn trace(&self) -> T {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn norm_fro(&self) -> T {
        self.data
            .iter()
            .map(|&a| a * a)
            .fold(T::zero(), |acc, x| acc + x)
            .sqrt()
    }

    pub fn max_abs(&self) -> T {
        self.data
            .iter()
            .fold(T::zero(), |acc, &x| acc.max(x.abs()))
    }

    /// Symmetric part `(A + A^T) / 2`.
    pub fn sym_part(&self) -> Self {
        assert_eq!(self.rows, self.cols, "sym_part needs a square matrix");
        let half = real::<T>(0.5);
        Self::from_fn(self.rows, self.cols, |i, j| {
            (self[(i, j)] + self[(j, i)]) * half
        })
    }

    /// Skew-symmetric part `(A - A^T) / 2`.
    pub fn skew_part(&self) -> Self {
        assert_eq!(self.rows, self.cols, "skew_part needs a square matrix");
        let half = real::<T>(0.5);
        Self::from_fn(self.rows, self.cols, |i, j| {
            (self[(i, j)] - self[(j, i)]) * half
        })
    }

    pub fn is_symmetric(&self, tol: T) -> bool {
        if self.rows != self.cols {
            return false;
        }
        let scale = self.max_abs().max(T::one());
        for i in 0..self.rows {
            for j in 0..i {
                if (self[(i, j)] - self[(j, i)]).abs() > tol * scale {
                    return false;
                }
            }
        }
        true
    }

    /// Cholesky factor `L` with `self = L L^T`.
    pub fn cholesky(&self) -> Result<Self> {
        assert_eq!(self.rows, self.cols, "cholesky needs a square matrix");
        let n = self.rows;
        let mut l = Self::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let mut s = self[(i, j)];
                for k in 0..j {
                    s -= l[(i, k)] * l[(j, k)];
                }
                if i == j {
                    if s <= T::zero() {
                        return Err(Error::NotPositiveDefinite(format!(
                            "dense pivot {} is {:e}",
                            i, s
                        )));
                    }
                    l[(i, i)] = s.sqrt();
                } else {
                    l[(i, j)] = s / l[(j, j)];
                }
            }
        }
        Ok(l)
    }

    /// Solves `L x = b` in place for a lower-triangular `self`.
    pub fn solve_lower(&self, b: &mut [T]) {
        let n = self.rows;
        for i in 0..n {
            let mut s = b[i];
            for k in 0..i {
                s -= self[(i, k)] * b[k];
            }
            b[i] = s / self[(i, i)];
        }
    }

    /// Solves `L^T x = b` in place for a lower-triangular `self`.
    pub fn solve_lower_transpose(&self, b: &mut [T]) {
        let n = self.rows;
        for i in (0..n).rev() {
            let mut s = b[i];
            for k in i + 1..n {
                s -= self[(k, i)] * b[k];
            }
            b[i] = s / self[(i, i)];
        }
    }

    /// Solves `self * x = b` with the precomputed Cholesky factor of `self`.
    pub fn cholesky_solve(l: &Self, b: &mut [T]) {
        l.solve_lower(b);
        l.solve_lower_transpose(b);
    }

    /// Solves `self * X = B` by LU with partial pivoting.
    pub fn solve_lu(&self, b: &Self) -> Result<Self> {
        assert_eq!(self.rows, self.cols, "solve_lu needs a square matrix");
        assert_eq!(self.rows, b.rows, "right-hand side rows must match");
        let n = self.rows;
        let mut lu = self.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let mut p = k;
            let mut best = lu[(k, k)].abs();
            for i in k + 1..n {
                let v = lu[(i, k)].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best == T::zero() {
                return Err(Error::RankDeficient(format!("LU pivot {} is zero", k)));
            }
            if p != k {
                for j in 0..n {
                    let t = lu[(k, j)];
                    lu[(k, j)] = lu[(p, j)];
                    lu[(p, j)] = t;
                }
                perm.swap(k, p);
            }
            let piv = lu[(k, k)];
            for i in k + 1..n {
                let f = lu[(i, k)] / piv;
                lu[(i, k)] = f;
                for j in k + 1..n {
                    let s = lu[(k, j)];
                    lu[(i, j)] -= f * s;
                }
            }
        }
        let mut x = Self::zeros(n, b.cols);
        let mut col = vec![T::zero(); n];
        for j in 0..b.cols {
            for i in 0..n {
                col[i] = b[(perm[i], j)];
            }
            for i in 0..n {
                let mut s = col[i];
                for k in 0..i {
                    s -= lu[(i, k)] * col[k];
                }
                col[i] = s;
            }
            for i in (0..n).rev() {
                let mut s = col[i];
                for k in i + 1..n {
                    s -= lu[(i, k)] * col[k];
                }
                col[i] = s / lu[(i, i)];
            }
            for i in 0..n {
                x[(i, j)] = col[i];
            }
        }
        Ok(x)
    }

    /// Full eigendecomposition of a symmetric matrix.
    ///
    /// Returns eigenvalues in ascending order and the orthogonal matrix of
    /// eigenvectors as columns, so `self = Q diag(vals) Q^T`.  Tridiagonalizes
    /// by Householder reflections, then runs implicit QL with Wilkinson
    /// shifts.  Only the lower triangle of `self` is read.
    pub fn sym_eig(&self) -> Result<(Vec<T>, Self)> {
        assert_eq!(self.rows, self.cols, "sym_eig needs a square matrix");
        let n = self.rows;
        if n == 0 {
            return Ok((Vec::new(), Self::zeros(0, 0)));
        }
        // Symmetrize from the lower triangle so roundoff asymmetry cannot leak in.
        let mut a = Self::from_fn(n, n, |i, j| if i >= j { self[(i, j)] } else { self[(j, i)] });
        let mut q = Self::identity(n);
        let mut v = vec![T::zero(); n];
        let mut w = vec![T::zero(); n];

        // Householder tridiagonalization.
        for k in 0..n.saturating_sub(2) {
            let m = n - k - 1; // active length below the diagonal
            let mut norm2 = T::zero();
            for i in 0..m {
                let x = a[(k + 1 + i, k)];
                v[i] = x;
                norm2 += x * x;
            }
            let norm = norm2.sqrt();
            if norm <= T::eps() * a.max_abs() {
                continue;
            }
            let alpha = if v[0] >= T::zero() { -norm } else { norm };
            v[0] -= alpha;
            let mut vnorm2 = T::zero();
            for i in 0..m {
                vnorm2 += v[i] * v[i];
            }
            let vnorm = vnorm2.sqrt();
            if vnorm == T::zero() {
                continue;
            }
            for i in 0..m {
                v[i] /= vnorm;
            }
            // Column/row k become (alpha, 0, ..., 0).
            a[(k + 1, k)] = alpha;
            a[(k, k + 1)] = alpha;
            for i in 1..m {
                a[(k + 1 + i, k)] = T::zero();
                a[(k, k + 1 + i)] = T::zero();
            }
            // Trailing block B <- (I - 2vv^T) B (I - 2vv^T) via the rank-2 update
            // B - 2 v q^T - 2 q v^T with q = Bv - (v^T B v) v.
            for i in 0..m {
                let mut s = T::zero();
                for j in 0..m {
                    s += a[(k + 1 + i, k + 1 + j)] * v[j];
                }
                w[i] = s;
            }
            let mut c = T::zero();
            for i in 0..m {
                c += v[i] * w[i];
            }
            for i in 0..m {
                w[i] -= c * v[i];
            }
            let two = real::<T>(2.0);
            for i in 0..m {
                for j in 0..m {
                    let upd = two * (v[i] * w[j] + w[i] * v[j]);
                    a[(k + 1 + i, k + 1 + j)] -= upd;
                }
            }
            // Accumulate Q <- Q (I - 2vv^T) on columns k+1..n.
            for r in 0..n {
                let mut s = T::zero();
                for j in 0..m {
                    s += q[(r, k + 1 + j)] * v[j];
                }
                let s2 = two * s;
                for j in 0..m {
                    q[(r, k + 1 + j)] -= s2 * v[j];
                }
            }
        }

        let mut d: Vec<T> = (0..n).map(|i| a[(i, i)]).collect();
        let mut off = vec![T::zero(); n];
        for i in 0..n - 1 {
            off[i] = a[(i + 1, i)];
        }

        // Implicit QL with Wilkinson shifts, rotations accumulated into q.
        let two = real::<T>(2.0);
        for l in 0..n {
            let mut iter = 0usize;
            loop {
                let mut m = l;
                while m + 1 < n {
                    let dd = d[m].abs() + d[m + 1].abs();
                    if off[m].abs() <= T::eps() * dd {
                        break;
                    }
                    m += 1;
                }
                if m == l {
                    break;
                }
                iter += 1;
                if iter > 60 {
                    return Err(Error::EigenFailed(format!(
                        "QL iteration stalled at block {}..{}",
                        l, m
                    )));
                }
                let mut g = (d[l + 1] - d[l]) / (two * off[l]);
                let mut r = g.hypot(T::one());
                let sign_r = if g >= T::zero() { r } else { -r };
                g = d[m] - d[l] + off[l] / (g + sign_r);
                let mut s = T::one();
                let mut c = T::one();
                let mut p = T::zero();
                let mut underflow = false;
                let mut i_state: isize = m as isize - 1;
                while i_state >= l as isize {
                    let i = i_state as usize;
                    let mut f = s * off[i];
                    let b = c * off[i];
                    r = f.hypot(g);
                    off[i + 1] = r;
                    if r == T::zero() {
                        d[i + 1] -= p;
                        off[m] = T::zero();
                        underflow = true;
                        break;
                    }
                    s = f / r;
                    c = g / r;
                    g = d[i + 1] - p;
                    r = (d[i] - g) * s + two * c * b;
                    p = s * r;
                    d[i + 1] = g + p;
                    g = c * r - b;
                    for k in 0..n {
                        f = q[(k, i + 1)];
                        q[(k, i + 1)] = s * q[(k, i)] + c * f;
                        q[(k, i)] = c * q[(k, i)] - s * f;
                    }
                    i_state -= 1;
                }
                if underflow && i_state >= l as isize {
                    continue;
                }
                d[l] -= p;
                off[l] = g;
                off[m] = T::zero();
            }
        }

        // Sort ascending, permuting eigenvector columns along.
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| d[i].partial_cmp(&d[j]).expect("eigenvalues are finite"));
        let vals: Vec<T> = order.iter().map(|&i| d[i]).collect();
        let vecs = Self::from_fn(n, n, |i, j| q[(i, order[j])]);
        Ok((vals, vecs))
    }

    /// Inverse square root of a symmetric positive definite matrix.
    ///
    /// Fails if the smallest eigenvalue does not exceed `rel_tol` times the
    /// largest, which signals a (numerically) singular input.
    pub fn spd_inv_sqrt(&self, rel_tol: T) -> Result<Self> {
        let (vals, q) = self.sym_eig()?;
        let n = vals.len();
        if n == 0 {
            return Ok(Self::zeros(0, 0));
        }
        let vmax = vals[n - 1];
        if vals[0] <= rel_tol * vmax.max(T::eps()) {
            return Err(Error::RankDeficient(format!(
                "spd_inv_sqrt: eigenvalue range [{:e}, {:e}]",
                vals[0], vmax
            )));
        }
        let mut out = Self::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let mut s = T::zero();
                for k in 0..n {
                    s += q[(i, k)] * q[(j, k)] / vals[k].sqrt();
                }
                out[(i, j)] = s;
            }
        }
        Ok(out)
    }
}

impl<T> Index<(usize, usize)> for DenseMatrix<T> {
    type Output = T;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for DenseMatrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}
