//! Envelope Cholesky factorization for sparse symmetric positive definite
//! matrices.
//!
//! Fill produced by the factorization stays inside the envelope (the span
//! from the first nonzero of each row to the diagonal), so storing that span
//! per row captures the exact factor of banded and skyline matrices without
//! symbolic analysis.

use super::frame::Frame;
use super::sparse::SparseMatrix;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Lower-triangular factor `L` with `A = L L^T`, stored row-wise over the
/// envelope `first[i]..=i`.
#[derive(Debug, Clone)]
pub struct SparseCholesky<T> {
    n: usize,
    first: Vec<usize>,
    offsets: Vec<usize>,
    values: Vec<T>,
}

impl<T: Real> SparseCholesky<T> {
    /// Factors a symmetric positive definite matrix, reading its lower
    /// triangle.
    pub fn factor(a: &SparseMatrix<T>) -> Result<Self> {
        let n = a.n_rows();
        if n != a.n_cols() {
            return Err(Error::dim(format!(
                "cholesky: matrix is {}x{}",
                a.n_rows(),
                a.n_cols()
            )));
        }
        let mut first = vec![0usize; n];
        for i in 0..n {
            let (cols, _) = a.row_entries(i);
            first[i] = cols.first().copied().unwrap_or(i).min(i);
        }
        let mut offsets = vec![0usize; n + 1];
        for i in 0..n {
            offsets[i + 1] = offsets[i] + (i - first[i] + 1);
        }
        let mut values = vec![T::zero(); offsets[n]];
        for i in 0..n {
            let (cols, vals) = a.row_entries(i);
            for (&j, &v) in cols.iter().zip(vals) {
                if j <= i {
                    values[offsets[i] + (j - first[i])] = v;
                }
            }
        }
        // In-place factorization; row i only reads finished rows j < i.
        for i in 0..n {
            let fi = first[i];
            for j in fi..=i {
                let lo = fi.max(first[j]);
                let mut s = T::zero();
                if lo < j {
                    let ri = offsets[i] + (lo - fi);
                    let rj = offsets[j] + (lo - first[j]);
                    let len = j - lo;
                    let (a_run, b_run) = (&values[ri..ri + len], &values[rj..rj + len]);
                    // Manual loop keeps this hot path free of iterator overhead
                    // in debug builds as well.
                    for k in 0..len {
                        s += a_run[k] * b_run[k];
                    }
                }
                let idx = offsets[i] + (j - fi);
                if j < i {
                    let d = values[offsets[j] + (j - first[j])];
                    values[idx] = (values[idx] - s) / d;
                } else {
                    let d = values[idx] - s;
                    if d <= T::zero() || !d.is_finite() {
                        return Err(Error::NotPositiveDefinite(format!(
                            "pivot {} is {:e}",
                            i, d
                        )));
                    }
                    values[idx] = d.sqrt();
                }
            }
        }
        Ok(SparseCholesky {
            n,
            first,
            offsets,
            values,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[cfg(test)]
    fn l(&self, i: usize, j: usize) -> T {
        self.values[self.offsets[i] + (j - self.first[i])]
    }

    /// Solves `A x = b` in place.
    pub fn solve_in_place(&self, b: &mut [T]) -> Result<()> {
        if b.len() != self.n {
            return Err(Error::dim(format!(
                "cholesky solve: expected length {}, got {}",
                self.n,
                b.len()
            )));
        }
        // Forward: L y = b.
        for i in 0..self.n {
            let fi = self.first[i];
            let mut s = b[i];
            let base = self.offsets[i];
            for k in fi..i {
                s -= self.values[base + (k - fi)] * b[k];
            }
            b[i] = s / self.values[base + (i - fi)];
        }
        // Backward: L^T x = y, column sweep.
        for i in (0..self.n).rev() {
            let fi = self.first[i];
            let base = self.offsets[i];
            let xi = b[i] / self.values[base + (i - fi)];
            b[i] = xi;
            for k in fi..i {
                b[k] = b[k] - self.values[base + (k - fi)] * xi;
            }
        }
        Ok(())
    }

    /// Solves `A x = b`.
    pub fn solve_vec(&self, b: &[T]) -> Result<Vec<T>> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x)?;
        Ok(x)
    }

    /// Solves `A X = B` column by column.
    pub fn solve_frame(&self, b: &Frame<T>) -> Result<Frame<T>> {
        if b.n_rows() != self.n {
            return Err(Error::dim(format!(
                "cholesky solve: expected {} rows, got {}",
                self.n,
                b.n_rows()
            )));
        }
        let mut x = b.clone();
        for j in 0..x.n_cols() {
            self.solve_in_place_col(&mut x, j);
        }
        Ok(x)
    }

    fn solve_in_place_col(&self, x: &mut Frame<T>, j: usize) {
        let col = x.col_mut(j);
        self.solve_in_place(col)
            .expect("column length fixed by construction");
    }

    /// Frobenius norm of the factor, a cheap conditioning indicator.
    pub fn factor_norm(&self) -> T {
        self.values
            .iter()
            .map(|&v| v * v)
            .fold(T::zero(), |a, b| a + b)
            .sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stiffness_plus_mass(n: usize) -> SparseMatrix<f64> {
        let h = 1.0 / (n as f64 + 1.0);
        let mut trips = Vec::new();
        for i in 0..n {
            trips.push((i, i, 2.0 / h + 4.0 * h / 6.0));
            if i > 0 {
                trips.push((i, i - 1, -1.0 / h + h / 6.0));
                trips.push((i - 1, i, -1.0 / h + h / 6.0));
            }
        }
        SparseMatrix::from_triplets(n, n, &trips).unwrap()
    }

    #[test]
    fn solve_reproduces_right_hand_side() {
        let a = stiffness_plus_mass(40);
        let chol = SparseCholesky::factor(&a).unwrap();
        let b: Vec<f64> = (0..40).map(|i| (i as f64 * 0.37).sin()).collect();
        let x = chol.solve_vec(&b).unwrap();
        let r = a.spmv_vec(&x).unwrap();
        let err: f64 = r
            .iter()
            .zip(&b)
            .map(|(ri, bi)| (ri - bi).powi(2))
            .sum::<f64>()
            .sqrt();
        let scale: f64 = b.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!(err <= 1e-12 * scale, "residual {:e}", err);
    }

    #[test]
    fn factor_matches_dense_cholesky() {
        // Scattered pattern whose envelope is wider than its nonzeros.
        let trips = vec![
            (0usize, 0usize, 6.0f64),
            (1, 1, 7.0),
            (2, 2, 8.0),
            (3, 3, 9.0),
            (4, 4, 10.0),
            (3, 0, 1.0),
            (0, 3, 1.0),
            (4, 1, -2.0),
            (1, 4, -2.0),
            (4, 3, 0.5),
            (3, 4, 0.5),
        ];
        let a = SparseMatrix::from_triplets(5, 5, &trips).unwrap();
        let chol = SparseCholesky::factor(&a).unwrap();
        let dense = a.to_dense();
        let l_dense = dense.cholesky().unwrap();
        for i in 0..5 {
            for j in 0..=i {
                let l_env = if j >= chol.first[i] { chol.l(i, j) } else { 0.0 };
                assert!(
                    (l_env - l_dense[(i, j)]).abs() < 1e-12,
                    "L[{}][{}]: {} vs {}",
                    i,
                    j,
                    l_env,
                    l_dense[(i, j)]
                );
            }
        }
    }

    #[test]
    fn indefinite_matrix_is_rejected() {
        let trips = vec![
            (0usize, 0usize, 1.0f64),
            (0, 1, 3.0),
            (1, 0, 3.0),
            (1, 1, 1.0),
        ];
        let a = SparseMatrix::from_triplets(2, 2, &trips).unwrap();
        assert!(matches!(
            SparseCholesky::factor(&a),
            Err(crate::error::Error::NotPositiveDefinite(_))
        ));
    }

    #[test]
    fn frame_solve_handles_multiple_columns() {
        let a = stiffness_plus_mass(12);
        let chol = SparseCholesky::factor(&a).unwrap();
        let b = Frame::from_fn(12, 3, |i, j| ((i + 1) * (j + 2)) as f64 * 0.1);
        let x = chol.solve_frame(&b).unwrap();
        let r = a.spmv(&x).unwrap();
        let mut err: f64 = 0.0;
        for j in 0..3 {
            for i in 0..12 {
                err += (r.col(j)[i] - b.col(j)[i]).powi(2);
            }
        }
        assert!(err.sqrt() < 1e-12 * b.norm_fro());
    }
}
