//! Geometry of the mass-metric Stiefel manifold `{Phi : Phi^T M Phi = I_p}`
//! and its Grassmann quotient.
//!
//! Frames of coefficient vectors are orthonormal in the inner product induced
//! by a symmetric positive definite matrix `M` (a finite element mass matrix,
//! or the identity for finite differences).  The vertical space at a point
//! collects the directions `Phi Theta` with skew `Theta` that only rotate the
//! frame within its span; the horizontal space is their `M`-orthogonal
//! complement and represents tangent vectors of the quotient.

mod maps;

pub use maps::{grassmann_exp, retract_polar, retract_qr, subspace_distance};

use crate::error::{Error, Result};
use crate::linalg::{m_orthonormalize, DenseMatrix, Frame, SparseCholesky, SparseMatrix};
use crate::scalar::{real, Real};
use std::sync::Arc;

/// Inner-product matrix with its cached Cholesky factorization.
#[derive(Debug)]
pub struct Metric<T> {
    matrix: SparseMatrix<T>,
    chol: SparseCholesky<T>,
}

impl<T: Real> Metric<T> {
    pub fn new(matrix: SparseMatrix<T>) -> Result<Self> {
        if matrix.n_rows() != matrix.n_cols() {
            return Err(Error::dim(format!(
                "metric matrix is {}x{}",
                matrix.n_rows(),
                matrix.n_cols()
            )));
        }
        let chol = SparseCholesky::factor(&matrix)?;
        Ok(Metric { matrix, chol })
    }

    pub fn dim(&self) -> usize {
        self.matrix.n_rows()
    }

    pub fn matrix(&self) -> &SparseMatrix<T> {
        &self.matrix
    }

    /// `M X`.
    pub fn apply(&self, x: &Frame<T>) -> Frame<T> {
        self.matrix.spmv(x).expect("metric dimension fixed")
    }

    /// `M^{-1} R`, the dual-to-primal map.
    pub fn solve(&self, r: &Frame<T>) -> Frame<T> {
        self.chol.solve_frame(r).expect("metric dimension fixed")
    }

    /// `tr(X^T M Y)`.
    pub fn inner(&self, x: &Frame<T>, y: &Frame<T>) -> T {
        x.dot(&self.apply(y))
    }

    pub fn norm(&self, x: &Frame<T>) -> T {
        self.inner(x, x).max(T::zero()).sqrt()
    }

    /// Norm of a dual-side frame: `tr(R^T M^{-1} R)^{1/2}`.
    ///
    /// This is the metric norm of the primal vector represented by `R`,
    /// computed without forming it twice.
    pub fn dual_norm(&self, r: &Frame<T>) -> T {
        r.dot(&self.solve(r)).max(T::zero()).sqrt()
    }
}

/// `V^T M W`, the block of pairwise `M`-inner products of columns.
pub fn outer<T: Real>(
    v: &Frame<T>,
    w: &Frame<T>,
    m: &SparseMatrix<T>,
) -> Result<DenseMatrix<T>> {
    if v.n_rows() != m.n_rows() || w.n_rows() != m.n_cols() {
        return Err(Error::dim(format!(
            "outer: frames have {} and {} rows, matrix is {}x{}",
            v.n_rows(),
            w.n_rows(),
            m.n_rows(),
            m.n_cols()
        )));
    }
    Ok(v.transpose_mul(&m.spmv(w)?))
}

/// Feasibility threshold above which construction re-orthonormalizes.
fn defect_threshold<T: Real>() -> T {
    real(1e-10)
}

/// An `M`-orthonormal frame together with its metric.
#[derive(Debug, Clone)]
pub struct ManifoldPoint<T> {
    frame: Frame<T>,
    m_frame: Frame<T>,
    metric: Arc<Metric<T>>,
    defect: T,
}

impl<T: Real> ManifoldPoint<T> {
    /// Wraps a frame, measuring its feasibility defect `||Phi^T M Phi - I||_F`.
    ///
    /// A defect above 1e-10 is repaired by `M`-Gram-Schmidt (and logged); the
    /// measured raw defect stays available through [`defect`](Self::defect)
    /// so solvers can audit manifold hygiene.
    pub fn new(mut frame: Frame<T>, metric: Arc<Metric<T>>) -> Result<Self> {
        if frame.n_rows() != metric.dim() {
            return Err(Error::dim(format!(
                "point frame has {} rows, metric dimension is {}",
                frame.n_rows(),
                metric.dim()
            )));
        }
        if frame.n_cols() == 0 || frame.n_cols() > frame.n_rows() {
            return Err(Error::param(format!(
                "frame of {} columns on {} dofs is not a valid point",
                frame.n_cols(),
                frame.n_rows()
            )));
        }
        if !frame.is_finite() {
            return Err(Error::NonFinite("point frame".to_string()));
        }
        let mut m_frame = metric.apply(&frame);
        let defect = feasibility_defect(&frame, &m_frame);
        if defect > defect_threshold() {
            log::debug!(
                "re-orthonormalizing frame with feasibility defect {:e}",
                defect
            );
            m_orthonormalize(&mut frame, metric.matrix())?;
            m_frame = metric.apply(&frame);
        }
        Ok(ManifoldPoint {
            frame,
            m_frame,
            metric,
            defect,
        })
    }

    pub fn frame(&self) -> &Frame<T> {
        &self.frame
    }

    /// Cached `M Phi`.
    pub fn m_frame(&self) -> &Frame<T> {
        &self.m_frame
    }

    pub fn metric(&self) -> &Arc<Metric<T>> {
        &self.metric
    }

    /// Feasibility defect measured at construction, before any repair.
    pub fn defect(&self) -> T {
        self.defect
    }

    pub fn dofs(&self) -> usize {
        self.frame.n_rows()
    }

    pub fn states(&self) -> usize {
        self.frame.n_cols()
    }

    /// `<<Phi, Y>> = Phi^T M Y` against the cached `M Phi`.
    pub fn outer_with(&self, y: &Frame<T>) -> DenseMatrix<T> {
        self.m_frame.transpose_mul(y)
    }
}

fn feasibility_defect<T: Real>(frame: &Frame<T>, m_frame: &Frame<T>) -> T {
    let mut gram = frame.transpose_mul(m_frame);
    for i in 0..gram.rows() {
        gram[(i, i)] -= T::one();
    }
    gram.norm_fro()
}

/// Tangent frame at a base point: `<<Phi, eta>>` is skew.
#[derive(Debug, Clone)]
pub struct TangentVector<T> {
    frame: Frame<T>,
    base: ManifoldPoint<T>,
}

impl<T: Real> TangentVector<T> {
    pub fn new(base: &ManifoldPoint<T>, frame: Frame<T>) -> Result<Self> {
        let s = base.outer_with(&frame);
        let scale = T::one() + frame.norm_fro();
        if s.sym_part().norm_fro() > real::<T>(1e-10) * scale {
            return Err(Error::param(format!(
                "frame is not tangent: symmetric part of <<Phi, eta>> has norm {:e}",
                s.sym_part().norm_fro()
            )));
        }
        Ok(TangentVector {
            frame,
            base: base.clone(),
        })
    }

    pub fn frame(&self) -> &Frame<T> {
        &self.frame
    }

    pub fn base(&self) -> &ManifoldPoint<T> {
        &self.base
    }

    pub fn into_frame(self) -> Frame<T> {
        self.frame
    }
}

/// Horizontal frame at a base point: `<<Phi, psi>> = 0`.
#[derive(Debug, Clone)]
pub struct HorizontalVector<T> {
    frame: Frame<T>,
    base: ManifoldPoint<T>,
}

impl<T: Real> HorizontalVector<T> {
    pub fn new(base: &ManifoldPoint<T>, frame: Frame<T>) -> Result<Self> {
        let s = base.outer_with(&frame);
        let scale = T::one() + frame.norm_fro();
        if s.norm_fro() > real::<T>(1e-10) * scale {
            return Err(Error::param(format!(
                "frame is not horizontal: <<Phi, psi>> has norm {:e}",
                s.norm_fro()
            )));
        }
        Ok(HorizontalVector {
            frame,
            base: base.clone(),
        })
    }

    pub fn frame(&self) -> &Frame<T> {
        &self.frame
    }

    pub fn base(&self) -> &ManifoldPoint<T> {
        &self.base
    }

    pub fn into_frame(self) -> Frame<T> {
        self.frame
    }
}

/// Removes the normal component: `Y - Phi sym(<<Phi, Y>>)`.
pub fn project_tangent<T: Real>(base: &ManifoldPoint<T>, y: &Frame<T>) -> TangentVector<T> {
    let s = base.outer_with(y).sym_part();
    let mut frame = y.clone();
    frame.axpy(-T::one(), &base.frame().mul_small(&s));
    TangentVector::new(base, frame).expect("projection output is tangent by construction")
}

/// Removes the full frame component: `Y - Phi <<Phi, Y>>`.
pub fn project_horizontal<T: Real>(base: &ManifoldPoint<T>, y: &Frame<T>) -> HorizontalVector<T> {
    let s = base.outer_with(y);
    let mut frame = y.clone();
    frame.axpy(-T::one(), &base.frame().mul_small(&s));
    HorizontalVector::new(base, frame).expect("projection output is horizontal by construction")
}

#[cfg(test)]
pub(crate) mod test_support {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// 1D linear-element mass matrix on a uniform Dirichlet grid: a simple
    /// non-identity SPD metric for geometry tests.
    pub fn tridiagonal_metric(n: usize) -> Arc<Metric<f64>> {
        let h = 1.0 / (n as f64 + 1.0);
        let mut trips = Vec::new();
        for i in 0..n {
            trips.push((i, i, 4.0 * h / 6.0));
            if i > 0 {
                trips.push((i, i - 1, h / 6.0));
                trips.push((i - 1, i, h / 6.0));
            }
        }
        Arc::new(Metric::new(SparseMatrix::from_triplets(n, n, &trips).unwrap()).unwrap())
    }

    pub fn random_frame(n: usize, p: usize, seed: u64) -> Frame<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Frame::from_fn(n, p, |_, _| rng.gen::<f64>() * 2.0 - 1.0)
    }

    pub fn random_point(n: usize, p: usize, seed: u64) -> ManifoldPoint<f64> {
        let metric = tridiagonal_metric(n);
        ManifoldPoint::new(random_frame(n, p, seed), metric).unwrap()
    }

    pub fn random_skew(p: usize, seed: u64) -> DenseMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let raw = DenseMatrix::from_fn(p, p, |_, _| rng.gen::<f64>() * 2.0 - 1.0);
        raw.skew_part()
    }
}
