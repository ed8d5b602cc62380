//! Dense saddle-point formulations of the Newton step.
//!
//! Two small-scale references for the projected Krylov solver: a bordered
//! system carrying a full `p x p` multiplier block, and a Lagrange-Newton
//! system on the symmetric multiplier space with spectral deflation of the
//! gauge directions.  Both build the explicit `np`-dimensional operator,
//! so they are only for modest problem sizes.

use crate::error::{Error, Result};
use crate::linalg::{DenseMatrix, Frame};
use crate::manifold::ManifoldPoint;
use crate::problems::FrozenOperator;
use crate::scalar::{real, Real};

/// Newton direction and multiplier from the bordered system.
#[derive(Debug, Clone)]
pub struct SaddleDirection<T> {
    pub direction: Frame<T>,
    /// Full `p x p` multiplier of the orthonormality constraint.
    pub multiplier: DenseMatrix<T>,
}

/// Outcome of one deflated Lagrange-Newton solve.
#[derive(Debug, Clone)]
pub struct LagrangeNewtonStep<T> {
    pub direction: Frame<T>,
    /// Symmetric correction to the multiplier block.
    pub multiplier_update: DenseMatrix<T>,
    /// Spectral cutoff below which eigenvalues were treated as gauge modes.
    pub deflation_threshold: T,
    /// Number of deflated eigenvalues.
    pub dropped: usize,
}

/// `H = dense(A + B) - Lambda^T (x) M` in column-stacked ordering.
fn dense_hessian<T: Real>(
    op: &impl FrozenOperator<T>,
    point: &ManifoldPoint<T>,
    lambda: &DenseMatrix<T>,
) -> Result<DenseMatrix<T>> {
    let n = point.dofs();
    let p = point.states();
    let mut h = op.dense_operator()?;
    let m = point.metric().matrix();
    for i in 0..n {
        let (cols, vals) = m.row_entries(i);
        for (&k, &v) in cols.iter().zip(vals) {
            for l in 0..p {
                for j in 0..p {
                    h[(l * n + i, j * n + k)] -= lambda[(j, l)] * v;
                }
            }
        }
    }
    Ok(h)
}

/// Solves the bordered Newton system with the full multiplier block:
/// the Hessian row reads `H psi + M Phi Xi = -A(Phi) Phi` and the
/// constraint row forces `Phi^T M psi = 0` entry by entry.  The constraint
/// excludes the gauge directions outright, so the system stays regular
/// through convergence and a direct solve applies.
pub fn saddle_newton_direction<T: Real>(
    op: &impl FrozenOperator<T>,
    point: &ManifoldPoint<T>,
) -> Result<SaddleDirection<T>> {
    let n = point.dofs();
    let p = point.states();
    let np = n * p;
    let q = p * p;
    let dim = np + q;

    let a_phi = op.apply_a(point.frame())?;
    let lambda = point.frame().transpose_mul(&a_phi);
    let mut k = DenseMatrix::zeros(dim, dim);
    let h = dense_hessian(op, point, &lambda)?;
    for r in 0..np {
        for c in 0..np {
            k[(r, c)] = h[(r, c)];
        }
    }
    let u = point.m_frame();
    for a in 0..p {
        for b in 0..p {
            let row = np + a * p + b;
            for i in 0..n {
                let v = u.col(a)[i];
                k[(row, b * n + i)] = v;
                k[(b * n + i, row)] = v;
            }
        }
    }

    let mut rhs = DenseMatrix::zeros(dim, 1);
    for j in 0..p {
        for i in 0..n {
            rhs[(j * n + i, 0)] = -a_phi.col(j)[i];
        }
    }
    let sol = k.solve_lu(&rhs)?;

    let direction = Frame::from_fn(n, p, |i, j| sol[(j * n + i, 0)]);
    let multiplier = DenseMatrix::from_fn(p, p, |a, b| sol[(np + a * p + b, 0)]);
    Ok(SaddleDirection {
        direction,
        multiplier,
    })
}

/// Orthonormal basis of symmetric `p x p` matrices: diagonal units, then
/// scaled pair sums, in lexicographic `(a, b)` order with `a <= b`.
fn sym_basis(p: usize) -> Vec<(usize, usize)> {
    let mut basis = Vec::with_capacity(p * (p + 1) / 2);
    for a in 0..p {
        for b in a..p {
            basis.push((a, b));
        }
    }
    basis
}

fn sym_coefficients<T: Real>(s: &DenseMatrix<T>, basis: &[(usize, usize)]) -> Vec<T> {
    let root2 = real::<T>(2.0).sqrt();
    basis
        .iter()
        .map(|&(a, b)| {
            if a == b {
                s[(a, a)]
            } else {
                root2 * s[(a, b)]
            }
        })
        .collect()
}

fn sym_from_coefficients<T: Real>(coeffs: &[T], basis: &[(usize, usize)], p: usize) -> DenseMatrix<T> {
    let root2 = real::<T>(2.0).sqrt();
    let mut s = DenseMatrix::zeros(p, p);
    for (&(a, b), &c) in basis.iter().zip(coeffs) {
        if a == b {
            s[(a, a)] = c;
        } else {
            s[(a, b)] = c / root2;
            s[(b, a)] = c / root2;
        }
    }
    s
}

/// One Lagrange-Newton step at `(Phi, Lambda)`.
///
/// The linearized stationarity system couples the frame correction with a
/// symmetric multiplier update.  Near a minimizer the system inherits a
/// near-null space from the gauge freedom, one quasi-null vector per skew
/// generator, so the solve proceeds spectrally and deflates every
/// eigenvalue below ten times the measured quasi-null response.
pub fn lagrange_newton_step<T: Real>(
    op: &impl FrozenOperator<T>,
    point: &ManifoldPoint<T>,
    lambda: &DenseMatrix<T>,
) -> Result<LagrangeNewtonStep<T>> {
    let n = point.dofs();
    let p = point.states();
    let np = n * p;
    let basis = sym_basis(p);
    let q = basis.len();
    let dim = np + q;
    let root2 = real::<T>(2.0).sqrt();

    let a_phi = op.apply_a(point.frame())?;
    let mut residual = a_phi;
    residual.axpy(-T::one(), &point.m_frame().mul_small(lambda));

    let mut k = DenseMatrix::zeros(dim, dim);
    let h = dense_hessian(op, point, lambda)?;
    for r in 0..np {
        for c in 0..np {
            k[(r, c)] = h[(r, c)];
        }
    }
    let u = point.m_frame();
    for (idx, &(a, b)) in basis.iter().enumerate() {
        let row = np + idx;
        if a == b {
            for i in 0..n {
                let v = -u.col(a)[i];
                k[(row, a * n + i)] = v;
                k[(a * n + i, row)] = v;
            }
        } else {
            for i in 0..n {
                let va = -u.col(b)[i] / root2;
                let vb = -u.col(a)[i] / root2;
                k[(row, a * n + i)] = va;
                k[(a * n + i, row)] = va;
                k[(row, b * n + i)] = vb;
                k[(b * n + i, row)] = vb;
            }
        }
    }

    let mut rhs = vec![T::zero(); dim];
    for j in 0..p {
        for i in 0..n {
            rhs[j * n + i] = -residual.col(j)[i];
        }
    }

    // Probe the gauge modes: for each skew generator Theta the vector
    // (Phi Theta, Lambda Theta - Theta Lambda) is annihilated up to the
    // residual scale, which calibrates the deflation cutoff.
    let mut nu = T::zero();
    for a in 0..p {
        for b in (a + 1)..p {
            let mut vec_u = vec![T::zero(); dim];
            for i in 0..n {
                vec_u[b * n + i] = point.frame().col(a)[i] / root2;
                vec_u[a * n + i] = -point.frame().col(b)[i] / root2;
            }
            let mut commutator = DenseMatrix::zeros(p, p);
            for r in 0..p {
                for c in 0..p {
                    // (Lambda Theta - Theta Lambda) for Theta = (e_a e_b^T - e_b e_a^T)/sqrt(2)
                    let mut v = T::zero();
                    if c == b {
                        v += lambda[(r, a)] / root2;
                    }
                    if c == a {
                        v -= lambda[(r, b)] / root2;
                    }
                    if r == a {
                        v -= lambda[(b, c)] / root2;
                    }
                    if r == b {
                        v += lambda[(a, c)] / root2;
                    }
                    commutator[(r, c)] += v;
                }
            }
            let coeffs = sym_coefficients(&commutator, &basis);
            for (idx, &c) in coeffs.iter().enumerate() {
                vec_u[np + idx] = c;
            }
            let mut norm_u = T::zero();
            let mut norm_ku = T::zero();
            for r in 0..dim {
                let mut s = T::zero();
                for c in 0..dim {
                    s += k[(r, c)] * vec_u[c];
                }
                norm_ku += s * s;
                norm_u += vec_u[r] * vec_u[r];
            }
            if norm_u > T::zero() {
                nu = nu.max((norm_ku / norm_u).sqrt());
            }
        }
    }
    let threshold = real::<T>(10.0) * nu;

    let (vals, vecs) = k.sym_eig()?;
    let mut solution = vec![T::zero(); dim];
    let mut dropped = 0usize;
    for idx in 0..dim {
        if vals[idx].abs() <= threshold {
            dropped += 1;
            continue;
        }
        let mut proj = T::zero();
        for r in 0..dim {
            proj += vecs[(r, idx)] * rhs[r];
        }
        let scale = proj / vals[idx];
        for r in 0..dim {
            solution[r] += scale * vecs[(r, idx)];
        }
    }
    if dropped == dim {
        return Err(Error::RankDeficient(
            "every eigenvalue of the Lagrange-Newton system fell below the deflation cutoff"
                .to_string(),
        ));
    }

    let direction = Frame::from_fn(n, p, |i, j| solution[j * n + i]);
    let multiplier_update = sym_from_coefficients(&solution[np..], &basis, p);
    Ok(LagrangeNewtonStep {
        direction,
        multiplier_update,
        deflation_threshold: threshold,
        dropped,
    })
}
