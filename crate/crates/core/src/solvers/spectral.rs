//! Extreme eigenvalues of the Hessian on the horizontal space.
//!
//! Shift-inverted Lanczos at shift zero: each step solves the projected
//! Hessian system with MINRES, so only operator applications are needed.
//! The recursion runs in the metric inner product, which makes the
//! inverted operator self-adjoint and the Ritz values approximations of
//! the reciprocals of the Hessian eigenvalues closest to zero, from both
//! sides of the spectrum.

use super::newton::{SubspaceProjector, Variant};
use crate::error::{Error, Result};
use crate::linalg::{minres_projected, DenseMatrix, Frame};
use crate::manifold::ManifoldPoint;
use crate::problems::{dual_hessian_apply, FrozenOperator};
use crate::scalar::{real, Real};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Hessian eigenvalue estimates nearest zero.
#[derive(Debug, Clone)]
pub struct SpectrumEstimate<T> {
    /// Smallest Ritz value; negative when a descent direction exists.
    pub min_value: T,
    /// Largest Ritz value reachable through the inverted operator.
    pub max_value: T,
    /// Lanczos steps actually performed.
    pub lanczos_steps: usize,
}

/// Estimates the extreme Hessian eigenvalues on the horizontal space at a
/// critical point with multiplier block `lambda`.
///
/// Requires the projected Hessian to be nonsingular, which holds at
/// nondegenerate critical points.  `steps` bounds the Lanczos length and
/// `inner_tol` is the relative tolerance of the inner MINRES solves.
pub fn horizontal_hessian_extremes<T: Real>(
    op: &impl FrozenOperator<T>,
    point: &ManifoldPoint<T>,
    lambda: &DenseMatrix<T>,
    steps: usize,
    inner_tol: T,
) -> Result<SpectrumEstimate<T>> {
    let n = point.dofs();
    let p = point.states();
    let horizontal_dim = n * p - p * p;
    let steps = steps.max(1).min(horizontal_dim.max(1));
    let metric = point.metric();
    let u = point.m_frame();
    let projector = SubspaceProjector::build(Variant::Grassmann, u)?;

    let mut rng = ChaCha8Rng::seed_from_u64(0x1a2c_05aa);
    let seed = Frame::from_fn(n, p, |_, _| real::<T>(rng.gen::<f64>() * 2.0 - 1.0));
    let mut v = projector.apply(u, &seed);
    let norm = metric.norm(&v);
    if norm <= T::eps() {
        return Err(Error::param(
            "projected start vector vanished; horizontal space is trivial",
        ));
    }
    v.scale_in_place(T::one() / norm);

    let mut basis: Vec<Frame<T>> = Vec::with_capacity(steps);
    let mut m_basis: Vec<Frame<T>> = Vec::with_capacity(steps);
    let mut alphas: Vec<T> = Vec::with_capacity(steps);
    let mut betas: Vec<T> = Vec::with_capacity(steps);

    for _ in 0..steps {
        let mv = metric.apply(&v);
        let solve = minres_projected(
            |x| dual_hessian_apply(op, point, lambda, x),
            |y| projector.apply(u, y),
            &mv,
            inner_tol,
            4000,
        )?;
        if !solve.converged {
            log::debug!(
                "spectral inner solve stalled at relative residual {:e}",
                solve.relative_residual
            );
        }
        let mut w = solve.solution;
        basis.push(v.clone());
        m_basis.push(mv);

        let j = basis.len() - 1;
        let alpha = w.dot(&m_basis[j]);
        alphas.push(alpha);
        w.axpy(-alpha, &basis[j]);
        if j > 0 {
            let beta_prev = betas[j - 1];
            w.axpy(-beta_prev, &basis[j - 1]);
        }
        // Full reorthogonalization; the basis is short and solves are inexact.
        for i in 0..basis.len() {
            let c = w.dot(&m_basis[i]);
            w.axpy(-c, &basis[i]);
        }
        let beta = metric.norm(&w);
        if beta <= T::eps() * real::<T>(64.0) {
            break;
        }
        betas.push(beta);
        w.scale_in_place(T::one() / beta);
        v = w;
    }

    let k = alphas.len();
    let mut tri = DenseMatrix::zeros(k, k);
    for i in 0..k {
        tri[(i, i)] = alphas[i];
        if i + 1 < k {
            tri[(i + 1, i)] = betas[i];
            tri[(i, i + 1)] = betas[i];
        }
    }
    let (theta, _) = tri.sym_eig()?;
    let cutoff = theta
        .iter()
        .fold(T::zero(), |a, &t| a.max(t.abs()))
        * T::eps()
        * real::<T>(100.0);
    let mut min_value = T::infinity();
    let mut max_value = T::neg_infinity();
    for &t in &theta {
        if t.abs() <= cutoff {
            continue;
        }
        let lam = T::one() / t;
        min_value = min_value.min(lam);
        max_value = max_value.max(lam);
    }
    if !min_value.is_finite() && !max_value.is_finite() {
        return Err(Error::EigenFailed(
            "no usable Ritz values from the inverted Hessian".to_string(),
        ));
    }
    Ok(SpectrumEstimate {
        min_value,
        max_value,
        lanczos_steps: k,
    })
}
