//! Energy functionals and their linearizations.
//!
//! A ground-state problem exposes its energy `E`, the symmetric operator
//! `A(Phi)` with `dE(Phi)[V] = tr(V^T A(Phi) Phi)`, and the derivative term
//! `B(Phi, .)` of the nonlinearity, frozen at a point.  From these the
//! first-order residual, the Riemannian gradient and the Hessian
//! applications used by the outer solvers are assembled here, identically
//! for every model.

mod gpe;
mod ks;
mod nonlinearity;
mod xc;

pub mod fd;

pub use gpe::{GpeOperator, GpeProblem};
pub use ks::{KsAtom, KsGrid, KsOperator, KsProblem};
pub use nonlinearity::{CubicNonlinearity, NonlinearityModel};
pub use xc::{xc_energy_density, xc_potential, xc_potential_derivative};

use crate::error::{Error, Result};
use crate::linalg::{DenseMatrix, Frame, SparseMatrix};
use crate::manifold::{ManifoldPoint, Metric, TangentVector};
use crate::scalar::{real, Real};
use std::sync::Arc;

/// The operator pair of an energy, frozen at one point.
pub trait FrozenOperator<T: Real> {
    /// `A(Phi) V`.
    fn apply_a(&self, v: &Frame<T>) -> Result<Frame<T>>;

    /// `B(Phi, V)`, the density-derivative term of the Hessian.
    fn apply_b(&self, v: &Frame<T>) -> Result<Frame<T>>;

    /// The assembled `A(Phi)`.
    fn a_matrix(&self) -> &SparseMatrix<T>;

    /// Dense `np x np` matrix of `V -> A V + B(V)` in column-stacked vector
    /// ordering, as a reference for the saddle-point solvers.  Only sensible
    /// for small problems; implementations refuse `np > 5000`.
    fn dense_operator(&self) -> Result<DenseMatrix<T>>;
}

/// A minimization problem for `p` orthonormal states.
pub trait GroundStateProblem<T: Real> {
    type Frozen: FrozenOperator<T>;

    fn name(&self) -> &'static str;
    fn dofs(&self) -> usize;
    fn states(&self) -> usize;
    fn metric(&self) -> &Arc<Metric<T>>;

    fn energy(&self, point: &ManifoldPoint<T>) -> Result<T>;

    /// Freezes `A` and `B` at the given point.
    fn linearize(&self, point: &ManifoldPoint<T>) -> Result<Self::Frozen>;

    /// The density variable the self-consistent iteration mixes.
    fn density(&self, point: &ManifoldPoint<T>) -> Result<Vec<T>>;

    /// The operator `A` induced by a (possibly mixed) density.
    fn mean_field(&self, density: &[T]) -> Result<SparseMatrix<T>>;

    /// Smooth seed frame of `p` independent low-order profiles on the
    /// discretization, the raw material of the shared initial guess.
    fn guess_frame(&self) -> Result<Frame<T>>;

    /// Number of `A`/`B` applications performed so far.
    fn operator_applies(&self) -> u64;
}

/// First-order data at a point: multiplier block and dual residual.
#[derive(Debug, Clone)]
pub struct DualResidual<T> {
    /// `Lambda = Phi^T A(Phi) Phi`, symmetric.
    pub lambda: DenseMatrix<T>,
    /// `A(Phi) Phi - M Phi Lambda`; zero exactly at critical points.
    pub residual: Frame<T>,
    /// Cached `A(Phi) Phi`.
    pub a_phi: Frame<T>,
}

/// Computes the multiplier and the dual residual at a feasible point.
///
/// `Phi^T r` vanishes identically (up to the feasibility defect), so the
/// residual already represents a tangent direction of the dual metric.
pub fn dual_residual<T: Real>(
    op: &impl FrozenOperator<T>,
    point: &ManifoldPoint<T>,
) -> Result<DualResidual<T>> {
    let a_phi = op.apply_a(point.frame())?;
    let lambda = point.frame().transpose_mul(&a_phi);
    let mut residual = a_phi.clone();
    residual.axpy(-T::one(), &point.m_frame().mul_small(&lambda));
    Ok(DualResidual {
        lambda,
        residual,
        a_phi,
    })
}

/// The Riemannian gradient `M^{-1} r` as a primal tangent vector.
pub fn riemannian_gradient<T: Real>(
    point: &ManifoldPoint<T>,
    first_order: &DualResidual<T>,
) -> Result<TangentVector<T>> {
    let primal = point.metric().solve(&first_order.residual);
    TangentVector::new(point, primal)
}

/// Metric norm of the gradient, evaluated on the dual side:
/// `tr(r^T M^{-1} r)^{1/2}`.
pub fn gradient_norm<T: Real>(point: &ManifoldPoint<T>, first_order: &DualResidual<T>) -> T {
    point.metric().dual_norm(&first_order.residual)
}

/// Applies the frame Hessian in dual form: `A psi + B psi - M psi Lambda`.
///
/// For tangent `xi`, `eta` the Euclidean pairing `tr(xi^T H eta)` equals the
/// metric pairing of the Riemannian Hessian, on the frame manifold and on
/// the quotient alike.
pub fn dual_hessian_apply<T: Real>(
    op: &impl FrozenOperator<T>,
    point: &ManifoldPoint<T>,
    lambda: &DenseMatrix<T>,
    psi: &Frame<T>,
) -> Result<Frame<T>> {
    let mut out = op.apply_a(psi)?;
    out.axpy(T::one(), &op.apply_b(psi)?);
    out.axpy(-T::one(), &point.metric().apply(&psi.mul_small(lambda)));
    Ok(out)
}

/// Hessian application restricted to the horizontal space, in dual form.
///
/// The input must be horizontal; the output `y` satisfies `Phi^T y = 0`, so
/// `M^{-1} y` is horizontal again.  This is the operator the projected
/// Krylov solver iterates with.
pub fn hessian_apply_horizontal<T: Real>(
    op: &impl FrozenOperator<T>,
    point: &ManifoldPoint<T>,
    lambda: &DenseMatrix<T>,
    psi: &Frame<T>,
) -> Result<Frame<T>> {
    let overlap = point.outer_with(psi);
    let scale = T::one() + psi.norm_fro();
    if overlap.norm_fro() > real::<T>(1e-8) * scale {
        return Err(Error::param(format!(
            "hessian input is not horizontal: <<Phi, psi>> has norm {:e}",
            overlap.norm_fro()
        )));
    }
    let y = dual_hessian_apply(op, point, lambda, psi)?;
    let coeff = point.frame().transpose_mul(&y);
    let mut out = y;
    out.axpy(-T::one(), &point.m_frame().mul_small(&coeff));
    Ok(out)
}

/// Quadratic pairing `tr(xi^T (A eta + B eta - M eta Lambda))` of two tangent
/// frames, the metric pairing of the frame Hessian.
pub fn hessian_pairing<T: Real>(
    op: &impl FrozenOperator<T>,
    point: &ManifoldPoint<T>,
    lambda: &DenseMatrix<T>,
    xi: &Frame<T>,
    eta: &Frame<T>,
) -> Result<T> {
    Ok(xi.dot(&dual_hessian_apply(op, point, lambda, eta)?))
}
