//! Inexact Riemannian Newton iterations.
//!
//! Both variants solve the projected frame-Hessian system with MINRES
//! restricted to a subspace of frames, then globalize with the shared
//! Armijo backtracking.  The quotient variant works on the horizontal
//! space `{psi : Phi^T M psi = 0}`, the frame variant on the full tangent
//! space `{psi : sym(Phi^T M psi) = 0}`.  On both subspaces the dual
//! Hessian is symmetric in the Frobenius pairing, so MINRES applies
//! directly with the Euclidean-orthogonal projector onto the subspace.

use super::{
    armijo_backtrack, check_start, ConvergenceRecord, EnergyWindow, RunClock, SolverConfig,
    SolverRun, Termination,
};
use crate::error::{Error, Result};
use crate::linalg::{minres_projected, DenseMatrix, Frame};
use crate::manifold::ManifoldPoint;
use crate::problems::{
    dual_hessian_apply, dual_residual, gradient_norm, DualResidual, FrozenOperator,
    GroundStateProblem,
};
use crate::scalar::{real, Real};

#[derive(Clone, Copy, PartialEq, Eq)]
pub(crate) enum Variant {
    Grassmann,
    Stiefel,
}

/// Euclidean-orthogonal projector onto the Krylov subspace, rebuilt at each
/// outer iterate from `U = M Phi`.
pub(crate) enum SubspaceProjector<T> {
    /// Onto `{x : U^T x = 0}` via `x - U (U^T U)^{-1} U^T x`.
    Grassmann { chol: DenseMatrix<T> },
    /// Onto `{x : sym(U^T x) = 0}` via `x - U S` with
    /// `G S + S G = U^T x + x^T U` solved in the eigenbasis of `G = U^T U`.
    Stiefel { q: DenseMatrix<T>, d: Vec<T> },
}

impl<T: Real> SubspaceProjector<T> {
    pub(crate) fn build(variant: Variant, u: &Frame<T>) -> Result<Self> {
        let gram = u.transpose_mul(u);
        match variant {
            Variant::Grassmann => Ok(SubspaceProjector::Grassmann {
                chol: gram.cholesky()?,
            }),
            Variant::Stiefel => {
                let (d, q) = gram.sym_eig()?;
                if d[0] <= T::zero() {
                    return Err(Error::RankDeficient(format!(
                        "frame Gram matrix has eigenvalue {:e}",
                        d[0]
                    )));
                }
                Ok(SubspaceProjector::Stiefel { q, d })
            }
        }
    }

    pub(crate) fn apply(&self, u: &Frame<T>, y: &Frame<T>) -> Frame<T> {
        let p = u.n_cols();
        let w = u.transpose_mul(y);
        let coeff = match self {
            SubspaceProjector::Grassmann { chol } => {
                let mut c = DenseMatrix::zeros(p, p);
                let mut col = vec![T::zero(); p];
                for j in 0..p {
                    for i in 0..p {
                        col[i] = w[(i, j)];
                    }
                    DenseMatrix::cholesky_solve(chol, &mut col);
                    for i in 0..p {
                        c[(i, j)] = col[i];
                    }
                }
                c
            }
            SubspaceProjector::Stiefel { q, d } => {
                let rhs = w.add(&w.transpose());
                let hat = q.transpose().matmul(&rhs).matmul(q);
                let mut s = DenseMatrix::zeros(p, p);
                for i in 0..p {
                    for j in 0..p {
                        s[(i, j)] = hat[(i, j)] / (d[i] + d[j]);
                    }
                }
                q.matmul(&s).matmul(&q.transpose())
            }
        };
        let mut out = y.clone();
        out.axpy(-T::one(), &u.mul_small(&coeff));
        out
    }
}

/// Relative MINRES tolerance for outer iteration `k` (1-based) at residual
/// norm `res`: the absolute target `min(1/k, 1e-3 res)` expressed relative
/// to `res`.
fn forcing_tolerance<T: Real>(k: usize, res: T) -> T {
    let inv_k = T::one() / real::<T>(k as f64);
    let target = inv_k.min(real::<T>(1e-3) * res);
    (target / res).max(real(1e-14)).min(real(0.5))
}

fn newton_core<T: Real, P: GroundStateProblem<T>>(
    problem: &P,
    start: ManifoldPoint<T>,
    config: &SolverConfig<T>,
    variant: Variant,
    name: &'static str,
) -> Result<SolverRun<T>> {
    check_start(problem, &start)?;
    let clock = RunClock::new();
    let applies_before = problem.operator_applies();

    let mut point = start;
    let mut max_iterate_defect = point.defect();
    let mut max_retraction_defect = T::zero();

    let mut operator = problem.linearize(&point)?;
    let mut first = dual_residual(&operator, &point)?;
    let mut residual = gradient_norm(&point, &first);
    let mut energy = problem.energy(&point)?;
    let initial_residual = residual;
    let initial_energy = energy;

    let mut window = EnergyWindow::new(config.nonmonotone_window);
    window.push(energy);

    let mut records = Vec::new();
    let mut termination = Termination::MaxOuterReached;
    if !energy.is_finite() {
        termination = Termination::NonFiniteEnergy;
    }

    while termination == Termination::MaxOuterReached {
        if residual <= config.outer_tol {
            termination = Termination::Converged;
            break;
        }
        if records.len() >= config.max_outer {
            break;
        }
        let k = records.len() + 1;

        let (mut direction, inner_iterations) =
            solve_direction(&operator, &point, &first, residual, k, config, variant)?;

        // Keep Newton honest: fall back to steepest descent when the inexact
        // direction fails the angle test against the gradient.
        let mut slope = first.residual.dot(&direction);
        let weight = point.metric().inner(&direction, &direction);
        if !(slope <= -config.descent_floor * weight) || !slope.is_finite() {
            log::debug!(
                "{}: iteration {} falls back to steepest descent (slope {:e})",
                name,
                k,
                slope
            );
            direction = point.metric().solve(&first.residual);
            direction.scale_in_place(-T::one());
            slope = -residual * residual;
        }

        let Some(outcome) = armijo_backtrack(
            problem,
            &point,
            &direction,
            slope,
            window.reference(),
            T::one(),
            config,
        )?
        else {
            termination = Termination::LineSearchStagnation;
            break;
        };

        point = outcome.point;
        energy = outcome.energy;
        max_retraction_defect = max_retraction_defect.max(outcome.max_retraction_defect);
        max_iterate_defect = max_iterate_defect.max(point.defect());

        operator = problem.linearize(&point)?;
        first = dual_residual(&operator, &point)?;
        residual = gradient_norm(&point, &first);
        if !energy.is_finite() || !residual.is_finite() {
            termination = Termination::NonFiniteEnergy;
            break;
        }
        window.push(energy);
        records.push(ConvergenceRecord {
            iteration: records.len() + 1,
            residual,
            energy,
            step: outcome.step,
            inner_iterations,
            wall_time: clock.elapsed(),
        });
    }

    Ok(SolverRun {
        solver: name,
        point,
        records,
        termination,
        initial_residual,
        initial_energy,
        final_residual: residual,
        final_energy: energy,
        max_iterate_defect,
        max_retraction_defect,
        operator_applies: problem.operator_applies() - applies_before,
        wall_time: clock.elapsed(),
    })
}

fn solve_direction<T: Real, O: FrozenOperator<T>>(
    operator: &O,
    point: &ManifoldPoint<T>,
    first: &DualResidual<T>,
    residual: T,
    k: usize,
    config: &SolverConfig<T>,
    variant: Variant,
) -> Result<(Frame<T>, usize)> {
    let u = point.m_frame();
    let projector = SubspaceProjector::build(variant, u)?;
    let rel_tol = forcing_tolerance(k, residual);
    let rhs = first.residual.scaled(-T::one());
    let outcome = minres_projected(
        |x| dual_hessian_apply(operator, point, &first.lambda, x),
        |y| projector.apply(u, y),
        &rhs,
        rel_tol,
        config.max_inner,
    )?;
    Ok((outcome.solution, outcome.iterations))
}

/// Inexact Newton on the quotient manifold: the correction is the
/// MINRES solution of the projected Hessian system on the horizontal
/// space, globalized by backtracking along the configured retraction.
pub fn newton_grassmann<T: Real, P: GroundStateProblem<T>>(
    problem: &P,
    start: ManifoldPoint<T>,
    config: &SolverConfig<T>,
) -> Result<SolverRun<T>> {
    newton_core(problem, start, config, Variant::Grassmann, "newton_grassmann")
}

/// Inexact Newton on the frame manifold: the correction may contain
/// vertical components, which the Hessian weighs with eigenvalues of the
/// order of the residual.  The right-hand side is orthogonal to them, so
/// MINRES stays well behaved.
pub fn newton_stiefel<T: Real, P: GroundStateProblem<T>>(
    problem: &P,
    start: ManifoldPoint<T>,
    config: &SolverConfig<T>,
) -> Result<SolverRun<T>> {
    newton_core(problem, start, config, Variant::Stiefel, "newton_stiefel")
}
