//! Shared initial guess construction.
//!
//! Every solver comparison starts from the same point: the problem's
//! smooth seed frame, `M`-orthonormalized, then presmoothed by gradient
//! descent until the residual drops below the requested level.  This keeps
//! iteration counts across solvers attributable to the solvers themselves.

use super::{gradient_descent, SolverConfig};
use crate::error::Result;
use crate::linalg::m_orthonormalize;
use crate::manifold::ManifoldPoint;
use crate::problems::GroundStateProblem;
use crate::scalar::Real;

/// Builds the common starting point at residual level `target_residual`.
///
/// Returns the presmoothed point even when gradient descent runs out of
/// iterations first; the achieved residual is logged in that case.
pub fn initial_guess<T: Real, P: GroundStateProblem<T>>(
    problem: &P,
    target_residual: T,
) -> Result<ManifoldPoint<T>> {
    let mut frame = problem.guess_frame()?;
    m_orthonormalize(&mut frame, problem.metric().matrix())?;
    let point = ManifoldPoint::new(frame, problem.metric().clone())?;

    let config = SolverConfig {
        outer_tol: target_residual,
        max_outer: 2000,
        ..SolverConfig::default()
    };
    let run = gradient_descent(problem, point, &config)?;
    if !run.converged() {
        log::warn!(
            "initial guess presmoothing stopped at residual {:e} (target {:e})",
            run.final_residual,
            target_residual
        );
    }
    Ok(run.point)
}
