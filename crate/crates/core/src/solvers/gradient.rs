//! Riemannian gradient descent with backtracking.

use super::{
    armijo_backtrack, check_start, EnergyWindow, RunClock, ConvergenceRecord, SolverConfig,
    SolverRun, Termination,
};
use crate::error::Result;
use crate::manifold::ManifoldPoint;
use crate::problems::{dual_residual, gradient_norm, GroundStateProblem};
use crate::scalar::{real, Real};

/// Steepest descent in the metric geometry: steps along `-grad E` with a
/// warm-started Armijo search.  The trial step opens to four times the
/// previously accepted one (capped at 1) so the search recovers from
/// overly cautious steps.
pub fn gradient_descent<T: Real, P: GroundStateProblem<T>>(
    problem: &P,
    start: ManifoldPoint<T>,
    config: &SolverConfig<T>,
) -> Result<SolverRun<T>> {
    check_start(problem, &start)?;
    let clock = RunClock::new();
    let applies_before = problem.operator_applies();

    let mut point = start;
    let mut max_iterate_defect = point.defect();
    let mut max_retraction_defect = T::zero();

    let operator = problem.linearize(&point)?;
    let mut first = dual_residual(&operator, &point)?;
    let mut residual = gradient_norm(&point, &first);
    let mut energy = problem.energy(&point)?;
    let initial_residual = residual;
    let initial_energy = energy;

    let mut window = EnergyWindow::new(config.nonmonotone_window);
    window.push(energy);

    let mut records = Vec::new();
    let mut previous_step = T::one();
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

        let direction = {
            let mut d = point.metric().solve(&first.residual);
            d.scale_in_place(-T::one());
            d
        };
        let slope = -residual * residual;
        let start_step = (real::<T>(4.0) * previous_step).min(T::one());
        let Some(outcome) =
            armijo_backtrack(problem, &point, &direction, slope, window.reference(), start_step, config)?
        else {
            termination = Termination::LineSearchStagnation;
            break;
        };

        point = outcome.point;
        energy = outcome.energy;
        previous_step = outcome.step;
        max_retraction_defect = max_retraction_defect.max(outcome.max_retraction_defect);
        max_iterate_defect = max_iterate_defect.max(point.defect());

        let operator = problem.linearize(&point)?;
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
            inner_iterations: 0,
            wall_time: clock.elapsed(),
        });
    }

    Ok(SolverRun {
        solver: "rgd",
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
