//! Self-consistent field iteration with linear density mixing.
//!
//! Each step freezes the density, solves the resulting linear eigenvalue
//! problem for the lowest block, and mixes the new density into the input
//! of the next operator build.  The recorded residual is the same metric
//! gradient norm the Newton solvers report, evaluated with the iterate's
//! own density, so histories are comparable across solvers.

use super::{check_start, ConvergenceRecord, RunClock, SolverConfig, SolverRun, Termination};
use crate::error::Result;
use crate::linalg::{smallest_eigenpairs, EigsConfig};
use crate::manifold::ManifoldPoint;
use crate::problems::GroundStateProblem;
use crate::scalar::{real, Real};

struct SelfConsistentData<T> {
    density: Vec<T>,
    residual: T,
    energy: T,
    operator_norm: T,
}

fn measure<T: Real, P: GroundStateProblem<T>>(
    problem: &P,
    point: &ManifoldPoint<T>,
) -> Result<SelfConsistentData<T>> {
    let density = problem.density(point)?;
    let a = problem.mean_field(&density)?;
    let a_phi = a.spmv(point.frame())?;
    let lambda = point.frame().transpose_mul(&a_phi);
    let mut residual_frame = a_phi;
    residual_frame.axpy(-T::one(), &point.m_frame().mul_small(&lambda));
    Ok(SelfConsistentData {
        density,
        residual: point.metric().dual_norm(&residual_frame),
        energy: problem.energy(point)?,
        operator_norm: a.inf_norm(),
    })
}

/// Eigensolver tolerance that keeps the eigen-residual contribution to the
/// metric gradient norm below `target`.  The conversion bounds the smallest
/// metric eigenvalue by a quarter of its smallest diagonal entry, which
/// holds for the tensor-product mass matrices and the identity alike.
fn eigen_tolerance<T: Real>(
    target: T,
    metric_min_diag: T,
    states: usize,
    operator_norm: T,
) -> T {
    let p = real::<T>(states as f64);
    let tol = target * (metric_min_diag.max(T::eps())).sqrt()
        / (real::<T>(4.0) * p.sqrt() * operator_norm.max(T::one()));
    tol.max(T::eps() * real::<T>(100.0))
}

/// Fixed-point iteration on the density: freeze, diagonalize, mix.
///
/// The eigensolves are kept tight enough that a density-independent
/// operator converges in a single step.  The `step` column of the records
/// stores the mixing weight.
pub fn scf<T: Real, P: GroundStateProblem<T>>(
    problem: &P,
    start: ManifoldPoint<T>,
    config: &SolverConfig<T>,
) -> Result<SolverRun<T>> {
    check_start(problem, &start)?;
    let clock = RunClock::new();
    let applies_before = problem.operator_applies();
    let metric = problem.metric().clone();
    let states = problem.states();

    let metric_min_diag = metric
        .matrix()
        .diag()
        .into_iter()
        .fold(T::infinity(), |a, b| a.min(b));

    let mut point = start;
    let mut max_iterate_defect = point.defect();

    let mut data = measure(problem, &point)?;
    let initial_residual = data.residual;
    let initial_energy = data.energy;
    let mut mixed_density = data.density.clone();

    let mut records = Vec::new();
    let mut local_applies: u64 = 1;
    let mut termination = Termination::MaxOuterReached;
    if !data.energy.is_finite() {
        termination = Termination::NonFiniteEnergy;
    }

    while termination == Termination::MaxOuterReached {
        if data.residual <= config.outer_tol {
            termination = Termination::Converged;
            break;
        }
        if records.len() >= config.max_outer {
            break;
        }

        let target = (real::<T>(1e-3) * data.residual).min(real::<T>(0.3) * config.outer_tol);
        let eig_cfg = EigsConfig {
            tol: eigen_tolerance(target, metric_min_diag, states, data.operator_norm),
            max_iter: 600,
            ..EigsConfig::default()
        };
        let operator = problem.mean_field(&mixed_density)?;
        let pairs = smallest_eigenpairs(&operator, metric.matrix(), states, &eig_cfg)?;
        let inner_iterations = pairs.iterations;
        local_applies += if point.dofs() <= eig_cfg.dense_threshold {
            point.dofs() as u64
        } else {
            (inner_iterations * (states + eig_cfg.guard)) as u64
        };

        point = ManifoldPoint::new(pairs.vectors, metric.clone())?;
        max_iterate_defect = max_iterate_defect.max(point.defect());

        data = measure(problem, &point)?;
        local_applies += 1;
        if !data.energy.is_finite() || !data.residual.is_finite() {
            termination = Termination::NonFiniteEnergy;
            break;
        }

        let alpha = config.scf_mixing;
        for (mixed, &fresh) in mixed_density.iter_mut().zip(data.density.iter()) {
            *mixed = (T::one() - alpha) * *mixed + alpha * fresh;
        }

        records.push(ConvergenceRecord {
            iteration: records.len() + 1,
            residual: data.residual,
            energy: data.energy,
            step: alpha,
            inner_iterations,
            wall_time: clock.elapsed(),
        });
    }

    Ok(SolverRun {
        solver: "scf",
        point,
        records,
        termination,
        initial_residual,
        initial_energy,
        final_residual: data.residual,
        final_energy: data.energy,
        max_iterate_defect,
        max_retraction_defect: T::zero(),
        operator_applies: problem.operator_applies() - applies_before + local_applies,
        wall_time: clock.elapsed(),
    })
}
