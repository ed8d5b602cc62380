//! The three run modes: single solve, solver comparison from one shared
//! guess, and the mesh refinement study.
//!
//! All output files are written after the runs complete, so a failing
//! configuration or an interrupted solve never leaves partial tables; a
//! solver that stops without converging still gets its history flushed
//! and the process exits with code 2.

use crate::config::{resolve, Mode, Plan, ProblemSpec, RunConfig};
use crate::error::CliError;
use crate::instance::{Instance, SolverRun64};
use crate::output::{
    convergence_csv, mesh_csv, resolve_path, run_line, summary_csv, with_suffix, write_atomic,
    MeshRow,
};
use std::path::Path;

pub fn run(
    mode: Mode,
    config_path: &Path,
    output_dir: Option<&Path>,
    seed: Option<u64>,
    threads: usize,
) -> Result<i32, CliError> {
    let raw = RunConfig::load(config_path)?;
    let plan = resolve(raw, mode, seed)?;
    match mode {
        Mode::Solve => cmd_solve(&plan, output_dir),
        Mode::Compare => cmd_compare(&plan, output_dir, threads.max(1)),
        Mode::MeshStudy => cmd_mesh_study(&plan, output_dir),
    }
}

fn cmd_solve(plan: &Plan, out_dir: Option<&Path>) -> Result<i32, CliError> {
    let instance = Instance::build(&plan.problem, None)?;
    let start = instance.guess(plan.guess_residual)?;
    let run = instance.execute(plan.methods[0], start, &plan.solver)?;
    if let Some(csv) = &plan.csv {
        write_atomic(
            &resolve_path(out_dir, csv),
            &convergence_csv(&run.records, plan.precision),
        )?;
    }
    if let Some(field) = &plan.field {
        write_atomic(
            &resolve_path(out_dir, field),
            &instance.field_csv(&run.point, plan.precision),
        )?;
    }
    println!("{}", run_line(&run));
    Ok(if run.converged() { 0 } else { 2 })
}

/// Each worker rebuilds the problem from the spec, so runs share nothing
/// but the starting frame and per-run operator counts stay exact.
fn cmd_compare(plan: &Plan, out_dir: Option<&Path>, threads: usize) -> Result<i32, CliError> {
    let stem = plan.csv.as_ref().expect("compare always has a csv path");
    let primary = Instance::build(&plan.problem, None)?;
    let guess = primary.guess(plan.guess_residual)?;
    let frame = guess.frame().clone();

    let n = plan.methods.len();
    let mut outcomes: Vec<Option<Result<SolverRun64, CliError>>> = Vec::new();
    outcomes.resize_with(n, || None);
    std::thread::scope(|scope| {
        let indices: Vec<usize> = (0..n).collect();
        for wave in indices.chunks(threads) {
            let mut handles = Vec::new();
            for &idx in wave {
                let method = plan.methods[idx];
                let frame = &frame;
                handles.push((
                    idx,
                    scope.spawn(move || -> Result<SolverRun64, CliError> {
                        let instance = Instance::build(&plan.problem, None)?;
                        let start = instance.rebind(frame)?;
                        instance.execute(method, start, &plan.solver)
                    }),
                ));
            }
            for (idx, handle) in handles {
                outcomes[idx] = Some(
                    handle
                        .join()
                        .unwrap_or_else(|_| Err(CliError::runtime("a solver thread panicked"))),
                );
            }
        }
    });

    let mut all_ok = true;
    let mut finished: Vec<&SolverRun64> = Vec::new();
    for (method, outcome) in plan.methods.iter().zip(&outcomes) {
        match outcome.as_ref().expect("every wave was joined") {
            Ok(run) => {
                write_atomic(
                    &resolve_path(out_dir, &with_suffix(stem, method.label())),
                    &convergence_csv(&run.records, plan.precision),
                )?;
                println!("{}", run_line(run));
                finished.push(run);
                all_ok &= run.converged();
            }
            Err(err) => {
                eprintln!("gs: {}: {err}", method.label());
                all_ok = false;
            }
        }
    }
    write_atomic(
        &resolve_path(out_dir, &with_suffix(stem, "summary")),
        &summary_csv(&finished, plan.precision),
    )?;
    Ok(if all_ok { 0 } else { 2 })
}

fn cmd_mesh_study(plan: &Plan, out_dir: Option<&Path>) -> Result<i32, CliError> {
    let csv = plan.csv.as_ref().expect("mesh-study always has a csv path");
    let ProblemSpec::Gpe { levels, .. } = &plan.problem else {
        return Err(CliError::config("mesh-study needs the finite-element problem"));
    };
    // Validate every level before the first solve, so configuration
    // problems still exit without output files.
    let instances = levels
        .iter()
        .map(|&level| Instance::build(&plan.problem, Some(level)))
        .collect::<Result<Vec<_>, _>>()?;

    let mut rows = Vec::new();
    let mut all_ok = true;
    let mut failure: Option<CliError> = None;
    for (&level, instance) in levels.iter().zip(&instances) {
        let attempt = instance
            .guess(plan.guess_residual)
            .and_then(|start| instance.execute(plan.methods[0], start, &plan.solver));
        match attempt {
            Ok(run) => {
                println!("cells {:>4}: {}", level, run_line(&run));
                all_ok &= run.converged();
                rows.push(MeshRow {
                    level,
                    h: instance.mesh_h().expect("finite-element instance"),
                    n_dofs: instance.n_dofs(),
                    outer_iters: run.outer_iterations(),
                    energy: run.final_energy,
                    error_vs_finest: 0.0,
                });
            }
            Err(err) => {
                failure = Some(err);
                break;
            }
        }
    }
    if let Some(reference) = rows.last().map(|finest| finest.energy) {
        for row in &mut rows {
            row.error_vs_finest = (row.energy - reference).abs();
        }
        write_atomic(&resolve_path(out_dir, csv), &mesh_csv(&rows, plan.precision))?;
    }
    match failure {
        Some(err) => Err(err),
        None => Ok(if all_ok { 0 } else { 2 }),
    }
}
