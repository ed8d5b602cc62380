//! CSV rendering and atomic file placement.
//!
//! Numbers are written in scientific notation with a configurable count of
//! significant digits (17 by default, which round-trips `f64`).  Wall times
//! share the format but are excluded from the determinism contract: all
//! other columns are bit-stable across reruns with the same seed.

use crate::error::CliError;
use crate::instance::SolverRun64;
use groundstate::solvers::{ConvergenceRecord, Termination};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

pub const CONVERGENCE_HEADER: &str = "iter,residual,energy,step,inner_iters,wall_time";
pub const SUMMARY_HEADER: &str =
    "solver,energy,final_residual,outer_iters,operator_applies,wall_time";
pub const MESH_HEADER: &str = "level,h,n_dofs,outer_iters,energy,energy_error_vs_finest";

/// Scientific notation with `digits` significant digits.
pub fn sci(value: f64, digits: usize) -> String {
    format!("{:.*e}", digits.saturating_sub(1), value)
}

/// Joins relative output paths onto the `--output-dir` prefix.
pub fn resolve_path(dir: Option<&Path>, path: &Path) -> PathBuf {
    match dir {
        Some(d) if path.is_relative() => d.join(path),
        _ => path.to_path_buf(),
    }
}

/// `out.csv` -> `out_newton_grassmann.csv`; names the per-solver tables of
/// a comparison and the summary next to them.
pub fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let stem = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("out");
    let ext = path.extension().and_then(|s| s.to_str()).unwrap_or("csv");
    path.with_file_name(format!("{stem}_{suffix}.{ext}"))
}

/// Writes through a sibling temp file and a rename, so concurrent writers
/// and interrupted runs never leave a half-written table behind.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let io_err = |what: &str, e: std::io::Error| {
        CliError::config(format!("cannot {what} {}: {e}", path.display()))
    };
    if let Some(dir) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| io_err("prepare", e))?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, contents).map_err(|e| io_err("write", e))?;
    fs::rename(&tmp, path).map_err(|e| io_err("place", e))
}

pub fn convergence_csv(records: &[ConvergenceRecord<f64>], digits: usize) -> String {
    let mut out = String::from(CONVERGENCE_HEADER);
    out.push('\n');
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.iteration,
            sci(r.residual, digits),
            sci(r.energy, digits),
            sci(r.step, digits),
            r.inner_iterations,
            sci(r.wall_time, digits)
        );
    }
    out
}

pub fn summary_csv(runs: &[&SolverRun64], digits: usize) -> String {
    let mut out = String::from(SUMMARY_HEADER);
    out.push('\n');
    for run in runs {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            run.solver,
            sci(run.final_energy, digits),
            sci(run.final_residual, digits),
            run.outer_iterations(),
            run.operator_applies,
            sci(run.wall_time, digits)
        );
    }
    out
}

/// One mesh level of the refinement study.
pub struct MeshRow {
    pub level: usize,
    pub h: f64,
    pub n_dofs: usize,
    pub outer_iters: usize,
    pub energy: f64,
    pub error_vs_finest: f64,
}

pub fn mesh_csv(rows: &[MeshRow], digits: usize) -> String {
    let mut out = String::from(MESH_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.level,
            sci(r.h, digits),
            r.n_dofs,
            r.outer_iters,
            sci(r.energy, digits),
            sci(r.error_vs_finest, digits)
        );
    }
    out
}

/// One human line per completed run for the terminal.
pub fn run_line(run: &SolverRun64) -> String {
    let status = match run.termination {
        Termination::Converged => "converged",
        Termination::MaxOuterReached => "hit the outer iteration cap",
        Termination::LineSearchStagnation => "stagnated in the line search",
        Termination::NonFiniteEnergy => "produced a non-finite energy",
    };
    format!(
        "{}: {} after {} outer iterations, residual {:.3e}, energy {:.12e}, {:.2} s",
        run.solver,
        status,
        run.outer_iterations(),
        run.final_residual,
        run.final_energy,
        run.wall_time
    )
}
