//! JSON run configuration: schema, validation, and resolution into typed
//! problem and solver descriptions.
//!
//! A configuration has three sections.  `problem` picks the model and its
//! discretization, `solver` lists the methods to run plus the shared solver
//! parameters, `output` names the files to write.  Unknown keys anywhere
//! are rejected, and every parameter is range-checked before anything is
//! built, so a bad configuration can never leave output files behind.

use crate::error::CliError;
use groundstate::fem::{CartesianMesh, Potential};
use groundstate::problems::{KsAtom, KsGrid};
use groundstate::solvers::{RetractionKind, SolverConfig};
use serde::Deserialize;
use std::path::{Path, PathBuf};

/// Subcommand the configuration is resolved for; method counts and the
/// shape of `cells_per_dim` depend on it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Solve,
    Compare,
    MeshStudy,
}

impl Mode {
    fn name(self) -> &'static str {
        match self {
            Mode::Solve => "solve",
            Mode::Compare => "compare",
            Mode::MeshStudy => "mesh-study",
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    problem: ProblemSection,
    solver: SolverSection,
    #[serde(default)]
    output: OutputSection,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::config(format!("{}: {e}", path.display())))
    }
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "lowercase")]
enum ProblemKind {
    Gpe,
    Ks,
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "lowercase")]
enum PotentialName {
    Harmonic,
    Disorder,
    Both,
    None,
}

/// `cells_per_dim` is a single count for solve/compare and a list of
/// levels for the mesh study.
#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum CellsSpec {
    Single(usize),
    Levels(Vec<usize>),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProblemSection {
    #[serde(rename = "type")]
    kind: ProblemKind,
    #[serde(rename = "L")]
    half_width: f64,
    cells_per_dim: Option<CellsSpec>,
    order: Option<usize>,
    kappa: Option<f64>,
    potential: Option<PotentialName>,
    epsilon: Option<f64>,
    seed: Option<u64>,
    #[serde(rename = "p")]
    states: Option<usize>,
    grid: Option<[usize; 3]>,
    atoms: Option<Vec<AtomSection>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct AtomSection {
    center: [f64; 3],
    depth: f64,
    width: f64,
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "lowercase")]
enum RetractionName {
    Qr,
    Polar,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SolverSection {
    methods: Vec<String>,
    outer_tol: Option<f64>,
    max_outer: Option<usize>,
    max_inner: Option<usize>,
    step_contraction: Option<f64>,
    armijo_slope: Option<f64>,
    descent_floor: Option<f64>,
    nonmonotone_window: Option<usize>,
    retraction: Option<RetractionName>,
    scf_mixing: Option<f64>,
    /// Residual the shared initial guess is presmoothed to.
    guess_residual: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct OutputSection {
    csv: Option<PathBuf>,
    field: Option<PathBuf>,
    precision: Option<usize>,
}

/// One of the four outer solvers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    NewtonGrassmann,
    NewtonStiefel,
    Scf,
    Rgd,
}

impl Method {
    fn parse(name: &str) -> Result<Method, CliError> {
        match name {
            "newton_grassmann" => Ok(Method::NewtonGrassmann),
            "newton_stiefel" => Ok(Method::NewtonStiefel),
            "scf" => Ok(Method::Scf),
            "rgd" => Ok(Method::Rgd),
            other => Err(CliError::config(format!(
                "unknown solver {other:?}; pick from newton_grassmann, \
                 newton_stiefel, scf, rgd"
            ))),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Method::NewtonGrassmann => "newton_grassmann",
            Method::NewtonStiefel => "newton_stiefel",
            Method::Scf => "scf",
            Method::Rgd => "rgd",
        }
    }
}

/// Fully validated problem description.  The finite-element variant keeps
/// the whole level list; single-mesh commands use `levels[0]`.
#[derive(Debug, Clone)]
pub enum ProblemSpec {
    Gpe {
        half_width: f64,
        levels: Vec<usize>,
        order: usize,
        kappa: f64,
        potential: Potential<f64>,
        states: usize,
    },
    Ks {
        half_width: f64,
        grid: [usize; 3],
        atoms: Vec<KsAtom<f64>>,
        states: usize,
    },
}

/// Everything a command needs, resolved and range-checked.
#[derive(Debug)]
pub struct Plan {
    pub problem: ProblemSpec,
    pub methods: Vec<Method>,
    pub solver: SolverConfig<f64>,
    pub guess_residual: f64,
    pub csv: Option<PathBuf>,
    pub field: Option<PathBuf>,
    pub precision: usize,
}

pub fn resolve(
    raw: RunConfig,
    mode: Mode,
    seed_override: Option<u64>,
) -> Result<Plan, CliError> {
    let methods = resolve_methods(&raw.solver.methods, mode)?;
    let (solver, guess_residual) = resolve_solver(&raw.solver)?;
    let problem = resolve_problem(raw.problem, mode, seed_override)?;
    let (csv, field, precision) = resolve_output(raw.output, mode)?;
    Ok(Plan {
        problem,
        methods,
        solver,
        guess_residual,
        csv,
        field,
        precision,
    })
}

fn resolve_methods(names: &[String], mode: Mode) -> Result<Vec<Method>, CliError> {
    let methods: Vec<Method> = names
        .iter()
        .map(|n| Method::parse(n))
        .collect::<Result<_, _>>()?;
    for (i, a) in methods.iter().enumerate() {
        if methods[..i].contains(a) {
            return Err(CliError::config(format!(
                "solver {:?} is listed twice",
                a.label()
            )));
        }
    }
    match mode {
        Mode::Solve | Mode::MeshStudy if methods.len() != 1 => Err(CliError::config(format!(
            "the {} command runs exactly one solver, got {}",
            mode.name(),
            methods.len()
        ))),
        Mode::Compare if methods.len() < 2 => Err(CliError::config(format!(
            "the compare command wants at least two solvers, got {}",
            methods.len()
        ))),
        _ => Ok(methods),
    }
}

fn positive(name: &str, value: f64) -> Result<f64, CliError> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(CliError::config(format!(
            "{name} must be positive and finite, got {value}"
        )))
    }
}

fn in_range(name: &str, value: f64, hi: f64, closed: bool) -> Result<f64, CliError> {
    let ok = value.is_finite() && value > 0.0 && if closed { value <= hi } else { value < hi };
    if ok {
        Ok(value)
    } else {
        let bracket = if closed { "]" } else { ")" };
        Err(CliError::config(format!(
            "{name} must lie in (0, {hi}{bracket}, got {value}"
        )))
    }
}

fn at_least_one(name: &str, value: usize) -> Result<usize, CliError> {
    if value >= 1 {
        Ok(value)
    } else {
        Err(CliError::config(format!("{name} must be at least 1")))
    }
}

fn resolve_solver(section: &SolverSection) -> Result<(SolverConfig<f64>, f64), CliError> {
    let d = SolverConfig::<f64>::default();
    let config = SolverConfig {
        outer_tol: positive("outer_tol", section.outer_tol.unwrap_or(d.outer_tol))?,
        max_outer: at_least_one("max_outer", section.max_outer.unwrap_or(d.max_outer))?,
        step_contraction: in_range(
            "step_contraction",
            section.step_contraction.unwrap_or(d.step_contraction),
            1.0,
            false,
        )?,
        armijo_slope: in_range(
            "armijo_slope",
            section.armijo_slope.unwrap_or(d.armijo_slope),
            0.5,
            true,
        )?,
        descent_floor: in_range(
            "descent_floor",
            section.descent_floor.unwrap_or(d.descent_floor),
            1.0,
            false,
        )?,
        max_inner: at_least_one("max_inner", section.max_inner.unwrap_or(d.max_inner))?,
        nonmonotone_window: at_least_one(
            "nonmonotone_window",
            section.nonmonotone_window.unwrap_or(d.nonmonotone_window),
        )?,
        retraction: match section.retraction {
            Some(RetractionName::Qr) | None => RetractionKind::Qr,
            Some(RetractionName::Polar) => RetractionKind::Polar,
        },
        scf_mixing: in_range("scf_mixing", section.scf_mixing.unwrap_or(d.scf_mixing), 1.0, true)?,
    };
    let guess_residual = positive(
        "guess_residual",
        section.guess_residual.unwrap_or(1e-2),
    )?;
    Ok((config, guess_residual))
}

/// Rejects a key that only the other problem type understands.
fn forbid<V>(value: &Option<V>, key: &str, reason: &str) -> Result<(), CliError> {
    if value.is_some() {
        Err(CliError::config(format!("{key} {reason}")))
    } else {
        Ok(())
    }
}

fn resolve_problem(
    section: ProblemSection,
    mode: Mode,
    seed_override: Option<u64>,
) -> Result<ProblemSpec, CliError> {
    let states = at_least_one("p", section.states.unwrap_or(1))?;
    match section.kind {
        ProblemKind::Gpe => {
            forbid(&section.grid, "grid", "sizes the difference-grid model; \
                the finite-element problem takes cells_per_dim")?;
            forbid(&section.atoms, "atoms", "belong to the difference-grid model")?;
            let levels = resolve_levels(section.cells_per_dim, mode, section.half_width)?;
            let order = section.order.unwrap_or(2);
            if order != 1 && order != 2 {
                return Err(CliError::config(format!(
                    "order must be 1 or 2, got {order}"
                )));
            }
            let kappa = section.kappa.unwrap_or(0.0);
            if !kappa.is_finite() || kappa < 0.0 {
                return Err(CliError::config(format!(
                    "kappa must be nonnegative and finite, got {kappa}"
                )));
            }
            let seed = seed_override.or(section.seed).unwrap_or(0);
            let potential = match section.potential.unwrap_or(PotentialName::Harmonic) {
                PotentialName::Harmonic | PotentialName::None
                    if section.epsilon.is_some() =>
                {
                    return Err(CliError::config(
                        "epsilon only configures the disorder potentials",
                    ));
                }
                PotentialName::Harmonic => Potential::Harmonic,
                PotentialName::None => Potential::None,
                name => {
                    let epsilon = section.epsilon.ok_or_else(|| {
                        CliError::config("the disorder potentials need epsilon")
                    })?;
                    let epsilon = in_range("epsilon", epsilon, 1.0, true)?;
                    match name {
                        PotentialName::Disorder => Potential::Disorder { epsilon, seed },
                        _ => Potential::HarmonicDisorder { epsilon, seed },
                    }
                }
            };
            Ok(ProblemSpec::Gpe {
                half_width: section.half_width,
                levels,
                order,
                kappa,
                potential,
                states,
            })
        }
        ProblemKind::Ks => {
            if mode == Mode::MeshStudy {
                return Err(CliError::config(
                    "mesh-study varies cells_per_dim, which only the \
                     finite-element problem has",
                ));
            }
            forbid(&section.cells_per_dim, "cells_per_dim", "is a finite-element \
                setting; the difference-grid model takes grid")?;
            forbid(&section.order, "order", "is a finite-element setting")?;
            forbid(&section.kappa, "kappa", "is a finite-element setting")?;
            forbid(&section.potential, "potential", "is a finite-element setting")?;
            forbid(&section.epsilon, "epsilon", "is a finite-element setting")?;
            let grid = section.grid.ok_or_else(|| {
                CliError::config("the difference-grid model needs grid: [nx, ny, nz]")
            })?;
            KsGrid::new(section.half_width, grid)
                .map_err(|e| CliError::config(e.to_string()))?;
            let atoms = section
                .atoms
                .unwrap_or_default()
                .into_iter()
                .map(|a| KsAtom {
                    center: a.center,
                    depth: a.depth,
                    width: a.width,
                })
                .collect();
            Ok(ProblemSpec::Ks {
                half_width: section.half_width,
                grid,
                atoms,
                states,
            })
        }
    }
}

fn resolve_levels(
    cells: Option<CellsSpec>,
    mode: Mode,
    half_width: f64,
) -> Result<Vec<usize>, CliError> {
    let cells = cells.ok_or_else(|| {
        CliError::config("the finite-element problem needs cells_per_dim")
    })?;
    let mut levels = match (mode, cells) {
        (Mode::MeshStudy, CellsSpec::Levels(v)) => v,
        (Mode::MeshStudy, CellsSpec::Single(_)) => {
            return Err(CliError::config(
                "mesh-study wants a list of cells_per_dim levels",
            ));
        }
        (_, CellsSpec::Single(c)) => vec![c],
        (_, CellsSpec::Levels(_)) => {
            return Err(CliError::config(
                "this command wants a single cells_per_dim value, not a list",
            ));
        }
    };
    if mode == Mode::MeshStudy && levels.len() < 2 {
        return Err(CliError::config(
            "the mesh study needs at least two cells_per_dim levels",
        ));
    }
    levels.sort_unstable();
    if levels.windows(2).any(|w| w[0] == w[1]) {
        return Err(CliError::config("cells_per_dim levels repeat"));
    }
    for &level in &levels {
        CartesianMesh::new(half_width, level).map_err(|e| CliError::config(e.to_string()))?;
    }
    Ok(levels)
}

fn resolve_output(
    section: OutputSection,
    mode: Mode,
) -> Result<(Option<PathBuf>, Option<PathBuf>, usize), CliError> {
    let precision = section.precision.unwrap_or(17);
    if !(1..=17).contains(&precision) {
        return Err(CliError::config(format!(
            "precision must lie in 1..=17 significant digits, got {precision}"
        )));
    }
    if mode != Mode::Solve && section.csv.is_none() {
        return Err(CliError::config(format!(
            "the {} command writes a CSV; set output.csv",
            mode.name()
        )));
    }
    if mode != Mode::Solve && section.field.is_some() {
        return Err(CliError::config(
            "field dumps belong to the solve command",
        ));
    }
    Ok((section.csv, section.field, precision))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> RunConfig {
        serde_json::from_str(text).unwrap()
    }

    fn minimal_gpe(methods: &str) -> String {
        format!(
            r#"{{"problem": {{"type": "gpe", "L": 8.0, "cells_per_dim": 8}},
                "solver": {{"methods": [{methods}]}},
                "output": {{"csv": "out.csv"}}}}"#
        )
    }

    #[test]
    fn defaults_fill_the_plan() {
        let plan = resolve(parse(&minimal_gpe("\"newton_grassmann\"")), Mode::Solve, None)
            .unwrap();
        assert_eq!(plan.methods, vec![Method::NewtonGrassmann]);
        assert_eq!(plan.precision, 17);
        assert!((plan.guess_residual - 1e-2).abs() <= 1e-15);
        match plan.problem {
            ProblemSpec::Gpe {
                order,
                kappa,
                ref potential,
                states,
                ..
            } => {
                assert_eq!(order, 2);
                assert_eq!(kappa, 0.0);
                assert_eq!(*potential, Potential::Harmonic);
                assert_eq!(states, 1);
            }
            _ => panic!("wrong problem kind"),
        }
    }

    #[test]
    fn unknown_solver_names_are_refused() {
        let err = resolve(parse(&minimal_gpe("\"newton\"")), Mode::Solve, None).unwrap_err();
        assert!(err.to_string().contains("unknown solver"));
    }

    #[test]
    fn unknown_keys_fail_at_parse_time() {
        let text = r#"{"problem": {"type": "gpe", "L": 8.0, "cells_per_dim": 8, "cells": 9},
            "solver": {"methods": ["scf"]}}"#;
        assert!(serde_json::from_str::<RunConfig>(text).is_err());
    }

    #[test]
    fn method_counts_depend_on_the_command() {
        let two = minimal_gpe("\"newton_grassmann\", \"scf\"");
        assert!(resolve(parse(&two), Mode::Solve, None).is_err());
        assert!(resolve(parse(&two), Mode::Compare, None).is_ok());
        let one = minimal_gpe("\"scf\"");
        assert!(resolve(parse(&one), Mode::Compare, None).is_err());
        let twice = minimal_gpe("\"scf\", \"scf\"");
        assert!(resolve(parse(&twice), Mode::Compare, None)
            .unwrap_err()
            .to_string()
            .contains("twice"));
    }

    #[test]
    fn mesh_study_wants_a_level_list() {
        assert!(resolve(parse(&minimal_gpe("\"newton_grassmann\"")), Mode::MeshStudy, None)
            .is_err());
        let text = r#"{"problem": {"type": "gpe", "L": 8.0, "cells_per_dim": [16, 4, 8]},
            "solver": {"methods": ["newton_grassmann"]},
            "output": {"csv": "mesh.csv"}}"#;
        let plan = resolve(parse(text), Mode::MeshStudy, None).unwrap();
        match plan.problem {
            ProblemSpec::Gpe { ref levels, .. } => assert_eq!(levels, &[4, 8, 16]),
            _ => panic!("wrong problem kind"),
        }
        let scalar = r#"{"problem": {"type": "gpe", "L": 8.0, "cells_per_dim": [4, 6]},
            "solver": {"methods": ["newton_grassmann"]},
            "output": {"csv": "mesh.csv"}}"#;
        // 6 is not a power of two.
        assert!(resolve(parse(scalar), Mode::MeshStudy, None).is_err());
    }

    #[test]
    fn seed_flag_overrides_the_config_seed() {
        let text = r#"{"problem": {"type": "gpe", "L": 8.0, "cells_per_dim": 8,
                "potential": "disorder", "epsilon": 0.25, "seed": 3},
            "solver": {"methods": ["rgd"]}}"#;
        let plan = resolve(parse(text), Mode::Solve, Some(11)).unwrap();
        match plan.problem {
            ProblemSpec::Gpe { ref potential, .. } => {
                assert_eq!(*potential, Potential::Disorder { epsilon: 0.25, seed: 11 });
            }
            _ => panic!("wrong problem kind"),
        }
    }

    #[test]
    fn cross_model_keys_are_rejected() {
        let ks_with_cells = r#"{"problem": {"type": "ks", "L": 4.0, "grid": [5, 5, 5],
                "cells_per_dim": 8},
            "solver": {"methods": ["scf"]}}"#;
        assert!(resolve(parse(ks_with_cells), Mode::Solve, None).is_err());
        let gpe_with_grid = r#"{"problem": {"type": "gpe", "L": 8.0, "cells_per_dim": 8,
                "grid": [5, 5, 5]},
            "solver": {"methods": ["scf"]}}"#;
        assert!(resolve(parse(gpe_with_grid), Mode::Solve, None).is_err());
        let disorder_without_epsilon = r#"{"problem": {"type": "gpe", "L": 8.0,
                "cells_per_dim": 8, "potential": "disorder"},
            "solver": {"methods": ["scf"]}}"#;
        assert!(resolve(parse(disorder_without_epsilon), Mode::Solve, None).is_err());
    }

    #[test]
    fn solver_parameters_are_range_checked() {
        let bad = r#"{"problem": {"type": "gpe", "L": 8.0, "cells_per_dim": 8},
            "solver": {"methods": ["scf"], "scf_mixing": 1.5}}"#;
        assert!(resolve(parse(bad), Mode::Solve, None).is_err());
        let bad = r#"{"problem": {"type": "gpe", "L": 8.0, "cells_per_dim": 8},
            "solver": {"methods": ["scf"], "armijo_slope": 0.7}}"#;
        assert!(resolve(parse(bad), Mode::Solve, None).is_err());
    }

    #[test]
    fn field_dumps_are_solve_only() {
        let text = r#"{"problem": {"type": "gpe", "L": 8.0, "cells_per_dim": 8},
            "solver": {"methods": ["scf", "rgd"]},
            "output": {"csv": "out.csv", "field": "density.csv"}}"#;
        assert!(resolve(parse(text), Mode::Compare, None)
            .unwrap_err()
            .to_string()
            .contains("solve"));
    }
}
