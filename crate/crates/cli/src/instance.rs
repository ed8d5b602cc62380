//! Problem construction and solver dispatch behind one face, so the
//! commands need not distinguish the two models.

use crate::config::{Method, ProblemSpec};
use crate::error::CliError;
use crate::output::sci;
use groundstate::fem::{CartesianMesh, FeSpace};
use groundstate::linalg::Frame;
use groundstate::manifold::ManifoldPoint;
use groundstate::problems::{GroundStateProblem, KsGrid};
use groundstate::solvers::{
    gradient_descent, initial_guess, newton_grassmann, newton_stiefel, scf, SolverConfig,
    SolverRun,
};
use groundstate::{GpeProblem64, KsProblem64};
use std::fmt::Write as _;

pub type SolverRun64 = SolverRun<f64>;
pub type Point64 = ManifoldPoint<f64>;

fn build_err(e: groundstate::Error) -> CliError {
    CliError::config(e.to_string())
}

fn run_err(e: groundstate::Error) -> CliError {
    CliError::runtime(e.to_string())
}

pub enum Instance {
    Gpe(GpeProblem64),
    Ks(KsProblem64),
}

impl Instance {
    /// Builds the problem; for the finite-element model `cells` replaces
    /// the first configured level (the mesh study passes each level).
    pub fn build(spec: &ProblemSpec, cells: Option<usize>) -> Result<Instance, CliError> {
        match spec {
            ProblemSpec::Gpe {
                half_width,
                levels,
                order,
                kappa,
                potential,
                states,
            } => {
                let cells = cells.unwrap_or(levels[0]);
                let mesh = CartesianMesh::new(*half_width, cells).map_err(build_err)?;
                let space = FeSpace::new(mesh, *order).map_err(build_err)?;
                let problem =
                    GpeProblem64::cubic(space, potential, *kappa, *states).map_err(build_err)?;
                Ok(Instance::Gpe(problem))
            }
            ProblemSpec::Ks {
                half_width,
                grid,
                atoms,
                states,
            } => {
                let grid = KsGrid::new(*half_width, *grid).map_err(build_err)?;
                let problem = KsProblem64::new(grid, atoms, *states).map_err(build_err)?;
                Ok(Instance::Ks(problem))
            }
        }
    }

    /// Shared starting point: smooth low-order frame, orthonormalized and
    /// presmoothed by gradient descent to the requested residual.
    pub fn guess(&self, target_residual: f64) -> Result<Point64, CliError> {
        match self {
            Instance::Gpe(p) => initial_guess(p, target_residual),
            Instance::Ks(p) => initial_guess(p, target_residual),
        }
        .map_err(run_err)
    }

    /// Attaches a frame computed on another copy of the same problem.
    pub fn rebind(&self, frame: &Frame<f64>) -> Result<Point64, CliError> {
        let metric = match self {
            Instance::Gpe(p) => p.metric().clone(),
            Instance::Ks(p) => p.metric().clone(),
        };
        ManifoldPoint::new(frame.clone(), metric).map_err(run_err)
    }

    pub fn execute(
        &self,
        method: Method,
        start: Point64,
        config: &SolverConfig<f64>,
    ) -> Result<SolverRun64, CliError> {
        match self {
            Instance::Gpe(p) => dispatch(p, method, start, config),
            Instance::Ks(p) => dispatch(p, method, start, config),
        }
        .map_err(run_err)
    }

    pub fn n_dofs(&self) -> usize {
        match self {
            Instance::Gpe(p) => p.space().n_dofs(),
            Instance::Ks(p) => p.grid().n_points(),
        }
    }

    /// Element edge length; the difference grid has no mesh level.
    pub fn mesh_h(&self) -> Option<f64> {
        match self {
            Instance::Gpe(p) => Some(p.space().mesh().h()),
            Instance::Ks(_) => None,
        }
    }

    /// Nodal density of the final frame, one row per degree of freedom in
    /// lexicographic node order.
    pub fn field_csv(&self, point: &Point64, digits: usize) -> String {
        let frame = point.frame();
        let density = |i: usize| -> f64 {
            (0..frame.n_cols()).map(|l| frame[(i, l)] * frame[(i, l)]).sum()
        };
        let mut out = String::new();
        match self {
            Instance::Gpe(p) => {
                out.push_str("x,y,value\n");
                for (i, (x, y)) in p.space().dof_coords().into_iter().enumerate() {
                    let _ = writeln!(
                        out,
                        "{},{},{}",
                        sci(x, digits),
                        sci(y, digits),
                        sci(density(i), digits)
                    );
                }
            }
            Instance::Ks(p) => {
                out.push_str("x,y,z,value\n");
                for i in 0..p.grid().n_points() {
                    let [x, y, z] = p.grid().coords(i);
                    let _ = writeln!(
                        out,
                        "{},{},{},{}",
                        sci(x, digits),
                        sci(y, digits),
                        sci(z, digits),
                        sci(density(i), digits)
                    );
                }
            }
        }
        out
    }
}

fn dispatch<P: GroundStateProblem<f64>>(
    problem: &P,
    method: Method,
    start: Point64,
    config: &SolverConfig<f64>,
) -> groundstate::Result<SolverRun64> {
    match method {
        Method::NewtonGrassmann => newton_grassmann(problem, start, config),
        Method::NewtonStiefel => newton_stiefel(problem, start, config),
        Method::Scf => scf(problem, start, config),
        Method::Rgd => gradient_descent(problem, start, config),
    }
}
