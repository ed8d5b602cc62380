//! Q1/Q2 tensor-product finite elements on Cartesian meshes of `(-L, L)^2`
//! with homogeneous Dirichlet boundary conditions.
//!
//! The pieces here are deliberately minimal: uniform square meshes, two
//! element orders, Gauss quadrature sized for quartic density integrands, and
//! assembly of stiffness plus weighted mass matrices.  Everything downstream
//! (energies, operators, solvers) is built from these.

mod assembly;
mod mesh;
mod potential;
mod quadrature;
mod space;

pub use assembly::{assemble_mass, assemble_stiffness};
pub use mesh::CartesianMesh;
pub use potential::{harmonic, DisorderField, Potential, PotentialField};
pub use quadrature::gauss_legendre;
pub use space::{shape_1d, shape_1d_deriv, FeSpace};
