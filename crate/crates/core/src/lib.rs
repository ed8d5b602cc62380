//! Ground-state solvers for orthogonality-constrained energy minimization.
//!
//! The crate minimizes Kohn-Sham-type total energies `E(Phi)` over frames of
//! `p` discrete functions subject to `Phi^T M Phi = I`, where `M` is a mass
//! matrix (FEM) or the identity (finite differences).  It provides
//!
//! * sparse/dense kernels tailored to the frame geometry ([`linalg`]),
//! * Q1/Q2 tensor-product finite elements on Cartesian meshes ([`fem`]),
//! * the mass-metric Stiefel/Grassmann geometry: projections, retractions and
//!   the subspace exponential ([`manifold`]),
//! * two model problems, a 2D Gross-Pitaevskii energy and a 3D toy Kohn-Sham
//!   energy ([`problems`]),
//! * outer solvers: inexact Riemannian Newton (subspace and frame variants),
//!   self-consistent field iteration with density mixing, and Armijo gradient
//!   descent ([`solvers`]).
//!
//! All numerical code is generic over the scalar type through [`Real`];
//! `f64` aliases for the main types are exported at the crate root.

pub mod error;
pub mod fem;
pub mod linalg;
pub mod manifold;
pub mod problems;
pub mod scalar;
pub mod solvers;

pub use error::{Error, Result};
pub use scalar::Real;

/// `f64` dense matrix.
pub type DenseMatrix64 = linalg::DenseMatrix<f64>;
/// `f64` coefficient frame.
pub type Frame64 = linalg::Frame<f64>;
/// `f64` CSR matrix.
pub type SparseMatrix64 = linalg::SparseMatrix<f64>;
/// `f64` inner-product matrix with cached factorization.
pub type Metric64 = manifold::Metric<f64>;
/// `f64` point on the mass-metric Stiefel manifold.
pub type ManifoldPoint64 = manifold::ManifoldPoint<f64>;
/// `f64` Gross-Pitaevskii problem.
pub type GpeProblem64 = problems::GpeProblem<f64>;
/// `f64` Kohn-Sham problem.
pub type KsProblem64 = problems::KsProblem<f64>;
