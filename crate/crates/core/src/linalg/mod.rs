//! Dense and sparse linear algebra kernels.
//!
//! Everything here is deliberately plain: row-major dense matrices for small
//! blocks, CSR with envelope Cholesky for the large symmetric operators, a
//! projected MINRES, and a generalized eigensolver.  No external linear
//! algebra backend is involved, which keeps results bit-reproducible across
//! platforms.

pub mod cholesky;
pub mod dense;
pub mod eigen;
pub mod frame;
pub mod minres;
pub mod sparse;

pub use cholesky::SparseCholesky;
pub use dense::DenseMatrix;
pub use eigen::{m_orthonormalize, smallest_eigenpairs, EigenPairs, EigsConfig};
pub use frame::Frame;
pub use minres::{minres_projected, MinresOutcome};
pub use sparse::SparseMatrix;
