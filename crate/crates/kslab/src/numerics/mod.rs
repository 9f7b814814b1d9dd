//! Small numerical toolbox backing the physics modules.
//!
//! Everything here is deliberately self-contained and dense-matrix oriented:
//! the problem sizes in this crate (radial meshes up to a few thousand
//! nodes, dense operator blocks up to ~3200²) are small enough that simple,
//! carefully written O(n³) direct methods are both fast enough and easy to
//! certify. The components:
//!
//! - [`scalar`] — a minimal scalar abstraction so the banded/dense solvers
//!   work for `f64` and `Complex<f64>` alike.
//! - [`mat`] — row-major dense matrices with the handful of BLAS-like
//!   operations the crate needs.
//! - [`tridiag`] — tridiagonal systems via Gaussian elimination with partial
//!   pivoting (LAPACK `gtsv`-style, fill confined to a second
//!   superdiagonal).
//! - [`lu`] — dense LU with partial pivoting, solves and explicit inverses.
//! - [`cholesky`] — dense LLᵀ for symmetric positive definite matrices.
//! - [`eig`] — real nonsymmetric eigenvalues via balancing, stabilized
//!   elementary reduction to Hessenberg form and Francis double-shift QR,
//!   plus Hessenberg inverse iteration and back-transformation for
//!   eigenvectors/residuals of selected eigenvalues.
//! - [`symeig`] — symmetric eigenvalues via Householder tridiagonalization
//!   and the implicit-shift QL sweep.
//! - [`quad`] — adaptive Simpson quadrature and Gauss–Legendre rules.
//! - [`golden`] — golden-section search for unimodal 1-D maximization.
//! - [`fit`] — tiny least-squares helpers (line fits for decay rates).
//! - [`interp`] — local cubic interpolation on sorted tables.

pub mod cholesky;
pub mod eig;
pub mod fdw;
pub mod fit;
pub mod golden;
pub mod interp;
pub mod lu;
pub mod mat;
pub mod quad;
pub mod scalar;
pub mod symeig;
pub mod tridiag;

pub use cholesky::Cholesky;
pub use eig::{eigen_rightmost, eigenvalues, Eigenpair};
pub use fdw::fd_weights;
pub use fit::line_fit;
pub use golden::golden_max;
pub use interp::cubic_interp;
pub use lu::Lu;
pub use mat::Mat;
pub use quad::{adaptive_simpson, gauss_legendre};
pub use scalar::Scalar;
pub use symeig::sym_eigenvalues;
pub use tridiag::Tridiag;
