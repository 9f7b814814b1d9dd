//! # kslab — a radially symmetric Keller–Segel laboratory
//!
//! Numerical toolkit for the two-dimensional parabolic–parabolic
//! Keller–Segel system
//!
//! ```text
//! ∂t f = Δf − ∇·(f ∇u),      ε ∂t u = Δu + f − α u,      x ∈ ℝ², t > 0,
//! ```
//!
//! restricted to radially symmetric data, in the mass-subcritical regime
//! `M = ∫ f < 8π`. Everything is resolved on a one-dimensional radial mesh;
//! the angular direction is integrated out analytically (a planar integral
//! `∫_{ℝ²} φ` becomes `2π ∫₀^∞ φ(r) r dr`).
//!
//! The crate is organized around the questions one actually asks of this
//! system:
//!
//! - [`radial_core`] — radial grids, conservative quadrature, fields,
//!   derivative operators, and weighted norms. The quadrature weights and the
//!   divergence-form operators share one finite-volume structure, so mass
//!   accounting telescopes to rounding error for arbitrary fields.
//! - [`kernels`] — the Newtonian / screened (Bessel) potential theory:
//!   radial Poisson and Helmholtz solves, kernel evaluations, and the moment
//!   decomposition used to peel off the slow `r²`/`r⁴` moments.
//! - [`profiles`] — self-similar profile pairs `(G_ε, V_ε)`: a Newton solver
//!   for the closed exponential reduction on the same discrete rows the
//!   public operators use, mass targeting in `b`, decay and gradient
//!   certificates, and the ε → 0 comparison with the classical
//!   parabolic–elliptic profile.
//! - [`energetics`] — free energy, dissipation, relative entropies, Fisher
//!   information, the logarithmic Hardy–Littlewood–Sobolev residual, the
//!   Gagliardo–Nirenberg-type interpolation suite, renormalized entropies,
//!   and the Orlicz pair used in the uniqueness argument.
//! - [`evolve`] — positivity- and mass-preserving IMEX time stepping in the
//!   original and self-similar frames, trajectory sampling, small-time decay
//!   probes, uniqueness gap measurements, and a blow-up monitor.
//! - [`linop`] — dense assembly of the linearized operator around a profile,
//!   spectral analysis (in-house Hessenberg–QR), semigroup decay runs, the
//!   Schur-complement resolvent splitting, the drift–diffusion resolvent
//!   bound, and hypodissipativity certificates in weighted norms.
//! - [`numerics`] — the small dense/banded linear-algebra and quadrature
//!   toolbox the rest of the crate is built on (tridiagonal solves, LU,
//!   Hessenberg reduction, Francis QR, symmetric QL, Cholesky, adaptive
//!   Simpson, Gauss–Legendre, golden-section search, least squares).
//! - [`io`] — CSV/JSON serialization with `#`-prefixed provenance headers.
//!
//! # Conventions
//!
//! - A "field" is a set of node values of a radial function; densities carry
//!   the planar normalization (`mass = 2π ∫ f r dr`).
//! - Norms over the plane always include the angular `2π`; plain moments
//!   `∫ f r^j · r dr` expose the factor through a flag.
//! - The weight `⟨r⟩ = (1 + r²)^{1/2}` with default exponent `k = 8` defines
//!   the weighted `L²_k` spaces used by the spectral modules.
//! - Potentials are gauged so that the relation `u = κ * f` holds with the
//!   kernel normalization `κ₀(z) = −(1/2π) log|z|` (Newtonian) and
//!   `κ_α(z) = (1/2π) K₀(√α |z|)` (screened, α > 0).
//!
//! # Errors
//!
//! All fallible operations return [`Result`] with the crate-wide [`Error`]
//! taxonomy: configuration, domain, contract, solver-failure (with residual
//! report), numerical, data, and I/O variants.

pub mod energetics;
pub mod error;
pub mod evolve;
pub mod io;
pub mod kernels;
pub mod linop;
pub mod numerics;
pub mod profiles;
pub mod radial_core;

#[doc(hidden)]
pub mod testkit;

pub use error::{Error, Result};
