//! Crate-wide error taxonomy.
//!
//! Every fallible operation in the crate reports one of the variants below.
//! The split mirrors how a caller should react:
//!
//! - [`Error::Config`] — the request itself is malformed (unknown key, value
//!   out of the documented range, inconsistent combination of options).
//! - [`Error::Domain`] — mathematically out of scope (e.g. mass ≥ 8π where a
//!   subcritical profile is required, α < 0, nonpositive density where
//!   positivity is part of the contract).
//! - [`Error::Contract`] — two arguments that must be compatible are not
//!   (fields on different grids, frame mismatches).
//! - [`Error::Solver`] — an iterative or direct solver failed to reach its
//!   tolerance; carries the achieved residual and the target so the caller
//!   can report or relax deliberately.
//! - [`Error::Numerical`] — a computed quantity left its validity region
//!   (NaN/overflow, loss of positivity in a positive-definite factorization).
//! - [`Error::Data`] — serialized input could not be understood.
//! - [`Error::Io`] / [`Error::Json`] — transport failures, forwarded.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Error taxonomy for the laboratory.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed request: unknown option, value outside the documented range.
    #[error("configuration error: {0}")]
    Config(String),

    /// Mathematically out of scope for the requested operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Incompatible arguments (grids, frames, dimensions).
    #[error("contract violation: {0}")]
    Contract(String),

    /// A solver stopped without reaching its tolerance.
    #[error("solver failure in {what}: residual {residual:.3e} exceeds tolerance {tolerance:.3e} after {iterations} iterations")]
    Solver {
        /// Which solve failed (human-readable).
        what: String,
        /// Residual actually achieved.
        residual: f64,
        /// Residual that was required.
        tolerance: f64,
        /// Iterations spent.
        iterations: usize,
    },

    /// A computed quantity left its validity region (NaN, overflow,
    /// positivity loss).
    #[error("numerical error: {0}")]
    Numerical(String),

    /// Serialized input could not be parsed or fails its schema.
    #[error("data error: {0}")]
    Data(String),

    /// Underlying I/O failure.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// JSON (de)serialization failure.
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Shorthand constructor for [`Error::Config`].
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    /// Shorthand constructor for [`Error::Domain`].
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// Shorthand constructor for [`Error::Contract`].
    pub fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    /// Shorthand constructor for [`Error::Numerical`].
    pub fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }

    /// Shorthand constructor for [`Error::Data`].
    pub fn data(msg: impl Into<String>) -> Self {
        Error::Data(msg.into())
    }

    /// Shorthand constructor for [`Error::Solver`].
    pub fn solver(
        what: impl Into<String>,
        residual: f64,
        tolerance: f64,
        iterations: usize,
    ) -> Self {
        Error::Solver {
            what: what.into(),
            residual,
            tolerance,
            iterations,
        }
    }
}
