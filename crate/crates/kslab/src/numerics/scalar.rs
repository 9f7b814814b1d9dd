//! Minimal scalar abstraction over `f64` and `Complex<f64>`.
//!
//! The banded and dense direct solvers in this module tree are written once,
//! generically, and instantiated for real and complex arithmetic. The trait
//! is intentionally tiny: exactly what Gaussian elimination with partial
//! pivoting needs.

use num_complex::Complex64;
use std::fmt::Debug;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

/// Field scalar used by the generic linear solvers.
pub trait Scalar:
    Copy
    + Debug
    + PartialEq
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
    + Sum
    + 'static
{
    /// Additive identity.
    const ZERO: Self;
    /// Multiplicative identity.
    const ONE: Self;

    /// Modulus (absolute value); the pivoting magnitude.
    fn modulus(self) -> f64;

    /// Complex conjugate (identity for reals).
    fn conj(self) -> Self;

    /// Embed a real number.
    fn from_f64(x: f64) -> Self;

    /// Multiply by a real scalar.
    fn scale(self, s: f64) -> Self;
}

impl Scalar for f64 {
    const ZERO: Self = 0.0;
    const ONE: Self = 1.0;

    #[inline]
    fn modulus(self) -> f64 {
        self.abs()
    }

    #[inline]
    fn conj(self) -> Self {
        self
    }

    #[inline]
    fn from_f64(x: f64) -> Self {
        x
    }

    #[inline]
    fn scale(self, s: f64) -> Self {
        self * s
    }
}

impl Scalar for Complex64 {
    const ZERO: Self = Complex64 { re: 0.0, im: 0.0 };
    const ONE: Self = Complex64 { re: 1.0, im: 0.0 };

    #[inline]
    fn modulus(self) -> f64 {
        // `hypot`-free: the solvers only compare magnitudes for pivoting and
        // convergence thresholds, where |re| + |im| ordering differences are
        // irrelevant; the true modulus is still the honest choice and cheap.
        self.norm()
    }

    #[inline]
    fn conj(self) -> Self {
        Complex64 {
            re: self.re,
            im: -self.im,
        }
    }

    #[inline]
    fn from_f64(x: f64) -> Self {
        Complex64 { re: x, im: 0.0 }
    }

    #[inline]
    fn scale(self, s: f64) -> Self {
        Complex64 {
            re: self.re * s,
            im: self.im * s,
        }
    }
}
