//! Dense LU factorization with partial pivoting (Doolittle form), generic
//! over real and complex scalars.

use super::mat::Mat;
use super::scalar::Scalar;
use crate::error::{Error, Result};

/// LU factorization `PA = LU` of a square matrix.
#[derive(Clone, Debug)]
pub struct Lu<T> {
    lu: Mat<T>,
    piv: Vec<usize>,
}

impl<T: Scalar> Lu<T> {
    /// Factor `a` (consumed). Fails on exact singularity.
    pub fn new(mut a: Mat<T>) -> Result<Self> {
        let n = a.rows();
        assert_eq!(n, a.cols(), "LU requires a square matrix");
        let mut piv = Vec::with_capacity(n);

        for k in 0..n {
            // Pivot search on column k.
            let mut p = k;
            let mut pmax = a[(k, k)].modulus();
            for i in (k + 1)..n {
                let m = a[(i, k)].modulus();
                if m > pmax {
                    pmax = m;
                    p = i;
                }
            }
            if pmax == 0.0 || !pmax.is_finite() {
                return Err(Error::numerical(format!(
                    "dense LU: singular pivot at column {k}"
                )));
            }
            piv.push(p);
            if p != k {
                let (rk, rp) = a.two_rows_mut(k, p);
                rk.swap_with_slice(rp);
            }

            let pivot = a[(k, k)];
            for i in (k + 1)..n {
                let factor = a[(i, k)] / pivot;
                a[(i, k)] = factor;
                if factor == T::ZERO {
                    continue;
                }
                let (rk, ri) = a.two_rows_mut(k, i);
                for (riv, &rkv) in ri[(k + 1)..].iter_mut().zip(&rk[(k + 1)..]) {
                    *riv -= factor * rkv;
                }
            }
        }

        Ok(Lu { lu: a, piv })
    }

    /// Dimension.
    pub fn len(&self) -> usize {
        self.lu.rows()
    }

    /// True if the system is empty.
    pub fn is_empty(&self) -> bool {
        self.lu.rows() == 0
    }

    /// Solve `Ax = b` in place.
    pub fn solve_in_place(&self, b: &mut [T]) {
        let n = self.len();
        assert_eq!(b.len(), n);

        // The factorization swaps full rows (multiplier part included), so
        // the stored L is the final permuted one: apply every recorded
        // interchange to b first, then substitute.
        for k in 0..n {
            let p = self.piv[k];
            if p != k {
                b.swap(k, p);
            }
        }
        for k in 0..n {
            let bk = b[k];
            if bk != T::ZERO {
                for i in (k + 1)..n {
                    let lik = self.lu[(i, k)];
                    b[i] -= lik * bk;
                }
            }
        }
        for k in (0..n).rev() {
            let row = self.lu.row(k);
            let mut s = b[k];
            for (j, bj) in b.iter().enumerate().skip(k + 1) {
                s -= row[j] * *bj;
            }
            b[k] = s / row[k];
        }
    }

    /// Solve with a fresh output vector.
    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }

    /// Solve `AX = B` column by column.
    pub fn solve_mat(&self, b: &Mat<T>) -> Mat<T> {
        let n = self.len();
        assert_eq!(b.rows(), n);
        let mut out = Mat::zeros(n, b.cols());
        let mut col = vec![T::ZERO; n];
        for j in 0..b.cols() {
            for i in 0..n {
                col[i] = b[(i, j)];
            }
            self.solve_in_place(&mut col);
            for i in 0..n {
                out[(i, j)] = col[i];
            }
        }
        out
    }

    /// Explicit inverse.
    pub fn inverse(&self) -> Mat<T> {
        self.solve_mat(&Mat::identity(self.len()))
    }

    /// Packed factors (unit-lower L below the diagonal, U on and above).
    pub fn factors(&self) -> &Mat<T> {
        &self.lu
    }

    /// Row interchanges applied during elimination: at step `k`, rows `k`
    /// and `pivots()[k]` were swapped.
    pub fn pivots(&self) -> &[usize] {
        &self.piv
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn real_solve_roundtrips() {
        let n = 25;
        let a = Mat::from_fn(n, n, |i, j| {
            if i == j {
                3.0 + (i as f64).sin()
            } else {
                1.0 / (1.0 + (i as f64 - j as f64).powi(2))
            }
        });
        let x_true: Vec<f64> = (0..n).map(|i| (i as f64 * 0.3).cos()).collect();
        let b = a.matvec(&x_true);
        let lu = Lu::new(a).unwrap();
        let x = lu.solve(&b);
        let err = x
            .iter()
            .zip(&x_true)
            .map(|(u, v)| (u - v).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-11, "max error {err:.3e}");
    }

    #[test]
    fn complex_inverse_multiplies_to_identity() {
        let n = 12;
        let a = Mat::from_fn(n, n, |i, j| {
            Complex64::new(
                if i == j { 4.0 } else { 0.3 / (1.0 + j as f64) },
                0.2 * (i as f64 - j as f64),
            )
        });
        let inv = Lu::new(a.clone()).unwrap().inverse();
        let prod = a.matmul(&inv);
        let mut err: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let target = if i == j { 1.0 } else { 0.0 };
                err = err.max((prod[(i, j)] - Complex64::new(target, 0.0)).norm());
            }
        }
        assert!(err < 1e-12, "identity deviation {err:.3e}");
    }

    #[test]
    fn pivoting_survives_zero_leading_entry() {
        let mut a = Mat::zeros(3, 3);
        a[(0, 1)] = 1.0;
        a[(1, 0)] = 2.0;
        a[(2, 2)] = 3.0;
        let lu = Lu::new(a).unwrap();
        let x = lu.solve(&[1.0, 4.0, 9.0]);
        assert!((x[0] - 2.0).abs() < 1e-14);
        assert!((x[1] - 1.0).abs() < 1e-14);
        assert!((x[2] - 3.0).abs() < 1e-14);
    }
}
