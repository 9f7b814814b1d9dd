//! Dense Cholesky factorization for symmetric positive definite matrices,
//! plus the congruence transform used to reduce symmetric generalized
//! eigenproblems to standard form.

use super::mat::Mat;
use crate::error::{Error, Result};

/// Cholesky factorization `A = L Lᵀ` of a symmetric positive definite
/// matrix (lower triangle of the input is used).
#[derive(Clone, Debug)]
pub struct Cholesky {
    l: Mat<f64>,
}

impl Cholesky {
    /// Factor `a`. Fails with a [`Error::Numerical`] if a pivot is not
    /// strictly positive (matrix not positive definite at working
    /// precision).
    pub fn new(a: &Mat<f64>) -> Result<Self> {
        let n = a.rows();
        assert_eq!(n, a.cols(), "Cholesky requires a square matrix");
        let mut l = Mat::zeros(n, n);

        for i in 0..n {
            for j in 0..=i {
                let mut s = a[(i, j)];
                for k in 0..j {
                    s -= l[(i, k)] * l[(j, k)];
                }
                if i == j {
                    if s <= 0.0 || !s.is_finite() {
                        return Err(Error::numerical(format!(
                            "Cholesky: nonpositive pivot {s:.3e} at index {i} (matrix not positive definite)"
                        )));
                    }
                    l[(i, j)] = s.sqrt();
                } else {
                    l[(i, j)] = s / l[(j, j)];
                }
            }
        }
        Ok(Cholesky { l })
    }

    /// Dimension.
    pub fn len(&self) -> usize {
        self.l.rows()
    }

    /// True if empty.
    pub fn is_empty(&self) -> bool {
        self.l.rows() == 0
    }

    /// Solve `A x = b` in place (forward then backward substitution).
    pub fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.len();
        assert_eq!(b.len(), n);
        for i in 0..n {
            let mut s = b[i];
            for k in 0..i {
                s -= self.l[(i, k)] * b[k];
            }
            b[i] = s / self.l[(i, i)];
        }
        for i in (0..n).rev() {
            let mut s = b[i];
            for k in (i + 1)..n {
                s -= self.l[(k, i)] * b[k];
            }
            b[i] = s / self.l[(i, i)];
        }
    }

    /// Congruence reduction `L⁻¹ M L⁻ᵀ` (for a symmetric `M` this is the
    /// standard-form matrix of the pencil `M x = λ A x`).
    pub fn whiten(&self, m: &Mat<f64>) -> Mat<f64> {
        let n = self.len();
        assert_eq!(m.rows(), n);
        assert_eq!(m.cols(), n);

        // Y = L⁻¹ M, row-oriented forward substitution.
        let mut y = m.clone();
        for i in 0..n {
            for k in 0..i {
                let lik = self.l[(i, k)];
                if lik != 0.0 {
                    let (yk, yi) = y.two_rows_mut(k, i);
                    for (a, &b) in yi.iter_mut().zip(yk.iter()) {
                        *a -= lik * b;
                    }
                }
            }
            let d = self.l[(i, i)];
            for v in y.row_mut(i) {
                *v /= d;
            }
        }

        // C = Y L⁻ᵀ = (L⁻¹ Yᵀ)ᵀ.
        let mut z = y.transpose();
        for i in 0..n {
            for k in 0..i {
                let lik = self.l[(i, k)];
                if lik != 0.0 {
                    let (zk, zi) = z.two_rows_mut(k, i);
                    for (a, &b) in zi.iter_mut().zip(zk.iter()) {
                        *a -= lik * b;
                    }
                }
            }
            let d = self.l[(i, i)];
            for v in z.row_mut(i) {
                *v /= d;
            }
        }
        z.transpose()
    }
}
