//! Real nonsymmetric dense eigensolver.
//!
//! Pipeline (classical EISPACK staging, written for row-major storage):
//!
//! 1. **balance** — iterative diagonal similarity scaling (radix 2), reduces
//!    the norm spread so the QR iteration works on a well-scaled matrix;
//! 2. **elmhes** — reduction to upper Hessenberg form by stabilized
//!    elementary similarity transformations (partial pivoting), multipliers
//!    stored below the subdiagonal, interchanges recorded;
//! 3. **hqr** — Francis double-shift QR iteration on the Hessenberg matrix,
//!    eigenvalues only, with the usual exceptional shifts every ten stalled
//!    iterations and hard deflation on negligible subdiagonals;
//! 4. for selected eigenvalues: **inverse iteration** on the clean
//!    Hessenberg matrix (O(n²) per shifted solve thanks to the band
//!    structure), back-transformed through the elmhes multipliers and the
//!    balancing scales, yielding an eigenvector of the *original* matrix and
//!    an honest residual ‖Av − λv‖₂ / ‖v‖₂ measured against it.
//!
//! Eigenvalues are reported sorted by descending real part (ties: descending
//! imaginary part), so complex-conjugate pairs are adjacent. The double-shift
//! iteration produces exactly conjugate pairs by construction.

use super::mat::Mat;
use crate::error::{Error, Result};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// One certified eigenpair of a real matrix.
#[derive(Clone, Debug)]
pub struct Eigenpair {
    /// Eigenvalue (as produced by the QR iteration).
    pub value: Complex64,
    /// Eigenvector of the original (unbalanced) matrix, 2-normalized.
    pub vector: Vec<Complex64>,
    /// Residual ‖Av − λv‖₂ / ‖v‖₂ against the original matrix.
    pub residual: f64,
}

/// All eigenvalues of `a`, sorted by descending real part.
pub fn eigenvalues(a: &Mat<f64>) -> Result<Vec<Complex64>> {
    let n = a.rows();
    assert_eq!(n, a.cols(), "eigenvalues: matrix must be square");
    let mut work = a.clone();
    balance(&mut work);
    elmhes(&mut work);
    strip_below_hessenberg(&mut work);
    let mut eigs = hqr(&mut work)?;
    sort_eigs(&mut eigs);
    Ok(eigs)
}

/// All eigenvalues plus certified eigenpairs for the `count` rightmost ones.
///
/// Returns `(all_eigenvalues_sorted, rightmost_pairs)`.
pub fn eigen_rightmost(a: &Mat<f64>, count: usize) -> Result<(Vec<Complex64>, Vec<Eigenpair>)> {
    let n = a.rows();
    assert_eq!(n, a.cols(), "eigen_rightmost: matrix must be square");

    let mut work = a.clone();
    let scale = balance(&mut work);
    let perm = elmhes(&mut work);
    let z = eltran(&work, &perm);
    let mut h_clean = work; // reuse allocation: strip the multipliers
    strip_below_hessenberg(&mut h_clean);

    let mut eigs = {
        let mut hq = h_clean.clone();
        hqr(&mut hq)?
    };
    sort_eigs(&mut eigs);

    let count = count.min(n);
    let mut pairs = Vec::with_capacity(count);
    // Reusable complex Hessenberg workspace.
    let mut shifted: Mat<Complex64> = Mat::zeros(n, n);
    for lambda in eigs.iter().take(count).copied() {
        let y = hess_inverse_iteration(&h_clean, lambda, &mut shifted)?;
        // Back-transform: v = Z y, then undo the balancing.
        let mut v = vec![Complex64::new(0.0, 0.0); n];
        for i in 0..n {
            let zrow = z.row(i);
            let mut acc = Complex64::new(0.0, 0.0);
            for (zij, yj) in zrow.iter().zip(&y) {
                acc += yj.scale(*zij);
            }
            v[i] = acc.scale(scale[i]);
        }
        let norm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        for c in &mut v {
            *c = c.scale(1.0 / norm);
        }
        // Residual against the original matrix.
        let mut rsq = 0.0;
        for i in 0..n {
            let arow = a.row(i);
            let mut acc = Complex64::new(0.0, 0.0);
            for (aij, vj) in arow.iter().zip(&v) {
                acc += vj.scale(*aij);
            }
            rsq += (acc - lambda * v[i]).norm_sqr();
        }
        pairs.push(Eigenpair {
            value: lambda,
            vector: v,
            residual: rsq.sqrt(),
        });
    }
    Ok((eigs, pairs))
}

fn sort_eigs(eigs: &mut [Complex64]) {
    eigs.sort_unstable_by(|a, b| {
        b.re.partial_cmp(&a.re)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(b.im.partial_cmp(&a.im).unwrap_or(std::cmp::Ordering::Equal))
    });
}

/// Diagonal similarity balancing (scaling phase only, radix 2). Returns the
/// per-row scale factors: an eigenvector `v` of the balanced matrix maps to
/// `v_i · scale_i` for the original matrix.
pub(crate) fn balance(a: &mut Mat<f64>) -> Vec<f64> {
    let n = a.rows();
    let mut scale = vec![1.0; n];
    const RADIX: f64 = 2.0;
    let sqrdx = RADIX * RADIX;
    loop {
        let mut done = true;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += a[(j, i)].abs();
                    r += a[(i, j)].abs();
                }
            }
            if c != 0.0 && r != 0.0 {
                let mut g = r / RADIX;
                let mut f = 1.0;
                let s = c + r;
                let mut c_var = c;
                while c_var < g {
                    f *= RADIX;
                    c_var *= sqrdx;
                }
                g = r * RADIX;
                while c_var > g {
                    f /= RADIX;
                    c_var /= sqrdx;
                }
                if (c_var + r) / f < 0.95 * s {
                    done = false;
                    let ginv = 1.0 / f;
                    scale[i] *= f;
                    for v in a.row_mut(i) {
                        *v *= ginv;
                    }
                    for j in 0..n {
                        a[(j, i)] *= f;
                    }
                }
            }
        }
        if done {
            return scale;
        }
    }
}

/// Reduction to upper Hessenberg form by stabilized elementary similarity
/// transformations. Multipliers are stored below the subdiagonal; the
/// returned vector records the row/column interchanges.
pub(crate) fn elmhes(a: &mut Mat<f64>) -> Vec<usize> {
    let n = a.rows();
    let mut perm: Vec<usize> = (0..n).collect();
    if n < 3 {
        return perm;
    }
    for m in 1..(n - 1) {
        // Pivot: largest entry in column m−1 at or below row m.
        let mut x = 0.0_f64;
        let mut pivot_row = m;
        for j in m..n {
            if a[(j, m - 1)].abs() > x.abs() {
                x = a[(j, m - 1)];
                pivot_row = j;
            }
        }
        perm[m] = pivot_row;
        if pivot_row != m {
            for j in (m - 1)..n {
                let t = a[(pivot_row, j)];
                a[(pivot_row, j)] = a[(m, j)];
                a[(m, j)] = t;
            }
            for j in 0..n {
                let t = a[(j, pivot_row)];
                a[(j, pivot_row)] = a[(j, m)];
                a[(j, m)] = t;
            }
        }
        if x != 0.0 {
            for i in (m + 1)..n {
                let mut y = a[(i, m - 1)];
                if y != 0.0 {
                    y /= x;
                    a[(i, m - 1)] = y;
                    let (rm, ri) = a.two_rows_mut(m, i);
                    for (riv, &rmv) in ri[m..].iter_mut().zip(&rm[m..]) {
                        *riv -= y * rmv;
                    }
                    for j in 0..n {
                        let t = a[(j, i)];
                        a[(j, m)] += y * t;
                    }
                }
            }
        }
    }
    perm
}

/// Accumulate the elmhes similarity transform into an explicit matrix `Z`
/// with `A_balanced = Z H Z⁻¹` (EISPACK `eltran`).
pub(crate) fn eltran(a: &Mat<f64>, perm: &[usize]) -> Mat<f64> {
    let n = a.rows();
    let mut z = Mat::identity(n);
    if n < 3 {
        return z;
    }
    for mp in (1..(n - 1)).rev() {
        for i in (mp + 1)..n {
            z[(i, mp)] = a[(i, mp - 1)];
        }
        let i = perm[mp];
        if i != mp {
            for j in mp..n {
                z[(mp, j)] = z[(i, j)];
                z[(i, j)] = 0.0;
            }
            z[(i, mp)] = 1.0;
        }
    }
    z
}

/// Zero the junk (stored multipliers) strictly below the subdiagonal.
pub(crate) fn strip_below_hessenberg(a: &mut Mat<f64>) {
    let n = a.rows();
    for i in 2..n {
        for j in 0..(i - 1) {
            a[(i, j)] = 0.0;
        }
    }
}

/// Francis double-shift QR on an upper Hessenberg matrix; eigenvalues only.
/// The matrix is destroyed.
pub(crate) fn hqr(h: &mut Mat<f64>) -> Result<Vec<Complex64>> {
    let n = h.rows();
    let mut eig = vec![Complex64::new(0.0, 0.0); n];
    if n == 0 {
        return Ok(eig);
    }

    // Pseudo-norm over the Hessenberg band.
    let mut anorm = 0.0;
    for i in 0..n {
        for j in i.saturating_sub(1)..n {
            anorm += h[(i, j)].abs();
        }
    }
    if anorm == 0.0 {
        return Ok(eig);
    }
    if !anorm.is_finite() {
        return Err(Error::numerical(
            "Francis QR: non-finite input matrix".to_string(),
        ));
    }
    let eps = f64::EPSILON;

    let mut t = 0.0; // accumulated exceptional-shift offset
    let mut nn = n as isize - 1;
    'outer: while nn >= 0 {
        let mut its = 0usize;
        loop {
            // Look for a negligible subdiagonal element.
            let mut l = nn;
            while l >= 1 {
                let lu = l as usize;
                let mut s = h[(lu - 1, lu - 1)].abs() + h[(lu, lu)].abs();
                if s == 0.0 {
                    s = anorm;
                }
                if h[(lu, lu - 1)].abs() <= eps * s {
                    break;
                }
                l -= 1;
            }
            let nnu = nn as usize;
            let x = h[(nnu, nnu)];
            if l == nn {
                // One real root found.
                eig[nnu] = Complex64::new(x + t, 0.0);
                nn -= 1;
                continue 'outer;
            }
            let y = h[(nnu - 1, nnu - 1)];
            let w = h[(nnu, nnu - 1)] * h[(nnu - 1, nnu)];
            if l == nn - 1 {
                // A 2×2 block has converged: two roots.
                let p = 0.5 * (y - x);
                let q = p * p + w;
                let zmag = q.abs().sqrt();
                let xt = x + t;
                if q >= 0.0 {
                    let z = p + zmag.copysign(p);
                    let first = xt + z;
                    eig[nnu - 1] = Complex64::new(first, 0.0);
                    eig[nnu] = if z != 0.0 {
                        Complex64::new(xt - w / z, 0.0)
                    } else {
                        Complex64::new(first, 0.0)
                    };
                } else {
                    eig[nnu - 1] = Complex64::new(xt + p, -zmag);
                    eig[nnu] = Complex64::new(xt + p, zmag);
                }
                nn -= 2;
                continue 'outer;
            }

            // No root yet: another double-shift QR sweep.
            if its == 30 {
                return Err(Error::solver(
                    "Francis QR eigenvalue iteration",
                    h[(nnu, nnu - 1)].abs(),
                    eps * anorm,
                    its,
                ));
            }
            let (mut x, mut y, mut w) = (x, y, w);
            if its == 10 || its == 20 {
                // Exceptional shift.
                t += x;
                for i in 0..=nnu {
                    let d = h[(i, i)];
                    h[(i, i)] = d - x;
                }
                let s = h[(nnu, nnu - 1)].abs() + h[(nnu - 1, nnu - 2)].abs();
                x = 0.75 * s;
                y = x;
                w = -0.4375 * s * s;
            }
            its += 1;

            // Locate the start of the bulge chase: two consecutive small
            // subdiagonals, or the top of the active window.
            let mut m = nn - 2;
            let (mut p, mut q, mut r) = (0.0_f64, 0.0_f64, 0.0_f64);
            while m >= l {
                let mu = m as usize;
                let z = h[(mu, mu)];
                let rr = x - z;
                let ss = y - z;
                p = (rr * ss - w) / h[(mu + 1, mu)] + h[(mu, mu + 1)];
                q = h[(mu + 1, mu + 1)] - z - rr - ss;
                r = h[(mu + 2, mu + 1)];
                let s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                let u = h[(mu, mu - 1)].abs() * (q.abs() + r.abs());
                let v = p.abs() * (h[(mu - 1, mu - 1)].abs() + z.abs() + h[(mu + 1, mu + 1)].abs());
                if u <= eps * v {
                    break;
                }
                m -= 1;
            }
            let mu0 = m as usize;
            for i in (mu0 + 2)..=nnu {
                h[(i, i - 2)] = 0.0;
            }
            for i in (mu0 + 3)..=nnu {
                h[(i, i - 3)] = 0.0;
            }

            // Double QR step on rows l..=nn, bulge chase from m.
            for k in mu0..nnu {
                if k != mu0 {
                    p = h[(k, k - 1)];
                    q = h[(k + 1, k - 1)];
                    r = if k != nnu - 1 { h[(k + 2, k - 1)] } else { 0.0 };
                    x = p.abs() + q.abs() + r.abs();
                    if x != 0.0 {
                        p /= x;
                        q /= x;
                        r /= x;
                    }
                }
                let s = (p * p + q * q + r * r).sqrt().copysign(p);
                if s == 0.0 {
                    continue;
                }
                if k == mu0 {
                    if l != m {
                        h[(k, k - 1)] = -h[(k, k - 1)];
                    }
                } else {
                    h[(k, k - 1)] = -s * x;
                }
                p += s;
                x = p / s;
                y = q / s;
                let zz = r / s;
                q /= p;
                r /= p;

                // Row modification (cols k..=nn).
                if k + 2 > nnu {
                    let (rk, rk1) = h.two_rows_mut(k, k + 1);
                    for (a, b) in rk[k..=nnu].iter_mut().zip(rk1[k..=nnu].iter_mut()) {
                        let pp = *a + q * *b;
                        *a -= pp * x;
                        *b -= pp * y;
                    }
                } else {
                    // Split three consecutive rows out of the flat buffer.
                    let cols = h.cols();
                    let base = k * cols;
                    let (_, rest) = h.as_mut_slice().split_at_mut(base);
                    let (rk, rest) = rest.split_at_mut(cols);
                    let (rk1, rest) = rest.split_at_mut(cols);
                    let rk2 = &mut rest[..cols];
                    for j in k..=nnu {
                        let pp = rk[j] + q * rk1[j] + r * rk2[j];
                        rk[j] -= pp * x;
                        rk1[j] -= pp * y;
                        rk2[j] -= pp * zz;
                    }
                }

                // Column modification (rows l..=min(nn, k+3)).
                let mmin = nnu.min(k + 3);
                if k + 2 > nnu {
                    for i in (l as usize)..=mmin {
                        let pp = x * h[(i, k)] + y * h[(i, k + 1)];
                        h[(i, k)] -= pp;
                        h[(i, k + 1)] -= pp * q;
                    }
                } else {
                    for i in (l as usize)..=mmin {
                        let pp = x * h[(i, k)] + y * h[(i, k + 1)] + zz * h[(i, k + 2)];
                        h[(i, k)] -= pp;
                        h[(i, k + 1)] -= pp * q;
                        h[(i, k + 2)] -= pp * r;
                    }
                }
            }
        }
    }
    Ok(eig)
}

/// Inverse iteration on a clean upper Hessenberg matrix at the (converged)
/// shift `lambda`. The Hessenberg profile makes each shifted solve O(n²).
fn hess_inverse_iteration(
    h: &Mat<f64>,
    lambda: Complex64,
    shifted: &mut Mat<Complex64>,
) -> Result<Vec<Complex64>> {
    let n = h.rows();
    let hnorm = h.norm_inf().max(lambda.norm());
    let tiny = f64::EPSILON * hnorm.max(1.0);

    // shifted ← H − λI (Hessenberg profile only; the rest stays zero).
    for i in 0..n {
        let src = h.row(i);
        let dst = shifted.row_mut(i);
        for j in i.saturating_sub(1)..n {
            dst[j] = Complex64::new(src[j], 0.0);
        }
        dst[i] -= lambda;
    }

    // Gaussian elimination with adjacent-row partial pivoting; the
    // transformations are *not* saved — they are applied to the right-hand
    // side during each solve, so we do the elimination and the first RHS
    // together, then reuse the triangular factor for the second pass via a
    // fresh elimination (cheap: O(n²)).
    let mut rng = ChaCha8Rng::seed_from_u64(0x6b736c61620d5eed);
    let mut b: Vec<Complex64> = (0..n)
        .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
        .collect();
    normalize(&mut b);

    // Eliminate, recording row ops compactly (multiplier + swap flag per
    // column) so the factor can solve both iterations.
    let mut mult = vec![Complex64::new(0.0, 0.0); n.saturating_sub(1)];
    let mut swap = vec![false; n.saturating_sub(1)];
    for k in 0..n.saturating_sub(1) {
        if shifted[(k + 1, k)].norm() > shifted[(k, k)].norm() {
            swap[k] = true;
            let (rk, rk1) = shifted.two_rows_mut(k, k + 1);
            rk[k..].swap_with_slice(&mut rk1[k..]);
        }
        let mut pivot = shifted[(k, k)];
        if pivot.norm() < tiny {
            pivot = Complex64::new(tiny, 0.0);
            shifted[(k, k)] = pivot;
        }
        let m = shifted[(k + 1, k)] / pivot;
        mult[k] = m;
        if m != Complex64::new(0.0, 0.0) {
            let (rk, rk1) = shifted.two_rows_mut(k, k + 1);
            for (a, &bv) in rk1[(k + 1)..].iter_mut().zip(&rk[(k + 1)..]) {
                *a -= m * bv;
            }
            shifted[(k + 1, k)] = Complex64::new(0.0, 0.0);
        }
    }
    if shifted[(n - 1, n - 1)].norm() < tiny {
        shifted[(n - 1, n - 1)] = Complex64::new(tiny, 0.0);
    }

    let solve = |b: &mut Vec<Complex64>, shifted: &Mat<Complex64>| {
        for k in 0..n.saturating_sub(1) {
            if swap[k] {
                b.swap(k, k + 1);
            }
            let bk = b[k];
            b[k + 1] -= mult[k] * bk;
        }
        for i in (0..n).rev() {
            let row = shifted.row(i);
            let mut s = b[i];
            for (j, bj) in b.iter().enumerate().skip(i + 1) {
                s -= row[j] * *bj;
            }
            b[i] = s / row[i];
        }
    };

    // Two inverse-iteration sweeps are ample at a converged shift.
    solve(&mut b, shifted);
    normalize(&mut b);
    solve(&mut b, shifted);
    normalize(&mut b);
    if b.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
        return Err(Error::numerical(
            "inverse iteration produced non-finite eigenvector".to_string(),
        ));
    }
    Ok(b)
}

fn normalize(v: &mut [Complex64]) {
    let norm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    if norm > 0.0 {
        for c in v.iter_mut() {
            *c = c.scale(1.0 / norm);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_spectrum_close(got: &[Complex64], want: &mut Vec<Complex64>, tol: f64) {
        // Greedy matching: each expected eigenvalue must appear once.
        for g in got {
            let (idx, dist) = want
                .iter()
                .enumerate()
                .map(|(i, w)| (i, (g - w).norm()))
                .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
                .expect("unmatched eigenvalue");
            assert!(dist < tol, "eigenvalue {g} off by {dist:.3e}");
            want.remove(idx);
        }
        assert!(want.is_empty());
    }

    #[test]
    fn companion_matrix_roots() {
        // Companion matrix of (x-1)(x-2)(x-3)(x²+1) =
        // x⁵ - 6x⁴ + 12x³ - 12x² + 11x - 6.
        let coeffs = [-6.0, 11.0, -12.0, 12.0, -6.0]; // a₀..a₄
        let n = 5;
        let mut a = Mat::zeros(n, n);
        for i in 1..n {
            a[(i, i - 1)] = 1.0;
        }
        for i in 0..n {
            a[(i, n - 1)] = -coeffs[i];
        }
        let eigs = eigenvalues(&a).unwrap();
        let mut want = vec![
            Complex64::new(1.0, 0.0),
            Complex64::new(2.0, 0.0),
            Complex64::new(3.0, 0.0),
            Complex64::new(0.0, 1.0),
            Complex64::new(0.0, -1.0),
        ];
        assert_spectrum_close(&eigs, &mut want, 1e-9);
    }

    #[test]
    fn triangular_matrix_eigenvalues_are_diagonal() {
        let n = 30;
        let a = Mat::from_fn(n, n, |i, j| {
            if j >= i {
                ((i + 2 * j) as f64).sin() + if i == j { i as f64 } else { 0.0 }
            } else {
                0.0
            }
        });
        let eigs = eigenvalues(&a).unwrap();
        let mut want: Vec<Complex64> = (0..n)
            .map(|i| Complex64::new((3 * i) as f64 % 7.0 * 0.0 + a[(i, i)], 0.0))
            .collect();
        assert_spectrum_close(&eigs, &mut want, 1e-8);
    }

    #[test]
    fn rightmost_pairs_have_small_residuals() {
        let n = 60;
        // Nonsymmetric but well-behaved test matrix.
        let a = Mat::from_fn(n, n, |i, j| {
            let d = if i == j { -(i as f64) - 1.0 } else { 0.0 };
            d + 0.5 / ((i as f64 - j as f64).powi(2) + 2.0) + if j == i + 1 { 0.8 } else { 0.0 }
        });
        let (eigs, pairs) = eigen_rightmost(&a, 4).unwrap();
        assert_eq!(eigs.len(), n);
        assert_eq!(pairs.len(), 4);
        for p in &pairs {
            assert!(
                p.residual < 1e-10 * a.norm_inf(),
                "residual {:.3e}",
                p.residual
            );
        }
        // Sorted by descending real part.
        for w in eigs.windows(2) {
            assert!(w[0].re >= w[1].re - 1e-12);
        }
    }

    #[test]
    fn conjugate_pairs_are_exact() {
        let n = 24;
        let a = Mat::from_fn(n, n, |i, j| {
            if i == j {
                -1.0
            } else if j == i + 1 {
                2.0
            } else if i == j + 1 {
                -2.0
            } else {
                0.1 * ((i * j) as f64).cos()
            }
        });
        let eigs = eigenvalues(&a).unwrap();
        for e in &eigs {
            if e.im != 0.0 {
                let conj = Complex64::new(e.re, -e.im);
                assert!(
                    eigs.iter().any(|f| *f == conj),
                    "missing exact conjugate of {e}"
                );
            }
        }
    }
}
