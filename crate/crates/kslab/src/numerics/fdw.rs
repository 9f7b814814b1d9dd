//! Finite-difference weights on arbitrary nodes (Fornberg's recursion).

/// Weights `w` such that `Σ_j w_j f(x_j) ≈ f⁽ᵐ⁾(x0)`, exact for polynomials
/// of degree `< xs.len()`.
///
/// Panics if the stencil is too small for the requested derivative order or
/// contains repeated nodes.
pub fn fd_weights(xs: &[f64], x0: f64, m: usize) -> Vec<f64> {
    let n = xs.len();
    assert!(m < n, "stencil of {n} nodes cannot give derivative order {m}");
    let mut c = vec![vec![0.0_f64; m + 1]; n];
    let mut c1 = 1.0;
    let mut c4 = xs[0] - x0;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - x0;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            assert!(c3 != 0.0, "repeated stencil node {}", xs[i]);
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.into_iter().map(|row| row[m]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_uniform_stencils() {
        // Centered second derivative: [1, −2, 1]/h².
        let w = fd_weights(&[-1.0, 0.0, 1.0], 0.0, 2);
        for (got, want) in w.iter().zip([1.0, -2.0, 1.0]) {
            assert!((got - want).abs() < 1e-14);
        }
        // One-sided 4-point first derivative: [−11/6, 3, −3/2, 1/3]/h.
        let w = fd_weights(&[0.0, 1.0, 2.0, 3.0], 0.0, 1);
        for (got, want) in w.iter().zip([-11.0 / 6.0, 3.0, -1.5, 1.0 / 3.0]) {
            assert!((got - want).abs() < 1e-13);
        }
    }

    #[test]
    fn exact_on_cubics_at_scattered_nodes() {
        let xs = [0.3, 0.45, 0.9, 1.7];
        let x0 = 1.1;
        let f = |x: f64| 2.0 * x * x * x - x * x + 4.0 * x - 7.0;
        let d1 = |x: f64| 6.0 * x * x - 2.0 * x + 4.0;
        let d2 = |x: f64| 12.0 * x - 2.0;
        for (m, exact) in [(1usize, d1(x0)), (2usize, d2(x0))] {
            let w = fd_weights(&xs, x0, m);
            let got: f64 = w.iter().zip(xs).map(|(wi, xi)| wi * f(xi)).sum();
            assert!((got - exact).abs() < 1e-10, "order {m}: {got} vs {exact}");
        }
    }
}
