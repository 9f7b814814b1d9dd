//! Tiny least-squares helpers.

/// Ordinary least-squares line fit `y ≈ slope·x + intercept`.
/// Mean-centered for conditioning. Requires at least two points.
pub fn line_fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    assert_eq!(xs.len(), ys.len(), "line_fit: length mismatch");
    assert!(xs.len() >= 2, "line_fit: need at least two points");
    let n = xs.len() as f64;
    let xbar = xs.iter().sum::<f64>() / n;
    let ybar = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        let dx = x - xbar;
        sxx += dx * dx;
        sxy += dx * (y - ybar);
    }
    let slope = sxy / sxx;
    (slope, ybar - slope * xbar)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_exact_line() {
        let xs: Vec<f64> = (0..20).map(|i| i as f64 * 0.3).collect();
        let ys: Vec<f64> = xs.iter().map(|x| -2.5 * x + 0.7).collect();
        let (m, b) = line_fit(&xs, &ys);
        assert!((m + 2.5).abs() < 1e-13);
        assert!((b - 0.7).abs() < 1e-13);
    }
}
