//! Golden-section search for unimodal 1-D maximization.

/// Maximize a unimodal function on `[a, b]` to an `x`-tolerance `xtol`.
/// Returns `(argmax, max)`.
pub fn golden_max(f: impl Fn(f64) -> f64, a: f64, b: f64, xtol: f64) -> (f64, f64) {
    debug_assert!(b >= a);
    const INVPHI: f64 = 0.618_033_988_749_894_9; // (√5 − 1)/2
    const INVPHI2: f64 = 0.381_966_011_250_105_1; // 1 − invphi

    let (mut lo, mut hi) = (a, b);
    let mut h = hi - lo;
    if h <= xtol {
        let x = 0.5 * (lo + hi);
        return (x, f(x));
    }
    let mut c = lo + INVPHI2 * h;
    let mut d = lo + INVPHI * h;
    let mut fc = f(c);
    let mut fd = f(d);

    while h > xtol {
        if fc > fd {
            hi = d;
            d = c;
            fd = fc;
            h = hi - lo;
            c = lo + INVPHI2 * h;
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            h = hi - lo;
            d = lo + INVPHI * h;
            fd = f(d);
        }
    }
    if fc > fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_parabola_vertex() {
        // Near a smooth maximum the objective is flat to rounding within
        // O(√ε) of the vertex, which bounds attainable x-accuracy.
        let (x, fx) = golden_max(|x| -(x - 1.7).powi(2) + 3.0, -10.0, 10.0, 1e-12);
        assert!((x - 1.7).abs() < 1e-6);
        assert!((fx - 3.0).abs() < 1e-13);
    }

    #[test]
    fn handles_boundary_maximum() {
        let (x, _) = golden_max(|x| x, 0.0, 2.0, 1e-12);
        assert!((x - 2.0).abs() < 1e-9);
    }
}
