//! Shared oracles and reference data for tests.
//!
//! Everything here exists to validate the production code against
//! *independent* computations: high-order reference quadrature, brute-force
//! integral representations, and frozen constants obtained from multiple
//! independent evaluations. Not part of the supported API.

use crate::numerics::{adaptive_simpson, gauss_legendre};
use crate::radial_core::Field;
use std::f64::consts::{PI, TAU};

/// Reference value of `2π ∫₀^{r_max} g(r) r dr` by 129-point Gauss–Legendre
/// quadrature (machine accurate for analytic integrands on the interval).
pub fn reference_integral(r_max: f64, g: impl Fn(f64) -> f64) -> f64 {
    let (xs, ws) = gauss_legendre(129);
    let half = 0.5 * r_max;
    let mut s = 0.0;
    for (x, w) in xs.iter().zip(&ws) {
        let r = half * (x + 1.0);
        s += w * half * g(r) * r;
    }
    TAU * s
}

/// `(2π ∫ v² (1+r²)^e r dr)^{1/2}` for arbitrary (possibly negative)
/// exponents; used to probe weighted estimates outside the validated
/// parameter range of `NormSpace`.
pub fn weighted_l2(f: &Field, exponent: f64) -> f64 {
    let grid = f.grid();
    let mut s = 0.0;
    for ((w, &r), &v) in grid.weights().iter().zip(grid.nodes()).zip(f.values()) {
        s += w * v * v * (1.0 + r * r).powf(exponent);
    }
    (TAU * s).sqrt()
}

/// Frozen modified Bessel values `K₀(x)` for cross-checking the screened
/// kernel: obtained from two independent evaluations (series + asymptotic
/// continued fraction, and numerical quadrature of the integral
/// representation), agreeing to the digits shown.
pub const BESSEL_K0: [(f64, f64); 3] = [
    (0.5, 0.924_419_071_227_666),
    (1.0, 0.421_024_438_240_708_34),
    (2.0, 0.113_893_872_749_533_44),
];

/// Brute-force evaluation of the screened-kernel integral
/// `(1/4π) ∫₀^∞ t⁻¹ exp(−s²/(4t) − αt) dt` in the original `t` variable
/// (no exponential substitution), as an independent oracle.
pub fn brute_force_kernel(alpha: f64, s: f64) -> f64 {
    assert!(alpha > 0.0 && s > 0.0);
    // Outside [t_lo, t_hi] one of the exponents is below e^{−750}.  The
    // integrand peaks at t* = s/(2√α); splitting around the peak keeps the
    // quadrature seed points from all landing in the negligible tails.
    let t_lo = s * s / 3000.0;
    let t_hi = 750.0 / alpha;
    let t_peak = s / (2.0 * alpha.sqrt());
    let mut cuts = vec![t_lo, t_peak / 8.0, t_peak, 8.0 * t_peak, t_hi];
    cuts.retain(|&t| (t_lo..=t_hi).contains(&t));
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut val = 0.0;
    for pair in cuts.windows(2) {
        val += adaptive_simpson(
            &mut |t: f64| (-s * s / (4.0 * t) - alpha * t).exp() / t,
            pair[0],
            pair[1],
            1e-12,
        )
        .expect("kernel oracle quadrature failed");
    }
    val / (4.0 * PI)
}

/// A smooth mass-free density: `(1 − r²/(2w)) e^{−r²/(2w)}` has
/// `∫ f r dr = 0` exactly in the continuum for every width `w > 0`.
pub fn mass_free_bump(grid: &std::sync::Arc<crate::radial_core::RadialGrid>, w: f64) -> Field {
    Field::from_fn(
        grid.clone(),
        crate::radial_core::FieldKind::Density,
        |r| (1.0 - r * r / (2.0 * w)) * (-r * r / (2.0 * w)).exp(),
    )
    .expect("bump construction")
}

/// Angular factor of the planar kernel convolution,
/// `2 ∫₀^π κ_α(d(θ)) dθ` with `d² = r² + s² − 2 r s cos θ`, by
/// Gauss–Legendre on panels halved dyadically toward `θ = 0`, where the
/// distance bottoms out at `|r−s|`. Per panel the distance varies by at
/// most a bounded factor, so the logarithmic near-singularity stays smooth
/// at fixed order; being non-adaptive, the rule also cannot chase the
/// `~1e−12` evaluation noise of the kernel values themselves.
pub fn angular_kernel_integral(alpha: f64, r: f64, s: f64) -> f64 {
    let theta_min = ((r - s).abs().max(1e-8) / (r * s).sqrt()).min(1.0);
    let mut edges = vec![0.0, PI];
    let mut theta = PI;
    while theta * 0.5 > theta_min {
        theta *= 0.5;
        edges.push(theta);
    }
    edges.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let (xs, ws) = gauss_legendre(20);
    let mut total = 0.0;
    for pair in edges.windows(2) {
        let half = 0.5 * (pair[1] - pair[0]);
        let mid = 0.5 * (pair[1] + pair[0]);
        for (x, w) in xs.iter().zip(&ws) {
            let theta = mid + half * x;
            let d2 = r * r + s * s - 2.0 * r * s * theta.cos();
            total += w
                * half
                * crate::kernels::kernel_eval(alpha, d2.max(1e-300).sqrt()).unwrap();
        }
    }
    2.0 * total
}

/// Brute-force pair interaction `∬ f(|x|) f(|y|) κ_α(x−y) dx dy` by a polar
/// tensor quadrature: geometrically graded radial Gauss–Legendre panels in
/// each variable (≈200 nodes per axis on `[0, r_max]`) and the dyadically
/// graded angular rule for the inner kernel average. Independent of the
/// potential-based reduction used by the library.
pub fn pair_interaction_brute(f: impl Fn(f64) -> f64, alpha: f64, r_max: f64) -> f64 {
    let mut edges = vec![0.0];
    let mut e = (0.025 * r_max).min(0.05);
    while e < r_max {
        edges.push(e);
        e *= 1.35;
    }
    edges.push(r_max);

    let (xs, ws) = gauss_legendre(7);
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    for pair in edges.windows(2) {
        let half = 0.5 * (pair[1] - pair[0]);
        let mid = 0.5 * (pair[1] + pair[0]);
        for (x, w) in xs.iter().zip(&ws) {
            nodes.push(mid + half * x);
            weights.push(w * half);
        }
    }

    let mut total = 0.0;
    for (i, (&r, &wr)) in nodes.iter().zip(&weights).enumerate() {
        let fr = wr * r * f(r);
        if fr == 0.0 {
            continue;
        }
        for (j, (&s, &wsj)) in nodes.iter().zip(&weights).enumerate() {
            // Symmetry: compute the upper triangle once.
            if j < i {
                continue;
            }
            let term = fr * wsj * s * f(s) * angular_kernel_integral(alpha, r, s);
            total += if j == i { term } else { 2.0 * term };
        }
    }
    TAU * total
}
