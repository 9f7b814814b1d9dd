//! Scalar functionals of the chemotaxis system: free energy, dissipation,
//! entropies, Fisher information, the weighted logarithmic HLS residual,
//! renormalized entropies, and the Orlicz pair — all as computable
//! diagnostics with inequality checkers.
//!
//! Conventions. All integrals are planar (`∫ φ dx = 2π ∫ φ(r) r dr`). The
//! free energy of a pair `(f, u)` at coupling `α ≥ 0` is
//!
//! ```text
//! F(f, u) = ∫ f log f − ∫ f u + ½ ∫ |∇u|² + (α/2) ∫ u²,
//! ```
//!
//! and its dissipation along the parabolic–parabolic flow with relaxation
//! `ε > 0` is
//!
//! ```text
//! D_F(f, u) = ∫ f |∇(log f) − ∇u|² + (1/ε) ∫ |Δu + f − αu|².
//! ```
//!
//! The reference weight is `H(x) = (1/π) ⟨x⟩⁻⁴` (a probability density), the
//! modified free energy is `F_H = F − ∫ f log H`, and the relative entropy
//! `H_H(f) = ∫ f log(f/H)`.
//!
//! Zero-density convention: integrands `f log f` and `|∇f|²/f` are evaluated
//! as their vanishing limits wherever `f` falls below `1e−300`.

use std::f64::consts::{E, PI, TAU};

use crate::error::{Error, Result};
use crate::kernels::{bessel_solve, poisson_solve_radial};
use crate::numerics::golden_max;
use crate::radial_core::{gradient_values, laplacian_values, Field, RadialGrid};

/// Density floor below which the `f log f` and `|∇f|²/f` integrands use
/// their zero limits.
const DENSITY_FLOOR: f64 = 1e-300;
/// Most negative node value accepted for a density before the input is
/// rejected as corrupt.
const NEGATIVITY_TOL: f64 = -1e-12;

/// Every scalar functional of a pair `(f, u)` evaluated in one pass.
#[derive(Debug, Clone, serde::Serialize)]
pub struct EnergyReport {
    /// Planar mass `M = ∫ f`.
    pub mass: f64,
    /// Free energy `F(f, u)`.
    pub free_energy: f64,
    /// Dissipation `D_F(f, u)`; the relaxation term is omitted when `ε = 0`
    /// (the quasi-static coupling makes it vanish identically).
    pub dissipation: f64,
    /// Boltzmann entropy `H = ∫ f log f`.
    pub entropy: f64,
    /// Positive part `H⁺ = ∫ f (log f)₊ ≥ 0`.
    pub positive_entropy: f64,
    /// Fisher information `I = ∫ |∇f|²/f`.
    pub fisher: f64,
    /// Modified free energy `F_H = F − ∫ f log H`.
    pub modified_free_energy: f64,
    /// Logarithmic moment `∫ f log⟨x⟩²`.
    pub log_moment: f64,
    /// Chemical part `F_α(f, u) = −∫ f u + ½∫|∇u|² + (α/2)∫u²`.
    pub chem_energy: f64,
    /// Squared positive log entropy `∫ f (log f)₊²`.
    pub squared_log_entropy: f64,
}

/// Scale-invariant ratios for the Fisher-information interpolation
/// inequalities; the asserted content is finiteness and stability, the
/// values themselves are empirical constants.
#[derive(Debug, Clone, serde::Serialize)]
pub struct InequalityReport {
    /// Planar mass.
    pub mass: f64,
    /// Fisher information.
    pub fisher: f64,
    /// Exponents of the `L^p` rows below.
    pub p_values: [f64; 3],
    /// `‖f‖_p / (M^{1/p} I^{1−1/p})` for each `p`.
    pub lp_fisher_ratio: [f64; 3],
    /// `∫ f^{p+1} / (M I^p)` for each `p` (Gagliardo–Nirenberg shape).
    pub gn_ratio: [f64; 3],
    /// Exponents of the gradient rows below.
    pub q_values: [f64; 2],
    /// `‖∇f‖_q / (M^{1/q − 1/2} I^{3/2 − 1/q})` for each `q`.
    pub grad_lq_ratio: [f64; 2],
    /// `H_H(f) − ¼ ∫ f log⟨x⟩² − H⁺(f)`; bounded below by `−C₂(M)`.
    pub hplus_gap: f64,
}

/// Shape of the renormalizing function `β_K`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RenormShape {
    /// `β_K(ξ) = ξ^p/p` below `K`, continued with slope-matched
    /// `ξ log ξ − ξ` growth above (requires `p ≥ 2`).
    Lp {
        /// Lebesgue exponent `p ≥ 2`.
        p: f64,
    },
    /// `β_K(ξ) = ξ²/e` below `e`, `ξ (log ξ)²` up to `K`, continued with
    /// `ξ log ξ` growth above.
    LogLog,
}

/// Planar quadrature `2π Σ_i W_i g(i, r_i)` of a node-indexed integrand.
fn planar_sum(grid: &RadialGrid, mut g: impl FnMut(usize, f64) -> f64) -> f64 {
    let mut s = 0.0;
    for (i, (&w, &r)) in grid.weights().iter().zip(grid.nodes()).enumerate() {
        s += w * g(i, r);
    }
    TAU * s
}

/// `log H(r)` for the reference weight `H = (1/π)⟨x⟩⁻⁴`.
fn log_weight(r: f64) -> f64 {
    -PI.ln() - 2.0 * (1.0 + r * r).ln()
}

fn check_density(f: &Field, what: &str) -> Result<()> {
    let min = f.min();
    if min < NEGATIVITY_TOL {
        return Err(Error::data(format!(
            "{what}: density has a negative node value {min:.3e} (beyond -1e-12)"
        )));
    }
    Ok(())
}

fn check_same_grid(f: &Field, g: &Field, what: &str) -> Result<()> {
    if !f.grid().compatible(g.grid()) {
        return Err(Error::contract(format!("{what}: fields on different grids")));
    }
    Ok(())
}

/// Evaluate every scalar functional of the pair `(f, u)`.
///
/// The second dissipation term is `(1/ε)∫|Δu + f − αu|²` by default; when
/// the time derivative of `u` is supplied it is evaluated as `ε∫|∂_t u|²`
/// through the relaxation identity `ε ∂_t u = Δu + f − αu`. At `ε = 0` the
/// term is identically zero and `dudt` is ignored.
pub fn energy_report(
    f: &Field,
    u: &Field,
    alpha: f64,
    epsilon: f64,
    dudt: Option<&Field>,
) -> Result<EnergyReport> {
    if !alpha.is_finite() || alpha < 0.0 {
        return Err(Error::domain(format!(
            "energy report requires a finite coupling α ≥ 0, got {alpha}"
        )));
    }
    if !epsilon.is_finite() || epsilon < 0.0 {
        return Err(Error::domain(format!(
            "energy report requires a finite relaxation ε ≥ 0, got {epsilon}"
        )));
    }
    check_same_grid(f, u, "energy report")?;
    if let Some(ut) = dudt {
        check_same_grid(f, ut, "energy report (du/dt)")?;
    }
    check_density(f, "energy report")?;

    let grid = f.grid();
    let fv = f.values();
    let uv = u.values();
    let du = gradient_values(grid, uv);
    let lap_u = laplacian_values(grid, uv);
    let log_f: Vec<f64> = fv.iter().map(|&v| v.max(DENSITY_FLOOR).ln()).collect();
    let dlog_f = gradient_values(grid, &log_f);
    let df = gradient_values(grid, fv);

    let mass = planar_sum(grid, |i, _| fv[i]);
    if mass <= 0.0 {
        return Err(Error::domain(format!(
            "energy report requires positive mass, got {mass:.3e}"
        )));
    }
    let entropy = planar_sum(grid, |i, _| {
        if fv[i] <= DENSITY_FLOOR {
            0.0
        } else {
            fv[i] * log_f[i]
        }
    });
    let positive_entropy = planar_sum(grid, |i, _| fv[i] * log_f[i].max(0.0));
    let squared_log_entropy = planar_sum(grid, |i, _| {
        let lp = log_f[i].max(0.0);
        fv[i] * lp * lp
    });
    let log_moment = planar_sum(grid, |i, r| fv[i] * (1.0 + r * r).ln());
    let f_log_weight = planar_sum(grid, |i, r| fv[i] * log_weight(r));
    let fisher = planar_sum(grid, |i, _| {
        if fv[i] <= DENSITY_FLOOR {
            0.0
        } else {
            df[i] * df[i] / fv[i]
        }
    });
    let chem_energy = planar_sum(grid, |i, _| {
        -fv[i] * uv[i] + 0.5 * du[i] * du[i] + 0.5 * alpha * uv[i] * uv[i]
    });
    let free_energy = entropy + chem_energy;
    let modified_free_energy = free_energy - f_log_weight;

    let drift_term = planar_sum(grid, |i, _| {
        if fv[i] <= DENSITY_FLOOR {
            0.0
        } else {
            let slip = dlog_f[i] - du[i];
            fv[i] * slip * slip
        }
    });
    let relax_term = if epsilon == 0.0 {
        0.0
    } else if let Some(ut) = dudt {
        let utv = ut.values();
        epsilon * planar_sum(grid, |i, _| utv[i] * utv[i])
    } else {
        planar_sum(grid, |i, _| {
            let res = lap_u[i] + fv[i] - alpha * uv[i];
            res * res
        }) / epsilon
    };

    Ok(EnergyReport {
        mass,
        free_energy,
        dissipation: drift_term + relax_term,
        entropy,
        positive_entropy,
        fisher,
        modified_free_energy,
        log_moment,
        chem_energy,
        squared_log_entropy,
    })
}

/// Residual of the weighted logarithmic Hardy–Littlewood–Sobolev
/// inequality,
///
/// ```text
/// ∫ f log f − (4π/M) ∬ f(x) f(y) κ_α(x−y) dx dy − ∫ f log H ≥ −C₁(M),
/// ```
///
/// returned as the left-hand side. The double integral is evaluated through
/// the potential: `∬ f f κ_α = ∫ f ū_α` with `ū_α = κ_α * f` from the
/// radial Poisson (`α = 0`) or screened (`α > 0`) solve.
pub fn log_hls_residual(f: &Field, alpha: f64) -> Result<f64> {
    if !alpha.is_finite() || alpha < 0.0 {
        return Err(Error::domain(format!(
            "log-HLS residual requires a finite α ≥ 0, got {alpha}"
        )));
    }
    check_density(f, "log-HLS residual")?;
    let grid = f.grid();
    let fv = f.values();
    let mass = planar_sum(grid, |i, _| fv[i]);
    if mass <= 0.0 {
        return Err(Error::domain(format!(
            "log-HLS residual requires positive mass, got {mass:.3e}"
        )));
    }

    let u_bar = if alpha == 0.0 {
        poisson_solve_radial(f).0
    } else {
        bessel_solve(alpha, f)?
    };
    let pair = planar_sum(grid, |i, _| fv[i] * u_bar.values()[i]);
    let entropy = planar_sum(grid, |i, _| {
        if fv[i] <= DENSITY_FLOOR {
            0.0
        } else {
            fv[i] * fv[i].max(DENSITY_FLOOR).ln()
        }
    });
    let f_log_weight = planar_sum(grid, |i, r| fv[i] * log_weight(r));
    Ok(entropy - (4.0 * PI / mass) * pair - f_log_weight)
}

/// Evaluate the scale-invariant interpolation ratios for `f`.
///
/// Each ratio divides the left-hand side of one Fisher-information
/// inequality by its scale-invariant right-hand side with the (unspecified)
/// constant dropped; across a test family the maximum observed ratio is the
/// empirical constant.
pub fn inequality_suite(f: &Field) -> Result<InequalityReport> {
    check_density(f, "inequality suite")?;
    let grid = f.grid();
    let fv = f.values();
    let df = gradient_values(grid, fv);

    let mass = planar_sum(grid, |i, _| fv[i]);
    if mass <= 0.0 {
        return Err(Error::domain(format!(
            "inequality suite requires positive mass, got {mass:.3e}"
        )));
    }
    let fisher = planar_sum(grid, |i, _| {
        if fv[i] <= DENSITY_FLOOR {
            0.0
        } else {
            df[i] * df[i] / fv[i]
        }
    });
    if !fisher.is_finite() {
        return Err(Error::numerical(
            "inequality suite: Fisher information is not finite",
        ));
    }

    let p_values = [2.0, 3.0, 4.0];
    let q_values = [4.0 / 3.0, 1.5];
    let mut lp_fisher_ratio = [0.0; 3];
    let mut gn_ratio = [0.0; 3];
    for (k, &p) in p_values.iter().enumerate() {
        let lp = planar_sum(grid, |i, _| fv[i].max(0.0).powf(p)).powf(1.0 / p);
        lp_fisher_ratio[k] = lp / (mass.powf(1.0 / p) * fisher.powf(1.0 - 1.0 / p));
        let fp1 = planar_sum(grid, |i, _| fv[i].max(0.0).powf(p + 1.0));
        gn_ratio[k] = fp1 / (mass * fisher.powf(p));
    }
    let mut grad_lq_ratio = [0.0; 2];
    for (k, &q) in q_values.iter().enumerate() {
        let lq = planar_sum(grid, |i, _| df[i].abs().powf(q)).powf(1.0 / q);
        grad_lq_ratio[k] =
            lq / (mass.powf(1.0 / q - 0.5) * fisher.powf(1.5 - 1.0 / q));
    }

    let entropy = planar_sum(grid, |i, _| {
        if fv[i] <= DENSITY_FLOOR {
            0.0
        } else {
            fv[i] * fv[i].ln()
        }
    });
    let log_moment = planar_sum(grid, |i, r| fv[i] * (1.0 + r * r).ln());
    let positive_entropy = planar_sum(grid, |i, _| {
        if fv[i] <= 1.0 {
            0.0
        } else {
            fv[i] * fv[i].ln()
        }
    });
    // H_H(f) = ∫ f log(f/H) = entropy + M log π + 2 ∫ f log⟨x⟩².
    let relative_entropy = entropy + mass * PI.ln() + 2.0 * log_moment;
    let hplus_gap = relative_entropy - 0.25 * log_moment - positive_entropy;

    Ok(InequalityReport {
        mass,
        fisher,
        p_values,
        lp_fisher_ratio,
        gn_ratio,
        q_values,
        grad_lq_ratio,
        hplus_gap,
    })
}

/// The renormalizing function `β_K` itself (exact piecewise formulas with
/// the continuity-matching constants).
pub fn beta_k(xi: f64, k_cut: f64, shape: RenormShape) -> f64 {
    match shape {
        RenormShape::Lp { p } => {
            if xi <= k_cut {
                xi.powf(p) / p
            } else {
                // Slope-matched ξ log ξ − ξ continuation: continuous and C¹
                // at K with the constant −K^p/p′ + K^p/log K.
                let a = k_cut.powf(p - 1.0) / k_cut.ln();
                let p_conj = p / (p - 1.0);
                a * (xi * xi.ln() - xi) - k_cut.powf(p) / p_conj
                    + k_cut.powf(p) / k_cut.ln()
            }
        }
        RenormShape::LogLog => {
            if xi <= E {
                xi * xi / E
            } else if xi <= k_cut {
                let l = xi.ln();
                xi * l * l
            } else {
                (2.0 + k_cut.ln()) * xi * xi.ln() - 2.0 * k_cut * k_cut.ln()
            }
        }
    }
}

/// `∫ β_K(f) dx` for the selected shape.
///
/// The Lp shape grows like `ξ^p/p` up to `K` and like `ξ log ξ` beyond, so
/// the renormalized entropy is controlled by mass and entropy alone; the
/// log-log shape does the same for `ξ (log ξ)²`.
pub fn renormalized_entropy(f: &Field, k_cut: f64, shape: RenormShape) -> Result<f64> {
    if !(k_cut >= E * E) {
        return Err(Error::domain(format!(
            "renormalized entropy requires K ≥ e² ≈ 7.389, got {k_cut}"
        )));
    }
    if let RenormShape::Lp { p } = shape {
        if !p.is_finite() || p < 2.0 {
            return Err(Error::domain(format!(
                "the Lp renormalization shape requires p ≥ 2, got {p}"
            )));
        }
    }
    check_density(f, "renormalized entropy")?;
    let grid = f.grid();
    let fv = f.values();
    Ok(planar_sum(grid, |i, _| {
        beta_k(fv[i].max(0.0), k_cut, shape)
    }))
}

/// `log̃ s`: equal to 1 below `e` and to `log s` above.
fn log_tilde(s: f64) -> f64 {
    if s <= E {
        1.0
    } else {
        s.ln()
    }
}

/// The Orlicz function `Φ(s) = s² (log̃ s)²` (convex, `= s²` below `e`).
pub fn orlicz_phi(s: f64) -> f64 {
    let l = log_tilde(s);
    s * s * l * l
}

/// The conjugate `Φ*(t) = sup_s { t·s − Φ(s) }`, evaluated by golden-section
/// maximization (the objective is concave); the bracket `[0, max(3, t)]`
/// always contains the maximizer because `Φ′(s) > s` for `s ≥ 3`.
///
/// On the quadratic branch (`t ≤ 2e`) this equals `t²/4` exactly; for large
/// `t` it is bounded by `2 t² / (log t)²`.
pub fn orlicz_phi_star(t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    let hi = t.max(3.0);
    let (_, value) = golden_max(|s| t * s - orlicz_phi(s), 0.0, hi, 1e-11 * hi);
    value.max(0.0)
}
