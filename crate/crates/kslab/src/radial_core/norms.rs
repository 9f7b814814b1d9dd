//! Weighted norms for single fields and density/potential pairs.
//!
//! All norms are planar: the angular factor `2π` is included. The
//! polynomial weight is `⟨r⟩^{2k} = (1+r²)^k`. Derivatives are the
//! node-centred operators of [`crate::radial_core::diff`]; the radial
//! Hessian uses the identity `|∇²u|² = u''² + (u'/r)²` with
//! `u'' = Δu − u'/r`.

use super::diff::{gradient_values, laplacian_values};
use super::field::Field;
use crate::error::{Error, Result};
use std::f64::consts::TAU;

/// Which (semi)norm to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormTag {
    /// Plain `L²` of a single field.
    L2,
    /// Weighted `L²_k` of a single field.
    L2k,
    /// Weighted `H¹_k` of a single field.
    H1k,
    /// Plain `H²` of a single field.
    H2,
    /// Pair norm `(‖f‖²_{L²_k} + ‖u‖²_{L²})^{1/2}`.
    X,
    /// Equivalent pair norm `(‖f‖²_{L²_k} + η‖u − κ_f‖²_{L²})^{1/2}`;
    /// requires the Newtonian potential κ_f.
    Xstar,
    /// Pair norm `(‖(f,u)‖²_X + ‖∇f‖²_{L²_k} + ‖∇u‖²_{L²})^{1/2}`.
    Y,
    /// Pair norm `(‖(f,u)‖²_Y + ‖∇²u‖²_{L²})^{1/2}`.
    Z,
}

impl NormTag {
    /// Whether the tag measures a pair rather than a single field.
    pub fn is_pair(self) -> bool {
        matches!(self, NormTag::X | NormTag::Xstar | NormTag::Y | NormTag::Z)
    }
}

impl std::fmt::Display for NormTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            NormTag::L2 => "L2",
            NormTag::L2k => "L2k",
            NormTag::H1k => "H1k",
            NormTag::H2 => "H2",
            NormTag::X => "X",
            NormTag::Xstar => "Xstar",
            NormTag::Y => "Y",
            NormTag::Z => "Z",
        };
        write!(f, "{s}")
    }
}

/// Norm selection together with its weight parameters.
///
/// Invariants: `k > 7`, `3 < ell < k`, and `eta, eta1, eta2 > 0`. The
/// auxiliary exponent `ell` does not enter the norm values directly; it is
/// carried because potential-coupling estimates are stated in `L²_ℓ` and
/// downstream certificates validate against it.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct NormSpace {
    tag: NormTag,
    k: f64,
    ell: f64,
    eta: f64,
    eta1: f64,
    eta2: f64,
}

impl NormSpace {
    /// Default parameters: `k = 8`, `ell = 4`, `η = η₁ = η₂ = 40⁻³`.
    pub fn new(tag: NormTag) -> Self {
        let eta = 40.0_f64.powi(-3);
        NormSpace {
            tag,
            k: 8.0,
            ell: 4.0,
            eta,
            eta1: eta,
            eta2: eta,
        }
    }

    /// Fully parameterised construction with invariant checks.
    pub fn with_params(
        tag: NormTag,
        k: f64,
        ell: f64,
        eta: f64,
        eta1: f64,
        eta2: f64,
    ) -> Result<Self> {
        if !(k.is_finite() && k > 7.0) {
            return Err(Error::config(format!("norm weight k must exceed 7, got {k}")));
        }
        if !(ell.is_finite() && ell > 3.0 && ell < k) {
            return Err(Error::config(format!(
                "auxiliary exponent ell must lie in (3, k) = (3, {k}), got {ell}"
            )));
        }
        for (name, v) in [("eta", eta), ("eta1", eta1), ("eta2", eta2)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::config(format!(
                    "equivalence weight {name} must be positive, got {v}"
                )));
            }
        }
        Ok(NormSpace {
            tag,
            k,
            ell,
            eta,
            eta1,
            eta2,
        })
    }

    /// Same parameters, different tag.
    pub fn retag(mut self, tag: NormTag) -> Self {
        self.tag = tag;
        self
    }

    pub fn tag(&self) -> NormTag {
        self.tag
    }
    pub fn k(&self) -> f64 {
        self.k
    }
    pub fn ell(&self) -> f64 {
        self.ell
    }
    pub fn eta(&self) -> f64 {
        self.eta
    }
    pub fn eta1(&self) -> f64 {
        self.eta1
    }
    pub fn eta2(&self) -> f64 {
        self.eta2
    }
}

/// Input of [`norm`]: a single field or a density/potential pair.
#[derive(Debug, Clone, Copy)]
pub enum NormInput<'a> {
    Scalar(&'a Field),
    Pair { f: &'a Field, u: &'a Field },
}

impl<'a> From<&'a Field> for NormInput<'a> {
    fn from(f: &'a Field) -> Self {
        NormInput::Scalar(f)
    }
}

/// `2π ∫ v² r dr` over the field's grid.
pub(crate) fn l2_sq(f: &Field) -> f64 {
    let grid = f.grid();
    let s: f64 = grid
        .weights()
        .iter()
        .zip(f.values())
        .map(|(w, v)| w * v * v)
        .sum();
    TAU * s
}

/// `2π ∫ v² (1+r²)^k r dr` over the field's grid.
pub(crate) fn l2k_sq(f: &Field, k: f64) -> f64 {
    let grid = f.grid();
    let mut s = 0.0;
    for ((w, &r), &v) in grid.weights().iter().zip(grid.nodes()).zip(f.values()) {
        s += w * v * v * (1.0 + r * r).powf(k);
    }
    TAU * s
}

fn l2_sq_values(grid: &super::grid::RadialGrid, v: &[f64]) -> f64 {
    TAU * grid
        .weights()
        .iter()
        .zip(v)
        .map(|(w, x)| w * x * x)
        .sum::<f64>()
}

fn l2k_sq_values(grid: &super::grid::RadialGrid, v: &[f64], k: f64) -> f64 {
    let mut s = 0.0;
    for ((w, &r), &x) in grid.weights().iter().zip(grid.nodes()).zip(v) {
        s += w * x * x * (1.0 + r * r).powf(k);
    }
    TAU * s
}

/// `2π ∫ (u''² + (u'/r)²) r dr`, the squared `L²` norm of the planar
/// Hessian of a radial function.
pub(crate) fn hessian_sq(u: &Field) -> f64 {
    let grid = u.grid();
    let du = gradient_values(grid, u.values());
    let lap = laplacian_values(grid, u.values());
    let mut s = 0.0;
    for (i, (w, &r)) in grid.weights().iter().zip(grid.nodes()).enumerate() {
        let slope = du[i] / r;
        let second = lap[i] - slope;
        s += w * (second * second + slope * slope);
    }
    TAU * s
}

fn require_same_grid(a: &Field, b: &Field, what: &str) -> Result<()> {
    if a.grid().compatible(b.grid()) {
        Ok(())
    } else {
        Err(Error::contract(format!(
            "{what} live on incompatible grids ({} vs {})",
            a.grid().descriptor(),
            b.grid().descriptor()
        )))
    }
}

/// Evaluate the (semi)norm selected by `space`.
///
/// Pair tags (`X`, `Xstar`, `Y`, `Z`) require [`NormInput::Pair`]; scalar
/// tags require [`NormInput::Scalar`]. `Xstar` additionally requires the
/// Newtonian potential `κ_f` of the density component; for the other tags a
/// supplied `kappa_f` is accepted and unused.
pub fn norm(input: NormInput<'_>, space: &NormSpace, kappa_f: Option<&Field>) -> Result<f64> {
    let tag = space.tag();
    match (tag.is_pair(), input) {
        (true, NormInput::Pair { f, u }) => {
            require_same_grid(f, u, "pair components")?;
            let grid = f.grid();
            let sq = match tag {
                NormTag::X => l2k_sq(f, space.k()) + l2_sq(u),
                NormTag::Xstar => {
                    let kappa = kappa_f.ok_or_else(|| {
                        Error::contract(
                            "the Xstar norm requires the Newtonian potential of the density",
                        )
                    })?;
                    require_same_grid(f, kappa, "density and its Newtonian potential")?;
                    let mut dev = 0.0;
                    for ((w, &uv), &kv) in
                        grid.weights().iter().zip(u.values()).zip(kappa.values())
                    {
                        let d = uv - kv;
                        dev += w * d * d;
                    }
                    l2k_sq(f, space.k()) + space.eta() * TAU * dev
                }
                NormTag::Y | NormTag::Z => {
                    let df = gradient_values(grid, f.values());
                    let du = gradient_values(grid, u.values());
                    let mut sq = l2k_sq(f, space.k())
                        + l2_sq(u)
                        + l2k_sq_values(grid, &df, space.k())
                        + l2_sq_values(grid, &du);
                    if tag == NormTag::Z {
                        sq += hessian_sq(u);
                    }
                    sq
                }
                _ => unreachable!(),
            };
            Ok(sq.sqrt())
        }
        (false, NormInput::Scalar(f)) => {
            let grid = f.grid();
            let sq = match tag {
                NormTag::L2 => l2_sq(f),
                NormTag::L2k => l2k_sq(f, space.k()),
                NormTag::H1k => {
                    let df = gradient_values(grid, f.values());
                    l2k_sq(f, space.k()) + l2k_sq_values(grid, &df, space.k())
                }
                NormTag::H2 => {
                    let du = gradient_values(grid, f.values());
                    l2_sq(f) + l2_sq_values(grid, &du) + hessian_sq(f)
                }
                _ => unreachable!(),
            };
            Ok(sq.sqrt())
        }
        (true, NormInput::Scalar(_)) => Err(Error::contract(format!(
            "norm tag {tag} measures a pair but a single field was supplied"
        ))),
        (false, NormInput::Pair { .. }) => Err(Error::contract(format!(
            "norm tag {tag} measures a single field but a pair was supplied"
        ))),
    }
}
