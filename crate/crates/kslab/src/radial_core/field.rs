//! Node-sampled radial scalar fields.

use super::grid::RadialGrid;
use crate::error::{Error, Result};
use std::sync::Arc;

/// Physical role of a field; used for light-weight contract checks and for
/// labelling output columns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldKind {
    /// Cell density (nonnegative in well-posed states).
    Density,
    /// Chemoattractant / potential component.
    Potential,
    /// Derived or auxiliary quantity.
    Generic,
}

impl std::fmt::Display for FieldKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FieldKind::Density => write!(f, "density"),
            FieldKind::Potential => write!(f, "potential"),
            FieldKind::Generic => write!(f, "generic"),
        }
    }
}

/// A scalar radial field sampled at the grid nodes.
///
/// Invariant: every stored value is finite. Constructors and public
/// combinators enforce this; violating inputs produce [`Error::Data`].
#[derive(Debug, Clone)]
pub struct Field {
    grid: Arc<RadialGrid>,
    values: Vec<f64>,
    kind: FieldKind,
}

fn check_finite(values: &[f64]) -> Result<()> {
    for (i, v) in values.iter().enumerate() {
        if !v.is_finite() {
            return Err(Error::data(format!(
                "field value at node {i} is not finite ({v})"
            )));
        }
    }
    Ok(())
}

impl Field {
    /// Wrap node samples. Fails if the length does not match the grid or if
    /// any value is non-finite.
    pub fn new(grid: Arc<RadialGrid>, values: Vec<f64>, kind: FieldKind) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::data(format!(
                "field has {} values but grid has {} nodes",
                values.len(),
                grid.len()
            )));
        }
        check_finite(&values)?;
        Ok(Field { grid, values, kind })
    }

    /// Sample a closure at the grid nodes.
    pub fn from_fn(
        grid: Arc<RadialGrid>,
        kind: FieldKind,
        f: impl Fn(f64) -> f64,
    ) -> Result<Self> {
        let values: Vec<f64> = grid.nodes().iter().map(|&r| f(r)).collect();
        Self::new(grid, values, kind)
    }

    /// The zero field.
    pub fn zeros(grid: Arc<RadialGrid>, kind: FieldKind) -> Self {
        let n = grid.len();
        Field {
            grid,
            values: vec![0.0; n],
            kind,
        }
    }

    /// A constant field.
    pub fn constant(grid: Arc<RadialGrid>, kind: FieldKind, c: f64) -> Result<Self> {
        let n = grid.len();
        Self::new(grid, vec![c; n], kind)
    }

    /// Internal constructor for hot paths whose arithmetic is known to stay
    /// finite; debug builds still verify.
    pub(crate) fn from_raw(grid: Arc<RadialGrid>, values: Vec<f64>, kind: FieldKind) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        debug_assert!(check_finite(&values).is_ok());
        Field { grid, values, kind }
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// Consume the field, returning its samples.
    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn kind(&self) -> FieldKind {
        self.kind
    }

    /// Same samples, relabelled.
    pub fn with_kind(mut self, kind: FieldKind) -> Self {
        self.kind = kind;
        self
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Largest absolute sample.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Smallest sample.
    pub fn min(&self) -> f64 {
        self.values.iter().fold(f64::INFINITY, |m, &v| m.min(v))
    }

    /// `max_i |self_i − other_i|`; the fields must share a grid.
    pub fn max_abs_diff(&self, other: &Field) -> f64 {
        self.assert_same_grid(other);
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    /// Apply a function node-wise; the result is re-validated.
    pub fn map(&self, kind: FieldKind, f: impl Fn(f64, f64) -> f64) -> Result<Field> {
        let values: Vec<f64> = self
            .grid
            .nodes()
            .iter()
            .zip(&self.values)
            .map(|(&r, &v)| f(r, v))
            .collect();
        Field::new(self.grid.clone(), values, kind)
    }

    /// Combine two fields node-wise; the result is re-validated.
    pub fn zip(&self, other: &Field, kind: FieldKind, f: impl Fn(f64, f64) -> f64) -> Result<Field> {
        self.assert_same_grid(other);
        let values: Vec<f64> = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Field::new(self.grid.clone(), values, kind)
    }

    /// `self + c·other`.
    pub fn add_scaled(&self, other: &Field, c: f64) -> Result<Field> {
        self.zip(other, self.kind, |a, b| a + c * b)
    }

    /// `c·self`.
    pub fn scale(&self, c: f64) -> Result<Field> {
        let values: Vec<f64> = self.values.iter().map(|v| c * v).collect();
        Field::new(self.grid.clone(), values, self.kind)
    }

    pub(crate) fn assert_same_grid(&self, other: &Field) {
        assert!(
            self.grid.compatible(&other.grid),
            "fields live on incompatible grids ({} vs {})",
            self.grid.descriptor(),
            other.grid.descriptor()
        );
    }
}

/// Moment `∫ f r^j · r dr`, optionally multiplied by `2π` (the full planar
/// integral of a radially symmetric function). Supports `j ≤ 8`.
pub fn integrate_moment(f: &Field, j: usize, with_2pi: bool) -> f64 {
    assert!(j <= 8, "moment order {j} out of supported range 0..=8");
    let grid = f.grid();
    let mut total = 0.0;
    for ((w, &r), &v) in grid.weights().iter().zip(grid.nodes()).zip(f.values()) {
        total += w * r.powi(j as i32) * v;
    }
    if with_2pi {
        total * std::f64::consts::TAU
    } else {
        total
    }
}

/// Total planar mass `∫_{ℝ²} f = 2π ∫ f r dr`.
pub fn mass(f: &Field) -> f64 {
    integrate_moment(f, 0, true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radial_core::grid::{build_grid, Grading};

    #[test]
    fn constructors_validate() {
        let g = build_grid(8.0, 64, Grading::Uniform).unwrap();
        let bad = vec![f64::NAN; 64];
        assert!(Field::new(g.clone(), bad, FieldKind::Generic).is_err());
        let short = vec![0.0; 63];
        assert!(Field::new(g.clone(), short, FieldKind::Generic).is_err());
        assert!(Field::from_fn(g.clone(), FieldKind::Generic, |r| 1.0 / (r - r)).is_err());
        assert!(Field::constant(g, FieldKind::Generic, f64::INFINITY).is_err());
    }

    #[test]
    fn gaussian_mass_and_moments() {
        let g = build_grid(12.0, 512, Grading::Uniform).unwrap();
        // f = (2π)^{-1} e^{−r²/2} has planar mass 1 and E|x|² = 2.
        let f = Field::from_fn(g, FieldKind::Density, |r| {
            (-0.5 * r * r).exp() / std::f64::consts::TAU
        })
        .unwrap();
        assert!((mass(&f) - 1.0).abs() < 1e-7);
        let second = integrate_moment(&f, 2, true);
        assert!((second - 2.0).abs() < 1e-6, "second moment {second}");
        // Without the angular factor: ∫ f r dr = 1/(2π).
        let bare = integrate_moment(&f, 0, false);
        assert!((bare - 1.0 / std::f64::consts::TAU).abs() < 1e-8);
    }

    #[test]
    fn arithmetic_preserves_grid_and_validates() {
        let g = build_grid(8.0, 64, Grading::Uniform).unwrap();
        let a = Field::from_fn(g.clone(), FieldKind::Generic, |r| r).unwrap();
        let b = Field::from_fn(g, FieldKind::Generic, |r| r * r).unwrap();
        let c = a.add_scaled(&b, -2.0).unwrap();
        for ((&r, &v), _) in c.grid().nodes().iter().zip(c.values()).zip(0..) {
            assert!((v - (r - 2.0 * r * r)).abs() < 1e-14);
        }
        // Division by a vanishing field is caught by revalidation.
        let zero = Field::zeros(c.grid().clone(), FieldKind::Generic);
        assert!(a.zip(&zero, FieldKind::Generic, |x, y| x / y).is_err());
    }

    #[test]
    #[should_panic(expected = "moment order")]
    fn moment_order_is_bounded() {
        let g = build_grid(8.0, 64, Grading::Uniform).unwrap();
        let f = Field::zeros(g, FieldKind::Generic);
        let _ = integrate_moment(&f, 9, true);
    }
}
