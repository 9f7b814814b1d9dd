//! Local polynomial interpolation on sorted tables.

/// Cubic (4-point Lagrange) interpolation of a tabulated function at `x`.
/// `xs` must be strictly increasing with at least two entries; the stencil
/// is clamped at the table ends. Queries outside the table extrapolate with
/// the end stencils.
pub fn cubic_interp(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    assert_eq!(xs.len(), ys.len(), "cubic_interp: length mismatch");
    let n = xs.len();
    assert!(n >= 2, "cubic_interp: need at least two points");
    if n < 4 {
        // Fall back to linear interpolation on the containing segment.
        let i = segment_index(xs, x).min(n - 2);
        let t = (x - xs[i]) / (xs[i + 1] - xs[i]);
        return ys[i] * (1.0 - t) + ys[i + 1] * t;
    }
    let i = segment_index(xs, x);
    // Center a 4-point stencil on the containing segment, clamped in range.
    let s = i.saturating_sub(1).min(n - 4);
    let (x0, x1, x2, x3) = (xs[s], xs[s + 1], xs[s + 2], xs[s + 3]);
    let (y0, y1, y2, y3) = (ys[s], ys[s + 1], ys[s + 2], ys[s + 3]);
    let l0 = (x - x1) * (x - x2) * (x - x3) / ((x0 - x1) * (x0 - x2) * (x0 - x3));
    let l1 = (x - x0) * (x - x2) * (x - x3) / ((x1 - x0) * (x1 - x2) * (x1 - x3));
    let l2 = (x - x0) * (x - x1) * (x - x3) / ((x2 - x0) * (x2 - x1) * (x2 - x3));
    let l3 = (x - x0) * (x - x1) * (x - x2) / ((x3 - x0) * (x3 - x1) * (x3 - x2));
    y0 * l0 + y1 * l1 + y2 * l2 + y3 * l3
}

/// Index `i` with `xs[i] <= x < xs[i+1]`, clamped to `[0, n−2]`.
fn segment_index(xs: &[f64], x: f64) -> usize {
    let n = xs.len();
    let pos = xs.partition_point(|&v| v <= x);
    pos.saturating_sub(1).min(n - 2)
}
