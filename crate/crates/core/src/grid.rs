//! Aspiration lattice arithmetic.
//!
//! Aspirations produced by the grid-disciplined negotiators live on the
//! lattice `{0, δ, 2δ, ...}`. Every lattice value is materialised as
//! `m as f64 * δ` so that two routes to the same grid point produce the same
//! bits, and every comparison against a lattice value goes through
//! [`GRID_TOL`].

/// Absolute tolerance used for lattice membership and threshold comparisons.
pub const GRID_TOL: f64 = 1e-9;

/// Index of the largest lattice point `mδ ≤ x`, after snapping `x` upward by
/// [`GRID_TOL`]. Negative inputs map to 0.
pub fn floor_index(x: f64, delta: f64) -> u64 {
    debug_assert!(delta > 0.0);
    let m = ((x + GRID_TOL) / delta).floor();
    if m.is_nan() || m <= 0.0 {
        0
    } else if m >= u64::MAX as f64 {
        u64::MAX
    } else {
        m as u64
    }
}

/// `⌊x⌋_δ`: the largest multiple of `delta` not exceeding `x`.
///
/// Values within [`GRID_TOL`] below a lattice point snap onto it.
///
/// ```
/// use blma::grid::floor_delta;
/// assert!((floor_delta(0.17, 0.05) - 0.15).abs() < 1e-12);
/// assert_eq!(floor_delta(0.0499999999, 0.05), 0.05);
/// assert_eq!(floor_delta(0.049, 0.05), 0.0);
/// ```
pub fn floor_delta(x: f64, delta: f64) -> f64 {
    floor_index(x, delta) as f64 * delta
}

/// One decay step `[c − δ]^+`, snapped back onto the lattice when `c` was
/// (numerically) a lattice point.
pub fn decay(c: f64, delta: f64) -> f64 {
    let lowered = c - delta;
    if lowered <= GRID_TOL {
        return 0.0;
    }
    let m = (lowered / delta).round();
    if (m * delta - lowered).abs() <= GRID_TOL {
        m * delta
    } else {
        lowered
    }
}

/// `x ≥ y` up to [`GRID_TOL`].
#[inline]
pub fn at_least(x: f64, y: f64) -> bool {
    x >= y - GRID_TOL
}

/// True when `x` is within tolerance of a lattice point.
pub fn on_grid(x: f64, delta: f64) -> bool {
    let m = (x / delta).round();
    m >= 0.0 && (m * delta - x).abs() <= GRID_TOL
}

/// Returns `q` when `epsilon = q·delta` for an integer `q > 1`.
pub fn grid_ratio(epsilon: f64, delta: f64) -> Option<u64> {
    if !(delta > 0.0) || !(epsilon > 0.0) {
        return None;
    }
    let q = (epsilon / delta).round();
    if q > 1.0 && (q * delta - epsilon).abs() <= 1e-9 * epsilon.max(1.0) {
        Some(q as u64)
    } else {
        None
    }
}
