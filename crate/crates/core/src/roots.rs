//! Bisection on monotone predicates.
//!
//! Both searches return a point on the side of the switch where the
//! predicate holds, so a threshold found this way is always met.

pub const MAX_ITER: usize = 80;
pub const TOL: f64 = 1e-9;

/// Smallest `x ∈ [lo, hi]` with `pred(x)`, for a predicate that switches
/// from false to true at most once. `None` when `pred(hi)` is false.
pub fn first_true(lo: f64, hi: f64, mut pred: impl FnMut(f64) -> bool) -> Option<f64> {
    if pred(lo) {
        return Some(lo);
    }
    if !pred(hi) {
        return None;
    }
    let (mut no, mut yes) = (lo, hi);
    for _ in 0..MAX_ITER {
        if yes - no <= TOL {
            break;
        }
        let mid = 0.5 * (no + yes);
        if pred(mid) {
            yes = mid;
        } else {
            no = mid;
        }
    }
    Some(yes)
}

/// Largest `x ∈ [lo, hi]` with `pred(x)`, for a predicate that switches
/// from true to false at most once. `None` when `pred(lo)` is false.
pub fn last_true(lo: f64, hi: f64, mut pred: impl FnMut(f64) -> bool) -> Option<f64> {
    if pred(hi) {
        return Some(hi);
    }
    if !pred(lo) {
        return None;
    }
    let (mut yes, mut no) = (lo, hi);
    for _ in 0..MAX_ITER {
        if no - yes <= TOL {
            break;
        }
        let mid = 0.5 * (yes + no);
        if pred(mid) {
            yes = mid;
        } else {
            no = mid;
        }
    }
    Some(yes)
}
