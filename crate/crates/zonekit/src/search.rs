//! One-dimensional searches used throughout the crate.
//!
//! Distances from a point to a segment, cut lengths of the unit ball and
//! bisector crossings all reduce to either minimizing a convex function of
//! one variable or locating a sign change. Neither needs derivatives, which
//! matters because most of the norms here are not differentiable everywhere.

/// `(3 - sqrt(5)) / 2`, the golden-section interior fraction.
const INV_PHI_SQ: f64 = 0.381_966_011_250_105_1;

/// Iteration cap for golden-section search.
pub const GOLDEN_MAX_ITER: usize = 200;

/// Minimizes `f` over `[lo, hi]` by golden-section search.
///
/// `f` is assumed unimodal on the bracket (convex functions qualify). The
/// search stops once the bracket is narrower than `tol` or after
/// [`GOLDEN_MAX_ITER`] iterations. Returns `(argmin, min)`; the endpoints are
/// compared against the interior estimate, so the result is never worse than
/// `min(f(lo), f(hi))`.
pub fn golden_section_min<F>(f: F, lo: f64, hi: f64, tol: f64) -> (f64, f64)
where
    F: Fn(f64) -> f64,
{
    let (mut a, mut b) = (lo, hi);
    let mut c = a + INV_PHI_SQ * (b - a);
    let mut d = b - INV_PHI_SQ * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut iter = 0;
    while (b - a) > tol && iter < GOLDEN_MAX_ITER {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = a + INV_PHI_SQ * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = b - INV_PHI_SQ * (b - a);
            fd = f(d);
        }
        iter += 1;
    }
    let mut best = if fc <= fd { (c, fc) } else { (d, fd) };
    for t in [lo, hi] {
        let ft = f(t);
        if ft < best.1 {
            best = (t, ft);
        }
    }
    best
}

/// Finds a root of `f` in `[lo, hi]` by bisection, assuming `f(lo)` and
/// `f(hi)` have opposite signs (or one of them is zero).
///
/// Stops when the bracket is narrower than `tol`. Returns `None` when the
/// endpoints do not bracket a sign change.
pub fn bisect_root<F>(f: F, lo: f64, hi: f64, tol: f64) -> Option<f64>
where
    F: Fn(f64) -> f64,
{
    let (mut a, mut b) = (lo, hi);
    let mut fa = f(a);
    let fb = f(b);
    if fa == 0.0 {
        return Some(a);
    }
    if fb == 0.0 {
        return Some(b);
    }
    if fa.signum() == fb.signum() {
        return None;
    }
    // 200 halvings exhaust f64 resolution on any finite bracket.
    for _ in 0..200 {
        if (b - a) <= tol {
            break;
        }
        let m = 0.5 * (a + b);
        let fm = f(m);
        if fm == 0.0 {
            return Some(m);
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    Some(0.5 * (a + b))
}
