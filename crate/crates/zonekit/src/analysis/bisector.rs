//! Bisectors of two points: a scanline tracer for any norm and the closed
//! form for the inflated ℓ1 norm.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Result, ZoneError};
use crate::norms::{NormSpec, Vector2};
use crate::raster::Grid;

/// Points equidistant from `p` and `q`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BisectorSample {
    pub spec: NormSpec,
    pub p: Vector2,
    pub q: Vector2,
    pub points: Vec<Vector2>,
}

impl BisectorSample {
    /// `dist(x, p) - dist(x, q)`.
    pub fn imbalance(&self, x: Vector2) -> f64 {
        self.spec.dist(x, self.p) - self.spec.dist(x, self.q)
    }

    /// CSV with columns `x,y,abs_f`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,y,abs_f\n");
        for &pt in &self.points {
            let _ = writeln!(out, "{},{},{:e}", pt.x, pt.y, self.imbalance(pt).abs());
        }
        out
    }
}

/// Bisects a bracket `[a, b]` with `f(a)`, `f(b)` of opposite signs until
/// the midpoint no longer moves.
fn refine(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let fa = f(a);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a.min(b) || m >= a.max(b) {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if (fm < 0.0) == (fa < 0.0) {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

fn scan_line(f: impl Fn(f64) -> f64, lo: f64, hi: f64, n: usize, out: &mut Vec<f64>) {
    let at = |k: usize| lo + (hi - lo) * k as f64 / (n - 1) as f64;
    let mut prev = (at(0), f(at(0)));
    if prev.1 == 0.0 {
        out.push(prev.0);
    }
    for k in 1..n {
        let t = at(k);
        let v = f(t);
        if v == 0.0 {
            out.push(t);
        } else if prev.1 != 0.0 && (v < 0.0) != (prev.1 < 0.0) {
            out.push(refine(&f, prev.0, t));
        }
        prev = (t, v);
    }
}

/// Traces the bisector of `p` and `q` inside `window` along `per_line`
/// horizontal and `per_line` vertical scanlines. Each line is sampled at
/// twice the grid resolution; sign changes are refined by bisection to
/// machine precision and exact zeros are kept as they are. Points are
/// ordered horizontal lines first, bottom to top, then vertical lines left
/// to right.
pub fn bisector_scan(
    spec: &NormSpec,
    p: Vector2,
    q: Vector2,
    window: &Grid,
    per_line: usize,
) -> Result<BisectorSample> {
    if p == q {
        return Err(ZoneError::Domain("bisector of a point with itself".into()));
    }
    let samples = 2 * window.nx.max(window.ny) + 1;
    let mut points = Vec::new();
    let mut hits = Vec::new();
    for k in 0..per_line {
        let y = window.ymin + (window.ymax - window.ymin) * (k as f64 + 0.5) / per_line as f64;
        hits.clear();
        let f = |x: f64| spec.dist(Vector2::new(x, y), p) - spec.dist(Vector2::new(x, y), q);
        scan_line(f, window.xmin, window.xmax, samples, &mut hits);
        points.extend(hits.iter().map(|&x| Vector2::new(x, y)));
    }
    for k in 0..per_line {
        let x = window.xmin + (window.xmax - window.xmin) * (k as f64 + 0.5) / per_line as f64;
        hits.clear();
        let f = |y: f64| spec.dist(Vector2::new(x, y), p) - spec.dist(Vector2::new(x, y), q);
        scan_line(f, window.ymin, window.ymax, samples, &mut hits);
        points.extend(hits.iter().map(|&y| Vector2::new(x, y)));
    }
    Ok(BisectorSample { spec: *spec, p, q, points })
}

/// The inflated-ℓ1 bisector of `(-1, 0)` and `(0, -1)` in the positive
/// quadrant: the positive root `y` of
/// `sqrt(α²(x+1)² + y²) + 1 - α = sqrt(α²x² + (y+1)²)`,
///
/// `y = (1-α)/(2-α) · (sqrt(1 + 2αx + 2αx²) - 1 + αx/(1-α))`.
///
/// The parameter `δ` of the norm drops out of the equation.
pub fn inflated_bisector_y(alpha: f64, x: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(ZoneError::Domain(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    if !(x >= 0.0 && x.is_finite()) {
        return Err(ZoneError::Domain(format!("x must be finite and nonnegative, got {x}")));
    }
    let root = (1.0 + 2.0 * alpha * x * (1.0 + x)).sqrt();
    Ok((1.0 - alpha) / (2.0 - alpha) * ((root - 1.0) + alpha * x / (1.0 - alpha)))
}

/// Largest value of `y / (√α · x)` on the closed-form bisector over
/// `n` evenly spaced `x` in `(0, x_max]`.
pub fn inflated_bisector_constant(alpha: f64, x_max: f64, n: usize) -> Result<f64> {
    if !(x_max > 0.0) || n == 0 {
        return Err(ZoneError::Domain("sweep needs x_max > 0 and n > 0".into()));
    }
    let s = alpha.sqrt();
    let mut c: f64 = 0.0;
    for k in 1..=n {
        let x = x_max * k as f64 / n as f64;
        c = c.max(inflated_bisector_y(alpha, x)? / (s * x));
    }
    Ok(c)
}
