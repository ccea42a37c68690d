//! Norms on the plane and their directional geometry.
//!
//! Every norm here is *absolute*: its value depends only on `|x|` and `|y|`
//! and is nondecreasing in each. The raster distance code relies on that
//! property (see [`crate::raster::field`]).

use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, ZoneError};
use crate::search::{bisect_root, golden_section_min};

/// A vector (or point) in the plane.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Vector2 {
    pub x: f64,
    pub y: f64,
}

impl Vector2 {
    pub const ZERO: Vector2 = Vector2 { x: 0.0, y: 0.0 };

    #[inline]
    pub const fn new(x: f64, y: f64) -> Self {
        Vector2 { x, y }
    }

    /// Unit vector (Euclidean) at angle `theta`.
    #[inline]
    pub fn from_angle(theta: f64) -> Self {
        Vector2::new(theta.cos(), theta.sin())
    }

    #[inline]
    pub fn dot(self, o: Vector2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    #[inline]
    pub fn cross(self, o: Vector2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    /// Euclidean length.
    #[inline]
    pub fn length(self) -> f64 {
        (self.x * self.x + self.y * self.y).sqrt()
    }

    #[inline]
    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.x == 0.0 && self.y == 0.0
    }

    /// Angle between two nonzero vectors in `[0, pi]`.
    pub fn angle_to(self, o: Vector2) -> f64 {
        self.cross(o).atan2(self.dot(o)).abs()
    }

    pub fn lerp(self, o: Vector2, t: f64) -> Vector2 {
        self + (o - self) * t
    }
}

impl From<[f64; 2]> for Vector2 {
    fn from(a: [f64; 2]) -> Self {
        Vector2::new(a[0], a[1])
    }
}

impl From<Vector2> for [f64; 2] {
    fn from(v: Vector2) -> Self {
        [v.x, v.y]
    }
}

impl Add for Vector2 {
    type Output = Vector2;
    #[inline]
    fn add(self, o: Vector2) -> Vector2 {
        Vector2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Vector2 {
    type Output = Vector2;
    #[inline]
    fn sub(self, o: Vector2) -> Vector2 {
        Vector2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Vector2 {
    type Output = Vector2;
    #[inline]
    fn mul(self, c: f64) -> Vector2 {
        Vector2::new(self.x * c, self.y * c)
    }
}

impl Neg for Vector2 {
    type Output = Vector2;
    #[inline]
    fn neg(self) -> Vector2 {
        Vector2::new(-self.x, -self.y)
    }
}

/// A norm on the plane.
///
/// Serialized as a tagged object, e.g. `{"kind": "lp", "p": 4.0}` or
/// `{"kind": "inflated_l1", "alpha": 0.01, "delta": 1e-4}`. For the inflated
/// norm `delta` may be omitted and then defaults to `alpha * alpha`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", try_from = "NormSpecRaw")]
pub enum NormSpec {
    Euclidean,
    Lp { p: f64 },
    L1,
    Linf,
    /// `delta * sqrt(alpha^2 x^2 + y^2) + (1 - alpha*delta)|x| + (1 - delta)|y|`:
    /// the l1 norm with its edges bulged outward, asymmetrically. Rotund but
    /// keeps the four l1 corners, so not smooth.
    InflatedL1 { alpha: f64, delta: f64 },
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum NormSpecRaw {
    Euclidean,
    Lp { p: f64 },
    L1,
    Linf,
    InflatedL1 { alpha: f64, delta: Option<f64> },
}

impl TryFrom<NormSpecRaw> for NormSpec {
    type Error = ZoneError;

    fn try_from(raw: NormSpecRaw) -> Result<Self> {
        let spec = match raw {
            NormSpecRaw::Euclidean => NormSpec::Euclidean,
            NormSpecRaw::Lp { p } => NormSpec::Lp { p },
            NormSpecRaw::L1 => NormSpec::L1,
            NormSpecRaw::Linf => NormSpec::Linf,
            NormSpecRaw::InflatedL1 { alpha, delta } => NormSpec::InflatedL1 {
                alpha,
                delta: delta.unwrap_or(alpha * alpha),
            },
        };
        spec.validate()?;
        Ok(spec)
    }
}

impl std::fmt::Display for NormSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            NormSpec::Euclidean => write!(f, "euclidean"),
            NormSpec::Lp { p } => write!(f, "l{p}"),
            NormSpec::L1 => write!(f, "l1"),
            NormSpec::Linf => write!(f, "linf"),
            NormSpec::InflatedL1 { alpha, delta } => {
                write!(f, "inflated_l1(alpha={alpha}, delta={delta})")
            }
        }
    }
}

impl NormSpec {
    /// The inflated l1 norm with the default `delta = alpha^2`.
    pub fn inflated(alpha: f64) -> Self {
        NormSpec::InflatedL1 {
            alpha,
            delta: alpha * alpha,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            NormSpec::Lp { p } if !(p.is_finite() && p >= 1.0) => Err(ZoneError::Domain(format!(
                "lp exponent must be finite and >= 1, got {p}"
            ))),
            NormSpec::InflatedL1 { alpha, delta }
                if !(alpha > 0.0 && alpha < 1.0 && delta > 0.0 && delta < 1.0) =>
            {
                Err(ZoneError::Domain(format!(
                    "inflated_l1 needs alpha, delta in (0,1), got alpha={alpha}, delta={delta}"
                )))
            }
            _ => Ok(()),
        }
    }

    /// Differentiable away from the origin.
    pub fn is_smooth(&self) -> bool {
        match *self {
            NormSpec::Euclidean => true,
            NormSpec::Lp { p } => p > 1.0,
            NormSpec::L1 | NormSpec::Linf | NormSpec::InflatedL1 { .. } => false,
        }
    }

    /// Strictly convex unit ball.
    pub fn is_rotund(&self) -> bool {
        match *self {
            NormSpec::Euclidean | NormSpec::InflatedL1 { .. } => true,
            NormSpec::Lp { p } => p > 1.0,
            NormSpec::L1 | NormSpec::Linf => false,
        }
    }

    /// Evaluates the norm of `(x, y)` without input checks. This is the hot
    /// path of every distance computation.
    #[inline]
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let (ax, ay) = (x.abs(), y.abs());
        match *self {
            NormSpec::Euclidean => (x * x + y * y).sqrt(),
            NormSpec::L1 => ax + ay,
            NormSpec::Linf => ax.max(ay),
            NormSpec::Lp { p } => lp_eval(p, ax, ay),
            NormSpec::InflatedL1 { alpha, delta } => {
                let ax2 = alpha * x;
                delta * (ax2 * ax2 + y * y).sqrt() + (1.0 - alpha * delta) * ax + (1.0 - delta) * ay
            }
        }
    }

    #[inline]
    pub fn norm(&self, v: Vector2) -> f64 {
        self.eval(v.x, v.y)
    }

    #[inline]
    pub fn dist(&self, a: Vector2, b: Vector2) -> f64 {
        self.eval(a.x - b.x, a.y - b.y)
    }

    /// Rescales a nonzero vector to unit norm.
    pub fn normalize(&self, v: Vector2) -> Vector2 {
        v * (1.0 / self.norm(v))
    }
}

#[inline]
fn lp_eval(p: f64, ax: f64, ay: f64) -> f64 {
    if p == 1.0 {
        return ax + ay;
    }
    if p == 2.0 {
        return (ax * ax + ay * ay).sqrt();
    }
    if p == 4.0 {
        let (x2, y2) = (ax * ax, ay * ay);
        return (x2 * x2 + y2 * y2).sqrt().sqrt();
    }
    let (m, s) = if ax >= ay { (ax, ay) } else { (ay, ax) };
    if m == 0.0 {
        return 0.0;
    }
    let r = s / m;
    if p == 1.5 {
        let t = 1.0 + r * r.sqrt();
        return m * (t * t).cbrt();
    }
    m * (1.0 + r.powf(p)).powf(1.0 / p)
}

/// Norm of `v` under `spec`, rejecting non-finite input.
pub fn norm_value(spec: &NormSpec, v: Vector2) -> Result<f64> {
    if !v.is_finite() {
        return Err(ZoneError::Domain(format!("non-finite vector ({}, {})", v.x, v.y)));
    }
    Ok(spec.norm(v))
}

fn require_smooth(spec: &NormSpec, what: &str) -> Result<()> {
    if spec.is_smooth() {
        Ok(())
    } else {
        Err(ZoneError::Unsupported(format!("{what} requires a smooth norm, got {spec}")))
    }
}

/// Outward unit normal (Euclidean length 1) of the supporting halfspace of
/// the ball `B(0, ||a||)` at `a`, i.e. the normalized gradient of the norm.
///
/// Computed by central differences with step `1e-6 * ||a||` for every norm
/// kind.
pub fn tangent_direction(spec: &NormSpec, a: Vector2) -> Result<Vector2> {
    require_smooth(spec, "tangent_direction")?;
    if !a.is_finite() {
        return Err(ZoneError::Domain("non-finite vector".into()));
    }
    if a.is_zero() {
        return Err(ZoneError::Domain("tangent_direction of the zero vector".into()));
    }
    Ok(fd_normal(spec, a))
}

fn fd_normal(spec: &NormSpec, a: Vector2) -> Vector2 {
    let h = 1e-6 * spec.norm(a);
    let gx = (spec.eval(a.x + h, a.y) - spec.eval(a.x - h, a.y)) / (2.0 * h);
    let gy = (spec.eval(a.x, a.y + h) - spec.eval(a.x, a.y - h)) / (2.0 * h);
    let g = Vector2::new(gx, gy);
    g * (1.0 / g.length())
}

/// Default relative tolerance for [`directions_equivalent`].
pub const EQUIVALENCE_TOL: f64 = 1e-9;

/// Whether `a` and `b` support the same halfspace, tested through the
/// equality case of the triangle inequality:
/// `||a + b|| >= ||a|| + ||b|| - tol * (||a|| + ||b||)`.
pub fn directions_equivalent(spec: &NormSpec, a: Vector2, b: Vector2, tol: f64) -> Result<bool> {
    if a.is_zero() || b.is_zero() {
        return Err(ZoneError::Domain("directions_equivalent of a zero vector".into()));
    }
    if !(a.is_finite() && b.is_finite()) {
        return Err(ZoneError::Domain("non-finite vector".into()));
    }
    let (na, nb) = (spec.norm(a), spec.norm(b));
    Ok(spec.norm(a + b) >= na + nb - tol * (na + nb))
}

/// `n` unit vectors (in `spec`) from a uniform angular sweep starting at
/// angle 0.
pub fn unit_sweep(spec: &NormSpec, n: usize) -> Vec<Vector2> {
    (0..n)
        .map(|k| spec.normalize(Vector2::from_angle(2.0 * PI * k as f64 / n as f64)))
        .collect()
}

/// Sampled modulus of convexity: the minimum of `1 - ||(x+y)/2||` over pairs
/// of sampled unit vectors with `||x - y|| >= eps_sep`, clamped at zero.
pub fn estimate_convexity_modulus(spec: &NormSpec, eps_sep: f64, n_samples: usize) -> Result<f64> {
    if !(eps_sep > 0.0 && eps_sep <= 2.0) {
        return Err(ZoneError::Domain(format!("eps_sep must lie in (0, 2], got {eps_sep}")));
    }
    if n_samples < 100 {
        return Err(ZoneError::Domain(format!("need at least 100 samples, got {n_samples}")));
    }
    let units = unit_sweep(spec, n_samples);
    let mut best = f64::INFINITY;
    for (k, &x) in units.iter().enumerate() {
        for &y in &units[k..] {
            if spec.norm(x - y) >= eps_sep {
                best = best.min(1.0 - spec.norm((x + y) * 0.5));
            }
        }
    }
    if best.is_infinite() {
        return Err(ZoneError::Domain(format!(
            "no sampled unit pair is {eps_sep} apart; increase n_samples"
        )));
    }
    Ok(best.max(0.0))
}

/// Constants of the "almost straight" property of a smooth norm: for unit
/// `u`, `v` with `||u + v|| > 2 - beta` we have `||u - alpha v|| <= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmoothnessConstants {
    pub alpha: f64,
    pub beta: f64,
    /// Minimum angle between a unit vector `u` and the closed halfspace
    /// `{z : <n_u, z> <= 0}` where `n_u` is the normal at `u`.
    pub sigma: f64,
}

/// Angle between `w` and the halfspace `{z : <normal, z> <= 0}`; zero inside.
fn angle_to_halfspace(normal: Vector2, w: Vector2) -> f64 {
    let s = normal.dot(w) / w.length();
    if s <= 0.0 {
        0.0
    } else {
        s.min(1.0).asin()
    }
}

/// Length of the chord that the unit ball cuts from the line `u - t v`,
/// i.e. the positive root of `||u - t v|| = 1`, or `None` if `-v` does not
/// point into the ball.
fn cut_length(spec: &NormSpec, u: Vector2, v: Vector2) -> Option<f64> {
    let g = |t: f64| spec.norm(u - v * t) - 1.0;
    // ||u - 2v|| >= 2||v|| - ||u|| = 1, so the chord ends inside [0, 2].
    let (tmin, gmin) = golden_section_min(g, 0.0, 2.0, 1e-12);
    if gmin >= 0.0 {
        return None;
    }
    bisect_root(g, tmin, 2.0, 1e-10)
}

/// Angular widening of the cone over which `alpha` is minimized. Covers the
/// gap between swept samples so that unsampled pairs just inside the
/// `beta` cone still satisfy the `alpha` bound.
const ALPHA_CONE_MARGIN_STEPS: f64 = 4.0;

/// Estimates `(alpha, beta, sigma)` for a smooth norm from a sweep of
/// `n_samples` unit directions, pairing every `u` with every `v`.
pub fn estimate_smoothness_constants(spec: &NormSpec, n_samples: usize) -> Result<SmoothnessConstants> {
    require_smooth(spec, "estimate_smoothness_constants")?;
    if n_samples < 360 {
        return Err(ZoneError::Domain(format!("need at least 360 samples, got {n_samples}")));
    }
    let units = unit_sweep(spec, n_samples);
    let normals: Vec<Vector2> = units.iter().map(|&u| fd_normal(spec, u)).collect();
    let sigma = units
        .iter()
        .zip(&normals)
        .map(|(&u, &n)| angle_to_halfspace(n, u))
        .fold(f64::INFINITY, f64::min);
    let half = 0.5 * sigma;
    let margin = ALPHA_CONE_MARGIN_STEPS * 2.0 * PI / n_samples as f64;
    let alpha_cone = (half - margin).max(0.5 * half);

    let mut alpha = f64::INFINITY;
    let mut beta = f64::INFINITY;
    for (&u, &n) in units.iter().zip(&normals) {
        for &v in &units {
            let ang = angle_to_halfspace(n, v);
            if ang >= alpha_cone {
                if let Some(t) = cut_length(spec, u, v) {
                    alpha = alpha.min(t);
                }
            }
            if ang <= half {
                beta = beta.min(2.0 - spec.norm(u + v));
            }
        }
    }
    if !(alpha > 0.0 && alpha.is_finite() && beta > 0.0 && sigma > 0.0) {
        return Err(ZoneError::Internal(format!(
            "non-positive smoothness constants alpha={alpha} beta={beta} sigma={sigma}"
        )));
    }
    Ok(SmoothnessConstants { alpha, beta, sigma })
}

impl SmoothnessConstants {
    /// Counts random unit pairs violating `||u+v|| > 2 - beta  =>
    /// ||u - alpha v|| <= 1 + 1e-9`. Half of the pairs are drawn close
    /// together so the premise is exercised.
    pub fn count_violations(&self, spec: &NormSpec, n_pairs: usize, seed: u64) -> usize {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut violations = 0;
        for k in 0..n_pairs {
            let a = rng.gen_range(0.0..2.0 * PI);
            let b = if k % 2 == 0 {
                rng.gen_range(0.0..2.0 * PI)
            } else {
                a + rng.gen_range(-1.0..1.0)
            };
            let u = spec.normalize(Vector2::from_angle(a));
            let v = spec.normalize(Vector2::from_angle(b));
            if spec.norm(u + v) > 2.0 - self.beta && spec.norm(u - v * self.alpha) > 1.0 + 1e-9 {
                violations += 1;
            }
        }
        violations
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::TAU;

    const NORMS: [NormSpec; 6] = [
        NormSpec::Euclidean,
        NormSpec::Lp { p: 4.0 },
        NormSpec::Lp { p: 1.5 },
        NormSpec::L1,
        NormSpec::Linf,
        NormSpec::InflatedL1 { alpha: 0.5, delta: 0.7 },
    ];

    #[test]
    fn pythagorean() {
        assert_eq!(norm_value(&NormSpec::Euclidean, Vector2::new(3.0, 4.0)).unwrap(), 5.0);
    }

    #[test]
    fn inflated_keeps_l1_corners() {
        let n = NormSpec::InflatedL1 { alpha: 0.5, delta: 0.7 };
        assert!((n.eval(1.0, 0.0) - 1.0).abs() < 1e-15);
        assert!((n.eval(0.0, 1.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn non_finite_is_domain_error() {
        let r = norm_value(&NormSpec::L1, Vector2::new(f64::NAN, 0.0));
        assert!(matches!(r, Err(ZoneError::Domain(_))));
    }

    #[test]
    fn classification_table() {
        let table = [
            (NormSpec::Euclidean, true, true),
            (NormSpec::Lp { p: 4.0 }, true, true),
            (NormSpec::Lp { p: 1.5 }, true, true),
            (NormSpec::L1, false, false),
            (NormSpec::Linf, false, false),
            (NormSpec::inflated(0.01), false, true),
        ];
        for (n, smooth, rotund) in table {
            assert_eq!(n.is_smooth(), smooth, "{n}");
            assert_eq!(n.is_rotund(), rotund, "{n}");
        }
    }

    #[test]
    fn lp_fast_paths_match_generic_formula() {
        for p in [1.5, 2.0, 4.0] {
            for (x, y) in [(0.3f64, -1.7f64), (2.0, 0.0), (-1e-3, 5.0)] {
                let generic = (x.abs().powf(p) + y.abs().powf(p)).powf(1.0 / p);
                let fast = NormSpec::Lp { p }.eval(x, y);
                assert!((generic - fast).abs() <= 1e-14 * generic, "p={p}");
            }
        }
    }

    #[test]
    fn serde_fragments() {
        let n: NormSpec = serde_json::from_str(r#"{"kind": "lp", "p": 4.0}"#).unwrap();
        assert_eq!(n, NormSpec::Lp { p: 4.0 });
        let n: NormSpec =
            serde_json::from_str(r#"{"kind": "inflated_l1", "alpha": 0.01, "delta": 1e-4}"#).unwrap();
        assert_eq!(n, NormSpec::InflatedL1 { alpha: 0.01, delta: 1e-4 });
        let n: NormSpec = serde_json::from_str(r#"{"kind": "inflated_l1", "alpha": 0.1}"#).unwrap();
        assert_eq!(n, NormSpec::inflated(0.1));
        assert!(serde_json::from_str::<NormSpec>(r#"{"kind": "lp", "p": 0.5}"#).is_err());
        let text = serde_json::to_string(&NormSpec::Euclidean).unwrap();
        assert_eq!(text, r#"{"kind":"euclidean"}"#);
    }

    #[test]
    fn tangent_examples() {
        let e = NormSpec::Euclidean;
        let n = tangent_direction(&e, Vector2::new(0.0, 2.0)).unwrap();
        assert!((n - Vector2::new(0.0, 1.0)).length() < 1e-8);
        let n = tangent_direction(&e, Vector2::new(3.0, 4.0)).unwrap();
        assert!((n - Vector2::new(0.6, 0.8)).length() < 1e-8);
        // gradient of (x^4 + y^4)^(1/4) at (1,1) is 2^(-3/4) (1,1); normalized (1,1)/sqrt2
        let n = tangent_direction(&NormSpec::Lp { p: 4.0 }, Vector2::new(1.0, 1.0)).unwrap();
        let s = 0.5f64.sqrt();
        assert!((n - Vector2::new(s, s)).length() < 1e-8);
    }

    #[test]
    fn tangent_errors() {
        assert!(matches!(
            tangent_direction(&NormSpec::L1, Vector2::new(1.0, 0.0)),
            Err(ZoneError::Unsupported(_))
        ));
        assert!(matches!(
            tangent_direction(&NormSpec::inflated(0.1), Vector2::new(1.0, 1.0)),
            Err(ZoneError::Unsupported(_))
        ));
        assert!(matches!(
            tangent_direction(&NormSpec::Euclidean, Vector2::ZERO),
            Err(ZoneError::Domain(_))
        ));
    }

    #[test]
    fn equivalence_examples() {
        let e = NormSpec::Euclidean;
        let t = EQUIVALENCE_TOL;
        assert!(directions_equivalent(&e, Vector2::new(1.0, 0.0), Vector2::new(2.0, 0.0), t).unwrap());
        assert!(!directions_equivalent(&e, Vector2::new(1.0, 0.0), Vector2::new(0.0, 1.0), t).unwrap());
        // l1 is additive on the open positive quadrant: 1.5 + 3.7 == 5.2
        let a = Vector2::new(1.0, 0.5);
        let b = Vector2::new(2.0, 1.7);
        assert_eq!(NormSpec::L1.norm(a + b), NormSpec::L1.norm(a) + NormSpec::L1.norm(b));
        assert!(directions_equivalent(&NormSpec::L1, a, b, t).unwrap());
        assert!(directions_equivalent(&e, Vector2::ZERO, b, t).is_err());
    }

    #[test]
    fn convexity_modulus_examples() {
        let m = estimate_convexity_modulus(&NormSpec::Euclidean, 1.0, 3600).unwrap();
        assert!((m - (1.0 - 3f64.sqrt() / 2.0)).abs() < 1e-9, "{m}");
        assert_eq!(estimate_convexity_modulus(&NormSpec::L1, 0.5, 400).unwrap(), 0.0);
        let m = estimate_convexity_modulus(&NormSpec::Euclidean, 1e-6, 400).unwrap();
        assert!(m < 1e-3);
        assert!(estimate_convexity_modulus(&NormSpec::Euclidean, 2.5, 400).is_err());
    }

    /// Brute-force oracle for the Euclidean modulus: the closest admissible
    /// pair sits at Euclidean chord length eps, i.e. at angle 2 asin(eps/2),
    /// giving 1 - cos(asin(eps/2)).
    #[test]
    fn convexity_modulus_matches_chord_formula() {
        for eps in [0.3, 0.8, 1.5] {
            let exact = 1.0 - (1.0 - eps * eps / 4.0f64).sqrt();
            let m = estimate_convexity_modulus(&NormSpec::Euclidean, eps, 2000).unwrap();
            assert!(m >= exact - 1e-12 && m - exact < 5e-3, "eps={eps}: {m} vs {exact}");
        }
    }

    #[test]
    fn euclidean_smoothness_constants() {
        let c = estimate_smoothness_constants(&NormSpec::Euclidean, 360).unwrap();
        assert!((c.sigma - PI / 2.0).abs() < 1e-6, "{c:?}");
        // cut-chord: ||u - t v|| = 1 at t = 2<u,v>; the cone <u,v> >= sin(sigma/2)
        // gives alpha close to 2 sin(pi/4) = sqrt 2 (slightly below, widened cone).
        assert!(c.alpha <= 2f64.sqrt() + 1e-6 && c.alpha > 1.2, "{c:?}");
        assert_eq!(c.count_violations(&NormSpec::Euclidean, 10_000, 1), 0);
    }

    #[test]
    fn lp4_smoothness_constants_positive() {
        let spec = NormSpec::Lp { p: 4.0 };
        let c = estimate_smoothness_constants(&spec, 360).unwrap();
        assert!(c.alpha > 0.0 && c.beta > 0.0 && c.sigma > 0.0);
        assert_eq!(c.count_violations(&spec, 10_000, 2), 0);
        assert!(estimate_smoothness_constants(&NormSpec::L1, 360).is_err());
    }

    #[test]
    fn inflated_sandwich_spot_check() {
        let (alpha, delta) = (0.01, 1e-4);
        let n = NormSpec::InflatedL1 { alpha, delta };
        for (x, y) in [(1.0, 2.0), (-3.0, 0.5), (0.0, -1.0)] {
            let l1 = NormSpec::L1.eval(x, y);
            let v = n.eval(x, y);
            assert!(v <= l1 * (1.0 + 1e-15) && v >= (1.0 - alpha * delta) * l1 * (1.0 - 1e-15));
        }
    }

    fn any_vec() -> impl Strategy<Value = Vector2> {
        (-1e3f64..1e3, -1e3f64..1e3).prop_map(|(x, y)| Vector2::new(x, y))
    }

    proptest! {
        #[test]
        fn homogeneity(v in any_vec(), c in 1e-3f64..1e3, k in 0usize..6) {
            let n = NORMS[k];
            let lhs = n.norm(v * c);
            let rhs = c * n.norm(v);
            prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(f64::MIN_POSITIVE));
        }

        #[test]
        fn triangle_and_positivity(a in any_vec(), b in any_vec(), k in 0usize..6) {
            let n = NORMS[k];
            prop_assert!(n.norm(a + b) <= (n.norm(a) + n.norm(b)) * (1.0 + 1e-12));
            prop_assert!(n.norm(a) >= 0.0);
            prop_assert_eq!(n.norm(a) == 0.0, a.is_zero());
        }

        #[test]
        fn rotund_midpoints_strictly_inside(s in 0.0f64..TAU, t in 0.0f64..TAU, k in 0usize..6) {
            let n = NORMS[k];
            prop_assume!(n.is_rotund() && (s - t).abs() > 1e-3 && (s - t).abs() < TAU - 1e-3);
            let x = n.normalize(Vector2::from_angle(s));
            let y = n.normalize(Vector2::from_angle(t));
            prop_assert!(n.norm((x + y) * 0.5) < 1.0);
        }

        #[test]
        fn equivalence_reflexive_symmetric(a in any_vec(), b in any_vec(), k in 0usize..6) {
            prop_assume!(!a.is_zero() && !b.is_zero());
            let n = NORMS[k];
            prop_assert!(directions_equivalent(&n, a, a, EQUIVALENCE_TOL).unwrap());
            prop_assert_eq!(
                directions_equivalent(&n, a, b, EQUIVALENCE_TOL).unwrap(),
                directions_equivalent(&n, b, a, EQUIVALENCE_TOL).unwrap()
            );
        }
    }

    #[test]
    fn l1_midpoints_attain_one() {
        let x = Vector2::new(1.0, 0.0);
        let y = Vector2::new(0.0, 1.0);
        assert_eq!(NormSpec::L1.norm((x + y) * 0.5), 1.0);
    }
}
