//! Sites (finite unions of points and segments) and exact point-to-site
//! distances under any [`NormSpec`].

use serde::{Deserialize, Serialize};

use crate::error::{Result, ZoneError};
use crate::norms::{NormSpec, Vector2};
use crate::search::golden_section_min;

/// Closed segment between two distinct endpoints.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment(pub Vector2, pub Vector2);

impl Segment {
    #[inline]
    pub fn at(&self, t: f64) -> Vector2 {
        self.0.lerp(self.1, t)
    }
}

/// A site: a nonempty union of points and segments.
///
/// Serialized as `{"points": [[x,y],...], "segments": [[[x1,y1],[x2,y2]],...]}`;
/// either list may be omitted.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Site {
    #[serde(default)]
    pub points: Vec<Vector2>,
    #[serde(default)]
    pub segments: Vec<Segment>,
}

impl Site {
    pub fn point(p: Vector2) -> Self {
        Site {
            points: vec![p],
            segments: Vec::new(),
        }
    }

    pub fn segment(a: Vector2, b: Vector2) -> Self {
        Site {
            points: Vec::new(),
            segments: vec![Segment(a, b)],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.points.is_empty() && self.segments.is_empty() {
            return Err(ZoneError::Domain("site has no points and no segments".into()));
        }
        if !self.points.iter().all(|p| p.is_finite()) {
            return Err(ZoneError::Domain("site point is not finite".into()));
        }
        for s in &self.segments {
            if !(s.0.is_finite() && s.1.is_finite()) {
                return Err(ZoneError::Domain("segment endpoint is not finite".into()));
            }
            if s.0 == s.1 {
                return Err(ZoneError::Domain("segment endpoints coincide".into()));
            }
        }
        Ok(())
    }

    /// Every point and segment endpoint.
    pub fn anchors(&self) -> impl Iterator<Item = Vector2> + '_ {
        self.points
            .iter()
            .copied()
            .chain(self.segments.iter().flat_map(|s| [s.0, s.1]))
    }

    /// Mirror image across the horizontal line `y = c`.
    pub fn mirrored_y(&self, c: f64) -> Site {
        let m = |p: Vector2| Vector2::new(p.x, 2.0 * c - p.y);
        Site {
            points: self.points.iter().map(|&p| m(p)).collect(),
            segments: self.segments.iter().map(|s| Segment(m(s.0), m(s.1))).collect(),
        }
    }
}

/// Bracket width, in segment parameter, at which golden-section stops.
/// Tight enough that touching sites measure below the overlap threshold.
const SEGMENT_TOL: f64 = 1e-14;

/// Distance from `x` to the segment and the parameter where it is attained.
///
/// `t -> ||x - s(t)||` is convex for every norm, so golden-section search
/// applies even where the norm has corners.
pub fn segment_distance(spec: &NormSpec, x: Vector2, s: &Segment) -> (f64, f64) {
    let (t, d) = golden_section_min(|t| spec.dist(x, s.at(t)), 0.0, 1.0, SEGMENT_TOL);
    (d, t)
}

/// Nearest point of `site` to `x` together with its distance.
pub fn nearest_point(spec: &NormSpec, x: Vector2, site: &Site) -> (Vector2, f64) {
    let mut best = (Vector2::ZERO, f64::INFINITY);
    for &p in &site.points {
        let d = spec.dist(x, p);
        if d < best.1 {
            best = (p, d);
        }
    }
    for s in &site.segments {
        let (d, t) = segment_distance(spec, x, s);
        if d < best.1 {
            best = (s.at(t), d);
        }
    }
    best
}

/// `dist(x, site)` under `spec`.
pub fn dist_point_to_site(spec: &NormSpec, x: Vector2, site: &Site) -> Result<f64> {
    if site.points.is_empty() && site.segments.is_empty() {
        return Err(ZoneError::Domain("empty site".into()));
    }
    Ok(nearest_point(spec, x, site).1)
}

/// Distance between two segments: `(s, t) -> ||a(s) - b(t)||` is jointly
/// convex, so the outer minimum over `s` of the inner segment distance is
/// unimodal as well.
fn segment_segment_distance(spec: &NormSpec, a: &Segment, b: &Segment) -> f64 {
    golden_section_min(|s| segment_distance(spec, a.at(s), b).0, 0.0, 1.0, SEGMENT_TOL).1
}

/// Distance between two sites.
pub fn site_distance(spec: &NormSpec, a: &Site, b: &Site) -> f64 {
    let mut best = f64::INFINITY;
    for &p in &a.points {
        for &q in &b.points {
            best = best.min(spec.dist(p, q));
        }
        for s in &b.segments {
            best = best.min(segment_distance(spec, p, s).0);
        }
    }
    for s in &a.segments {
        for &q in &b.points {
            best = best.min(segment_distance(spec, q, s).0);
        }
        for t in &b.segments {
            best = best.min(segment_segment_distance(spec, s, t));
        }
    }
    best
}

/// Ordered tuple of pairwise disjoint sites, with the minimum pairwise
/// distance cached.
#[derive(Debug, Clone, PartialEq)]
pub struct SiteSet {
    sites: Vec<Site>,
    /// `min_{i != j} dist(P_i, P_j)`; infinite for a single site.
    min_separation: f64,
}

impl SiteSet {
    /// Validates the sites and computes their separation under `spec`.
    pub fn new(spec: &NormSpec, sites: Vec<Site>) -> Result<Self> {
        if sites.is_empty() {
            return Err(ZoneError::Validation("a site set needs at least one site".into()));
        }
        for (i, s) in sites.iter().enumerate() {
            s.validate()
                .map_err(|e| ZoneError::Validation(format!("site {i}: {e}")))?;
        }
        let min_separation = if sites.len() == 1 {
            f64::INFINITY
        } else {
            min_separation_of(spec, &sites)?
        };
        Ok(SiteSet { sites, min_separation })
    }

    pub fn sites(&self) -> &[Site] {
        &self.sites
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn min_separation(&self) -> f64 {
        self.min_separation
    }

    /// Axis-aligned bounding box `(min, max)` of all site anchors.
    pub fn bounds(&self) -> (Vector2, Vector2) {
        let mut lo = Vector2::new(f64::INFINITY, f64::INFINITY);
        let mut hi = Vector2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in self.sites.iter().flat_map(|s| s.anchors()) {
            lo = Vector2::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = Vector2::new(hi.x.max(p.x), hi.y.max(p.y));
        }
        (lo, hi)
    }
}

fn min_separation_of(spec: &NormSpec, sites: &[Site]) -> Result<f64> {
    let mut lo = Vector2::new(f64::INFINITY, f64::INFINITY);
    let mut hi = Vector2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in sites.iter().flat_map(|s| s.anchors()) {
        lo = Vector2::new(lo.x.min(p.x), lo.y.min(p.y));
        hi = Vector2::new(hi.x.max(p.x), hi.y.max(p.y));
    }
    let diameter = spec.dist(hi, lo).max(f64::MIN_POSITIVE);
    let mut best = f64::INFINITY;
    for i in 0..sites.len() {
        for j in (i + 1)..sites.len() {
            let d = site_distance(spec, &sites[i], &sites[j]);
            if d < 1e-12 * diameter {
                return Err(ZoneError::Validation(format!("sites {i} and {j} overlap")));
            }
            best = best.min(d);
        }
    }
    Ok(best)
}

/// `min_{i != j} dist(P_i, P_j)` for a set of at least two sites.
pub fn min_separation(spec: &NormSpec, sites: &SiteSet) -> Result<f64> {
    if sites.len() < 2 {
        return Err(ZoneError::Domain("min_separation needs at least two sites".into()));
    }
    min_separation_of(spec, sites.sites())
}
