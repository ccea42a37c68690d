//! Exact cell-center distance fields.
//!
//! For a query cell outside the target set, a nearest target cell can always
//! be found among the target's *boundary* cells: every norm in this crate is
//! absolute and strictly decreases when a nonzero coordinate of the offset
//! shrinks by a cell, so stepping from an interior target cell toward the
//! query reaches a closer target cell. Boundary cells are grouped into
//! square buckets; a bucket is skipped when a lower bound on the distance to
//! its bounding box already exceeds the best candidate. The pruning never
//! changes the result, which equals the brute-force minimum bit for bit.

use rayon::prelude::*;

use crate::error::{Result, ZoneError};
use crate::norms::{NormSpec, Vector2};
use crate::raster::{Grid, RegionBitmap};

/// Cells per bucket side.
pub const BUCKET: usize = 16;

/// Relative slack on pruning thresholds; keeps the lower bounds
/// conservative under rounding.
const PRUNE_SLACK: f64 = 1e-9;

struct Bucket {
    lo: Vector2,
    hi: Vector2,
    pts: Vec<Vector2>,
}

/// Boundary cells of a target bitmap, bucketed for nearest queries.
pub(crate) struct TargetIndex<'a> {
    target: &'a RegionBitmap,
    buckets: Vec<Bucket>,
}

#[inline]
fn gap(v: f64, lo: f64, hi: f64) -> f64 {
    if v < lo {
        lo - v
    } else if v > hi {
        v - hi
    } else {
        0.0
    }
}

#[inline]
fn box_gap(alo: Vector2, ahi: Vector2, blo: Vector2, bhi: Vector2) -> (f64, f64) {
    let gx = (blo.x - ahi.x).max(alo.x - bhi.x).max(0.0);
    let gy = (blo.y - ahi.y).max(alo.y - bhi.y).max(0.0);
    (gx, gy)
}

impl<'a> TargetIndex<'a> {
    pub(crate) fn new(target: &'a RegionBitmap) -> Self {
        let g = *target.grid();
        let nbx = g.nx.div_ceil(BUCKET);
        let nby = g.ny.div_ceil(BUCKET);
        let mut slots: Vec<Vec<Vector2>> = (0..nbx * nby).map(|_| Vec::new()).collect();
        for k in target.boundary_cells() {
            let (i, j) = g.coords(k);
            slots[(j / BUCKET) * nbx + i / BUCKET].push(g.center(i, j));
        }
        let buckets = slots
            .into_iter()
            .filter(|pts| !pts.is_empty())
            .map(|pts| {
                let mut lo = pts[0];
                let mut hi = pts[0];
                for p in &pts {
                    lo = Vector2::new(lo.x.min(p.x), lo.y.min(p.y));
                    hi = Vector2::new(hi.x.max(p.x), hi.y.max(p.y));
                }
                Bucket { lo, hi, pts }
            })
            .collect();
        TargetIndex { target, buckets }
    }

    /// For every cell `c` returns a value `v[c]` such that `v[c] < cutoff(c)`
    /// exactly when `dist(c, target) < cutoff(c)`. Where the distance is
    /// below the cutoff the value is some target distance below the cutoff;
    /// with an infinite cutoff it is the exact distance. Target cells get 0;
    /// an empty target gives `+inf` everywhere.
    pub(crate) fn query<F>(&self, spec: &NormSpec, cutoff: F) -> Vec<f64>
    where
        F: Fn(usize) -> f64 + Sync,
    {
        let g = *self.target.grid();
        let mut out = vec![0.0; g.len()];
        if self.buckets.is_empty() {
            for (k, v) in out.iter_mut().enumerate() {
                *v = if self.target.get(k) { 0.0 } else { f64::INFINITY };
            }
            return out;
        }
        let rows_per_chunk = BUCKET * g.nx;
        out.par_chunks_mut(rows_per_chunk)
            .enumerate()
            .for_each(|(by, chunk)| self.query_band(spec, &cutoff, by, chunk));
        out
    }

    fn query_band<F>(&self, spec: &NormSpec, cutoff: &F, by: usize, chunk: &mut [f64])
    where
        F: Fn(usize) -> f64,
    {
        let g = *self.target.grid();
        let j0 = by * BUCKET;
        let j1 = (j0 + BUCKET).min(g.ny);
        let mut order: Vec<(f64, usize)> = Vec::with_capacity(self.buckets.len());
        for i0 in (0..g.nx).step_by(BUCKET) {
            let i1 = (i0 + BUCKET).min(g.nx);
            let qlo = g.center(i0, j0);
            let qhi = g.center(i1 - 1, j1 - 1);
            order.clear();
            order.extend(self.buckets.iter().enumerate().map(|(b, bk)| {
                let (gx, gy) = box_gap(qlo, qhi, bk.lo, bk.hi);
                (spec.eval(gx, gy), b)
            }));
            order.sort_by(|a, b| a.0.total_cmp(&b.0));

            let mut warm: Option<Vector2> = None;
            for j in j0..j1 {
                for i in i0..i1 {
                    let k = g.index(i, j);
                    let local = k - j0 * g.nx;
                    if self.target.get(k) {
                        chunk[local] = 0.0;
                        continue;
                    }
                    let c = g.center(i, j);
                    let cut = cutoff(k);
                    let (best, best_pt) = self.nearest(spec, c, cut, warm, &order);
                    warm = best_pt;
                    chunk[local] = best;
                }
            }
        }
    }

    #[inline]
    fn nearest(
        &self,
        spec: &NormSpec,
        c: Vector2,
        cut: f64,
        warm: Option<Vector2>,
        order: &[(f64, usize)],
    ) -> (f64, Option<Vector2>) {
        let (mut best, mut best_pt) = match warm {
            Some(p) => (spec.dist(c, p), Some(p)),
            None => (f64::INFINITY, None),
        };
        let early = cut.is_finite();
        if early && best < cut {
            return (best, best_pt);
        }
        for &(lb, b) in order {
            let limit = best.min(cut) * (1.0 + PRUNE_SLACK);
            if lb > limit {
                break;
            }
            let bk = &self.buckets[b];
            let clb = spec.eval(gap(c.x, bk.lo.x, bk.hi.x), gap(c.y, bk.lo.y, bk.hi.y));
            if clb > limit {
                continue;
            }
            for &p in &bk.pts {
                let d = spec.dist(c, p);
                if d < best {
                    best = d;
                    best_pt = Some(p);
                }
            }
            if early && best < cut {
                break;
            }
        }
        (best, best_pt)
    }
}

/// Distance from every cell center to the nearest center of a `target`
/// cell, under `spec`. Zero on the target.
pub fn distance_field(spec: &NormSpec, grid: &Grid, target: &RegionBitmap) -> Result<Vec<f64>> {
    if target.grid() != grid {
        return Err(ZoneError::Validation("target bitmap is on a different grid".into()));
    }
    if target.is_empty() {
        return Err(ZoneError::Domain("distance field to an empty target".into()));
    }
    Ok(TargetIndex::new(target).query(spec, |_| f64::INFINITY))
}

/// Reference implementation: minimum over all target cells, no pruning.
#[doc(hidden)]
pub fn brute_force_distance_field(spec: &NormSpec, target: &RegionBitmap) -> Vec<f64> {
    let g = *target.grid();
    let pts: Vec<Vector2> = target.cells().map(|k| g.center_of(k)).collect();
    (0..g.len())
        .map(|k| {
            if target.get(k) {
                return 0.0;
            }
            let c = g.center_of(k);
            pts.iter().map(|&p| spec.dist(c, p)).fold(f64::INFINITY, f64::min)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const NORMS: [NormSpec; 6] = [
        NormSpec::Euclidean,
        NormSpec::Lp { p: 3.0 },
        NormSpec::Lp { p: 1.5 },
        NormSpec::L1,
        NormSpec::Linf,
        NormSpec::InflatedL1 { alpha: 0.1, delta: 0.01 },
    ];

    #[test]
    fn single_cell_is_a_cone() {
        let g = Grid::square(1.0, 17).unwrap();
        let mut t = RegionBitmap::empty(g);
        let src = g.index(4, 11);
        t.set(src, true);
        let f = distance_field(&NormSpec::Euclidean, &g, &t).unwrap();
        for k in 0..g.len() {
            assert_eq!(f[k], NormSpec::Euclidean.dist(g.center_of(k), g.center_of(src)));
        }
    }

    #[test]
    fn two_cells_l1_is_min_of_cones() {
        let g = Grid::square(1.0, 31).unwrap();
        let mut t = RegionBitmap::empty(g);
        let (a, b) = (g.index(3, 3), g.index(25, 20));
        t.set(a, true);
        t.set(b, true);
        let f = distance_field(&NormSpec::L1, &g, &t).unwrap();
        for k in 0..g.len() {
            let c = g.center_of(k);
            let e = NormSpec::L1.dist(c, g.center_of(a)).min(NormSpec::L1.dist(c, g.center_of(b)));
            assert_eq!(f[k], e);
        }
    }

    #[test]
    fn random_bitmaps_match_brute_force() {
        let g = Grid::new(-1.0, -2.0, 3.0, 1.0, 64, 64).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for spec in NORMS {
            for density in [0.002, 0.05, 0.4] {
                let bits = (0..g.len()).map(|_| rng.gen_bool(density)).collect();
                let t = RegionBitmap::from_bits(g, bits).unwrap();
                if t.is_empty() {
                    continue;
                }
                let fast = distance_field(&spec, &g, &t).unwrap();
                assert_eq!(fast, brute_force_distance_field(&spec, &t), "{spec} density {density}");
            }
        }
    }

    #[test]
    fn cutoff_query_agrees_on_decisions() {
        let g = Grid::square(2.0, 48).unwrap();
        let t = RegionBitmap::from_predicate(g, |p| (p.x - 0.7).powi(2) + p.y * p.y < 0.3);
        let spec = NormSpec::Lp { p: 4.0 };
        let exact = distance_field(&spec, &g, &t).unwrap();
        let cut = |k: usize| 0.02 * (k % 97) as f64;
        let fast = TargetIndex::new(&t).query(&spec, cut);
        for k in 0..g.len() {
            assert_eq!(fast[k] < cut(k), exact[k] < cut(k));
        }
    }

    #[test]
    fn lipschitz_between_neighbors() {
        let g = Grid::square(1.0, 40).unwrap();
        let t = RegionBitmap::from_predicate(g, |p| p.x + 0.5 * p.y > 0.6 || p.y < -0.8);
        for spec in NORMS {
            let f = distance_field(&spec, &g, &t).unwrap();
            for k in 0..g.len() {
                for n in g.neighbors4(k) {
                    let step = spec.dist(g.center_of(k), g.center_of(n));
                    assert!((f[k] - f[n]).abs() <= step * (1.0 + 1e-12));
                }
            }
        }
    }

    #[test]
    fn empty_target_is_domain_error() {
        let g = Grid::square(1.0, 8).unwrap();
        let r = distance_field(&NormSpec::L1, &g, &RegionBitmap::empty(g));
        assert!(matches!(r, Err(ZoneError::Domain(_))));
    }
}
