//! Raster-scale checks of the geometric lemmas.
//!
//! Every check takes its sampling seed explicitly, so a report is a pure
//! function of its inputs.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::analysis::LemmaReport;
use crate::dominance::{dominance_region, site_distance_field, DiagramState};
use crate::error::{Result, ZoneError};
use crate::norms::{unit_sweep, NormSpec, Vector2};
use crate::raster::{convexity_violations, distance_field, Grid, RegionBitmap};
use crate::sites::{nearest_point, Site, SiteSet};

/// Vertices of the polygon standing in for a norm ball.
pub const BALL_VERTICES: usize = 128;

fn check_state(sites: &SiteSet, state: &DiagramState) -> Result<()> {
    if state.r.len() != sites.len() || state.s.len() != sites.len() {
        return Err(ZoneError::Validation(format!(
            "state has {} regions for {} sites",
            state.r.len(),
            sites.len()
        )));
    }
    Ok(())
}

/// Neighborhood bounds around each site, with `ε` the minimum separation:
/// every cell within `ε/4 - cell_diag` of `P_i` lies in `R_i`, and no cell
/// of `S_j` (`j ≠ i`) lies within `ε/2 - 2·cell_diag` of `P_i`.
pub fn check_eps_neighborhood(spec: &NormSpec, sites: &SiteSet, state: &DiagramState) -> Result<LemmaReport> {
    check_state(sites, state)?;
    let g = *state.r.grid();
    let eps = sites.min_separation();
    let cd = g.cell_diag();
    let mut report = LemmaReport::new("eps_neighborhood");
    for (i, site) in sites.sites().iter().enumerate() {
        let field = site_distance_field(spec, &g, site);
        for k in 0..g.len() {
            if field[k] <= eps / 4.0 - cd {
                report.samples_checked += 1;
                if !state.r.region(i).get(k) {
                    report.violation(g.center_of(k));
                }
            }
            if field[k] < eps / 2.0 - 2.0 * cd {
                for j in (0..sites.len()).filter(|&j| j != i) {
                    report.samples_checked += 1;
                    if state.s.region(j).get(k) {
                        report.violation(g.center_of(k));
                    }
                }
            }
        }
    }
    report.metric("eps", eps);
    Ok(report)
}

/// Andrew's monotone chain; counter-clockwise, no repeated endpoint.
fn convex_hull(mut pts: Vec<Vector2>) -> Vec<Vector2> {
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut hull: Vec<Vector2> = Vec::with_capacity(2 * pts.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &Vector2>> =
            if pass == 0 { Box::new(pts.iter()) } else { Box::new(pts.iter().rev()) };
        for &p in iter {
            while hull.len() >= start + 2 {
                let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
                if (b - a).cross(p - a) <= 0.0 {
                    hull.pop();
                } else {
                    break;
                }
            }
            hull.push(p);
        }
        hull.pop();
    }
    hull
}

fn in_convex(hull: &[Vector2], p: Vector2) -> bool {
    let n = hull.len();
    (0..n).all(|k| {
        let (a, b) = (hull[k], hull[(k + 1) % n]);
        (b - a).cross(p - a) >= -1e-12 * (b - a).length()
    })
}

/// Cells of the cone `conv({a} ∪ B(p, rho))` lying outside `region` by more
/// than one cell diagonal.
fn cone_escapes(
    spec: &NormSpec,
    grid: &Grid,
    region: &RegionBitmap,
    to_region: &[f64],
    a: Vector2,
    p: Vector2,
    rho: f64,
) -> Vec<Vector2> {
    let mut pts: Vec<Vector2> = unit_sweep(spec, BALL_VERTICES).into_iter().map(|u| p + u * rho).collect();
    pts.push(a);
    let hull = convex_hull(pts);
    let (mut lo, mut hi) = (hull[0], hull[0]);
    for &v in &hull {
        lo = Vector2::new(lo.x.min(v.x), lo.y.min(v.y));
        hi = Vector2::new(hi.x.max(v.x), hi.y.max(v.y));
    }
    let cd = grid.cell_diag();
    let col = |x: f64| ((x - grid.xmin) / grid.cell_w()).floor().clamp(0.0, grid.nx as f64 - 1.0) as usize;
    let row = |y: f64| ((y - grid.ymin) / grid.cell_h()).floor().clamp(0.0, grid.ny as f64 - 1.0) as usize;
    let mut out = Vec::new();
    for j in row(lo.y)..=row(hi.y) {
        for i in col(lo.x)..=col(hi.x) {
            let c = grid.center(i, j);
            let k = grid.index(i, j);
            if in_convex(&hull, c) && !region.get(k) && to_region[k] > cd {
                out.push(c);
            }
        }
    }
    out
}

/// Cone lemma at raster scale: for sampled boundary cells `a` of `R_i` with
/// nearest site point `p`, the cone `conv({a} ∪ B(p, rho))` stays inside
/// `R_i` up to one cell diagonal. Only meaningful for rotund norms.
///
/// The same samples are also run at `ε/32, ε/16, ε/8, ε/4`; the largest of
/// these radii without violations is recorded as `largest_passing_rho`
/// (0 when none passes).
pub fn check_cone_lemma(
    spec: &NormSpec,
    sites: &SiteSet,
    state: &DiagramState,
    rho: f64,
    n_samples: usize,
    seed: u64,
) -> Result<LemmaReport> {
    if !spec.is_rotund() {
        return Err(ZoneError::Unsupported(format!("cone lemma needs a rotund norm, {spec} is not")));
    }
    check_state(sites, state)?;
    let eps = sites.min_separation();
    if !(rho > 0.0 && rho <= eps / 4.0) {
        return Err(ZoneError::Domain(format!("rho must lie in (0, eps/4] = (0, {}], got {rho}", eps / 4.0)));
    }
    let g = *state.r.grid();
    let boundary: Vec<(usize, usize)> = (0..sites.len())
        .flat_map(|i| state.r.region(i).boundary_cells().into_iter().map(move |k| (i, k)))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let picks: Vec<(usize, usize)> = if boundary.len() <= n_samples {
        boundary.clone()
    } else {
        let mut idx = sample(&mut rng, boundary.len(), n_samples).into_vec();
        idx.sort_unstable();
        idx.into_iter().map(|m| boundary[m]).collect()
    };
    let fields: Vec<Option<Vec<f64>>> = (0..sites.len())
        .map(|i| {
            let used = picks.iter().any(|&(s, _)| s == i);
            used.then(|| distance_field(&NormSpec::Euclidean, &g, state.r.region(i))).transpose()
        })
        .collect::<Result<_>>()?;

    let ladder: Vec<f64> = [32.0, 16.0, 8.0, 4.0].iter().map(|d| eps / d).collect();
    let mut ladder_ok = vec![true; ladder.len()];
    let mut report = LemmaReport::new("cone");
    for &(i, k) in &picks {
        let a = g.center_of(k);
        let (p, _) = nearest_point(spec, a, &sites.sites()[i]);
        let region = state.r.region(i);
        let to_region = fields[i].as_deref().expect("field computed for sampled site");
        report.samples_checked += 1;
        for c in cone_escapes(spec, &g, region, to_region, a, p, rho) {
            report.violation(c);
        }
        for (r, ok) in ladder.iter().zip(ladder_ok.iter_mut()) {
            if *ok && !cone_escapes(spec, &g, region, to_region, a, p, *r).is_empty() {
                *ok = false;
            }
        }
    }
    let best = ladder.iter().zip(&ladder_ok).filter(|(_, &ok)| ok).map(|(r, _)| *r).fold(0.0, f64::max);
    report.metric("rho", rho);
    report.metric("largest_passing_rho", best);
    Ok(report)
}

/// Midpoint-convexity report for an arbitrary region.
pub fn check_region_convexity(
    lemma_id: &str,
    region: &RegionBitmap,
    n_pairs: usize,
    band: f64,
    seed: u64,
) -> LemmaReport {
    let mut report = LemmaReport::new(lemma_id);
    report.samples_checked = n_pairs;
    for (a, b) in convexity_violations(region, n_pairs, band, seed) {
        report.violation((a + b) * 0.5);
    }
    report
}

/// Convexity of `dom(p, H)` for the halfplane `H = {x : <normal, x> <= offset}`,
/// with `H` rasterized as the cells whose centers satisfy the inequality.
/// Midpoints are tested with a band of two cell diagonals.
pub fn check_dom_halfspace_convex(
    spec: &NormSpec,
    p: Vector2,
    normal: Vector2,
    offset: f64,
    grid: &Grid,
    n_pairs: usize,
    seed: u64,
) -> Result<LemmaReport> {
    if normal.is_zero() || !normal.is_finite() {
        return Err(ZoneError::Domain("halfplane normal must be a finite nonzero vector".into()));
    }
    if normal.dot(p) <= offset {
        return Err(ZoneError::Domain(format!("point {p:?} lies in the halfplane")));
    }
    let obstacle = RegionBitmap::from_predicate(*grid, |c| normal.dot(c) <= offset);
    let region = dominance_region(spec, grid, &Site::point(p), &obstacle)?;
    Ok(check_region_convexity("dom_halfspace_convex", &region, n_pairs, 2.0 * grid.cell_diag(), seed))
}

/// What [`check_strict_triangle`] looks for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TriangleMode {
    /// Require `||x + y|| < ||x|| + ||y||` for non-parallel pairs; the norm
    /// must be rotund.
    Strict,
    /// Collect pairs attaining equality, for norms that are not rotund.
    Control,
}

/// Strict triangle inequality on `n_samples` pairs `x`, `y` whose angle is
/// at least `1e-3` rad away from 0. Half of the pairs are nearly parallel.
/// A pair counts as equality when the gap is at most `1e-12·(||x|| + ||y||)`;
/// witnesses are the vectors `x`.
pub fn check_strict_triangle(spec: &NormSpec, n_samples: usize, seed: u64, mode: TriangleMode) -> Result<LemmaReport> {
    if mode == TriangleMode::Strict && !spec.is_rotund() {
        return Err(ZoneError::Unsupported(format!("{spec} is not rotund")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tau = std::f64::consts::TAU;
    let mut report = LemmaReport::new(match mode {
        TriangleMode::Strict => "strict_triangle",
        TriangleMode::Control => "strict_triangle_control",
    });
    for s in 0..n_samples {
        let theta = rng.gen_range(0.0..tau);
        let turn = if s % 2 == 0 {
            rng.gen_range(1e-3..tau - 1e-3)
        } else {
            let t = 10f64.powf(rng.gen_range(-3.0..-1.0));
            if rng.gen_bool(0.5) { t } else { tau - t }
        };
        let x = Vector2::from_angle(theta) * 10f64.powf(rng.gen_range(-1.0..1.0));
        let y = Vector2::from_angle(theta + turn) * 10f64.powf(rng.gen_range(-1.0..1.0));
        let scale = spec.norm(x) + spec.norm(y);
        report.samples_checked += 1;
        if scale - spec.norm(x + y) <= 1e-12 * scale {
            report.violation(x);
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dominance::DomOperator;

    fn two_points(spec: NormSpec) -> (SiteSet, Grid) {
        let sites = SiteSet::new(
            &spec,
            vec![Site::point(Vector2::new(-1.5, 0.0)), Site::point(Vector2::new(1.5, 0.0))],
        )
        .unwrap();
        (sites, Grid::square(4.0, 96).unwrap())
    }

    #[test]
    fn hull_of_square_with_interior_point() {
        let pts = vec![
            Vector2::new(0.0, 0.0),
            Vector2::new(1.0, 0.0),
            Vector2::new(1.0, 1.0),
            Vector2::new(0.0, 1.0),
            Vector2::new(0.5, 0.5),
        ];
        let h = convex_hull(pts);
        assert_eq!(h.len(), 4);
        assert!(in_convex(&h, Vector2::new(0.2, 0.9)));
        assert!(!in_convex(&h, Vector2::new(1.2, 0.5)));
    }

    #[test]
    fn eps_neighborhood_on_converged_state_and_corruption() {
        let spec = NormSpec::Euclidean;
        let (sites, g) = two_points(spec);
        let op = DomOperator::new(&spec, &sites, &g).unwrap();
        let mut state = op.double_zone(200).unwrap();
        assert!(check_eps_neighborhood(&spec, &sites, &state).unwrap().pass);
        let mut regions = state.r.clone().into_regions();
        let hole = g.cell_of(Vector2::new(-1.5 + 0.2, 0.1)).unwrap();
        regions[0].set(hole, false);
        state.r = crate::raster::RegionTuple::new(regions).unwrap();
        let bad = check_eps_neighborhood(&spec, &sites, &state).unwrap();
        assert!(!bad.pass);
        assert_eq!(bad.witnesses, vec![g.center_of(hole)]);
    }

    #[test]
    fn eps_neighborhood_single_site() {
        let spec = NormSpec::L1;
        let sites = SiteSet::new(&spec, vec![Site::point(Vector2::new(0.2, 0.0))]).unwrap();
        let g = Grid::square(1.0, 40).unwrap();
        let state = DomOperator::new(&spec, &sites, &g).unwrap().double_zone(10).unwrap();
        assert!(check_eps_neighborhood(&spec, &sites, &state).unwrap().pass);
    }

    #[test]
    fn cone_lemma_euclidean() {
        let spec = NormSpec::Euclidean;
        let (sites, g) = two_points(spec);
        let state = DomOperator::new(&spec, &sites, &g).unwrap().double_zone(200).unwrap();
        let r = check_cone_lemma(&spec, &sites, &state, 0.75, 60, 1).unwrap();
        assert!(r.pass, "{:?}", r.witnesses);
        assert_eq!(r.samples_checked, 60);
        assert!(r.metrics["largest_passing_rho"] > 0.0);
    }

    #[test]
    fn cone_lemma_rejects_bad_inputs() {
        let (sites, g) = two_points(NormSpec::L1);
        let state = DomOperator::new(&NormSpec::L1, &sites, &g).unwrap().double_zone(200).unwrap();
        assert!(matches!(check_cone_lemma(&NormSpec::L1, &sites, &state, 0.5, 5, 1), Err(ZoneError::Unsupported(_))));
        let e = NormSpec::Euclidean;
        assert!(matches!(check_cone_lemma(&e, &sites, &state, 1.0, 5, 1), Err(ZoneError::Domain(_))));
    }

    #[test]
    fn halfspace_dominance() {
        let g = Grid::square(4.0, 64).unwrap();
        let n = Vector2::new(0.0, 1.0);
        let r = check_dom_halfspace_convex(&NormSpec::Euclidean, Vector2::new(0.0, 1.0), n, -1.0, &g, 3000, 2).unwrap();
        assert!(r.pass);
        let inside = check_dom_halfspace_convex(&NormSpec::Euclidean, Vector2::new(0.0, -2.0), n, -1.0, &g, 10, 2);
        assert!(matches!(inside, Err(ZoneError::Domain(_))));
    }

    #[test]
    fn strict_triangle_modes() {
        let e = check_strict_triangle(&NormSpec::Euclidean, 20_000, 5, TriangleMode::Strict).unwrap();
        assert!(e.pass && e.samples_checked == 20_000);
        let inf = check_strict_triangle(&NormSpec::InflatedL1 { alpha: 0.5, delta: 0.7 }, 20_000, 5, TriangleMode::Strict)
            .unwrap();
        assert!(inf.pass);
        assert!(matches!(
            check_strict_triangle(&NormSpec::L1, 10, 5, TriangleMode::Strict),
            Err(ZoneError::Unsupported(_))
        ));
        let l1 = check_strict_triangle(&NormSpec::L1, 2000, 5, TriangleMode::Control).unwrap();
        assert!(!l1.pass);
        assert!(l1.witnesses.iter().any(|w| w.x > 0.0 && w.y > 0.0));
    }
}
