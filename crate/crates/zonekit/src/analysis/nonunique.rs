//! Two sites with more than one zone diagram.
//!
//! For two sites, `Dom` is monotone when the first region is ordered by
//! inclusion and the second by reverse inclusion. Seeding with
//! `(site raster, full grid)` starts at the bottom of that order and the
//! iteration climbs to a `Dom` fixed point; the opposite seed gives another
//! one. When the sites are placed symmetrically about a horizontal line,
//! the two fixed points are mirror images with the roles of the sites
//! swapped, and they differ whenever the extremal fixed points of `Dom²`
//! do.

use serde::{Deserialize, Serialize};

use crate::analysis::bisector::inflated_bisector_constant;
use crate::dominance::{band_violations, DomOperator, ExtremalSeed, ResidualReport};
use crate::error::{Result, ZoneError};
use crate::norms::{NormSpec, Vector2};
use crate::raster::{Grid, RegionBitmap, RegionTuple};
use crate::sites::{Site, SiteSet};

const MAX_ITER: usize = 10_000;

/// Two zone diagrams of the same two sites.
#[derive(Debug, Clone, PartialEq)]
pub struct NonUniqueness {
    /// Fixed point reached from the seed favoring site 0.
    pub a: RegionTuple,
    /// Fixed point reached from the seed favoring site 1.
    pub b: RegionTuple,
    pub residual_a: ResidualReport,
    pub residual_b: ResidualReport,
    pub summary: NonUniquenessSummary,
}

/// Scalar evidence gathered by a demonstration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NonUniquenessSummary {
    /// Cells whose membership in some region differs between the tuples.
    pub differing_cells: usize,
    pub differing_fraction: f64,
    /// `a` equals `(R_0, S_1)` and `b` equals `(S_0, R_1)` for the extremal
    /// fixed points `R` (bottom) and `S` (top) of `Dom²`.
    pub matches_extremal: bool,
    /// Cells where `b` and the mirror of `a` differ.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mirror_mismatch: Option<usize>,
    /// Mirror mismatches farther than one cell diagonal from a boundary.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mirror_far: Option<usize>,
    /// Largest boundary-ray slope outside the central strip (inflated norm).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_ray_slope: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slope_bound: Option<f64>,
}

fn covers(grid: &Grid, lo: Vector2, hi: Vector2) -> bool {
    grid.xmin <= lo.x && grid.ymin <= lo.y && grid.xmax >= hi.x && grid.ymax >= hi.y
}

fn differing_cells(a: &RegionTuple, b: &RegionTuple) -> usize {
    (0..a.grid().len())
        .filter(|&k| a.regions().iter().zip(b.regions()).any(|(x, y)| x.get(k) != y.get(k)))
        .count()
}

/// Runs both asymmetric seeds for two sites and checks that they give two
/// distinct fixed points of `Dom` (differing on at least 1% of the cells).
/// With `mirror_c`, the first result reflected across `y = mirror_c` with
/// the sites swapped must match the second up to one cell diagonal.
pub fn demonstrate_two_sites(
    spec: &NormSpec,
    sites: &SiteSet,
    grid: &Grid,
    mirror_c: Option<f64>,
) -> Result<NonUniqueness> {
    if sites.len() != 2 {
        return Err(ZoneError::Domain(format!("needs exactly two sites, got {}", sites.len())));
    }
    let op = DomOperator::new(spec, sites, grid)?;
    let bottom = op.extremal(ExtremalSeed::Bottom, MAX_ITER)?;
    let top = op.extremal(ExtremalSeed::Top, MAX_ITER)?;
    if !(bottom.converged && top.converged) {
        return Err(ZoneError::DemonstrationFailed("extremal iterations did not converge".into()));
    }
    if bottom.tuple == top.tuple {
        return Err(ZoneError::DemonstrationFailed(
            "extremal fixed points coincide: the diagram is unique at this resolution".into(),
        ));
    }
    let pick = |first: &RegionTuple, second: &RegionTuple| {
        RegionTuple::new(vec![first.region(0).clone(), second.region(1).clone()])
    };
    let cand_a = pick(&bottom.tuple, &top.tuple)?;
    let cand_b = pick(&top.tuple, &bottom.tuple)?;

    let run_a = op.asymmetric(0, MAX_ITER)?;
    let run_b = op.asymmetric(1, MAX_ITER)?;
    if !(run_a.converged && run_b.converged) {
        return Err(ZoneError::DemonstrationFailed("asymmetric iterations did not converge".into()));
    }
    let (a, b) = (run_a.tuple, run_b.tuple);
    let residual_a = op.residual(&a)?;
    let residual_b = op.residual(&b)?;
    for (name, r) in [("a", &residual_a), ("b", &residual_b)] {
        if !r.within_band(grid) {
            return Err(ZoneError::DemonstrationFailed(format!(
                "tuple {name} is not a fixed point: {:?} differing cells, up to {} from the boundary",
                r.per_site_symdiff, r.max_boundary_distance
            )));
        }
    }

    let differing = differing_cells(&a, &b);
    let fraction = differing as f64 / grid.len() as f64;
    if fraction < 0.01 {
        return Err(ZoneError::DemonstrationFailed(format!(
            "the two diagrams differ on only {differing} cells ({:.3}%)",
            100.0 * fraction
        )));
    }
    let (mirror_mismatch, mirror_far) = match mirror_c {
        Some(c) => {
            let mirrored = a.mirrored_swapped(c);
            let far = band_violations(&b, &mirrored, grid.cell_diag())?.len();
            (Some(mirrored.symdiff_counts(&b)?.iter().sum()), Some(far))
        }
        None => (None, None),
    };
    if let Some(mirror_far) = mirror_far.filter(|&f| f > 0) {
        return Err(ZoneError::DemonstrationFailed(format!(
            "mirror image of a differs from b on {mirror_far} cells away from the boundary"
        )));
    }
    let summary = NonUniquenessSummary {
        differing_cells: differing,
        differing_fraction: fraction,
        matches_extremal: a == cand_a && b == cand_b,
        mirror_mismatch,
        mirror_far,
        max_ray_slope: None,
        slope_bound: None,
    };
    Ok(NonUniqueness { a, b, residual_a, residual_b, summary })
}

/// The ℓ1 example with sites `(0, 0)` and `(0, 3)`: two distinct zone
/// diagrams, mirror images across `y = 1.5`.
pub fn demonstrate_l1_nonuniqueness(grid: &Grid) -> Result<NonUniqueness> {
    if !covers(grid, Vector2::new(-6.0, -4.0), Vector2::new(6.0, 7.0)) {
        return Err(ZoneError::Domain("grid must cover [-6, 6] x [-4, 7]".into()));
    }
    let spec = NormSpec::L1;
    let sites = SiteSet::new(
        &spec,
        vec![Site::point(Vector2::new(0.0, 0.0)), Site::point(Vector2::new(0.0, 3.0))],
    )?;
    demonstrate_two_sites(&spec, &sites, grid, Some(1.5))
}

/// Least-squares slope of `(x, y)` pairs.
fn fit_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Slopes of the frontier of `region` facing the other site, fitted
/// separately on the columns with `strip < |x| <= reach`. The frontier in a
/// column is the lowest set cell (`from_below`) or the highest.
fn frontier_slopes(region: &RegionBitmap, from_below: bool, strip: f64, reach: f64) -> Vec<f64> {
    let g = *region.grid();
    let mut sides: [Vec<(f64, f64)>; 2] = [Vec::new(), Vec::new()];
    for i in 0..g.nx {
        let x = g.center(i, 0).x;
        if x.abs() <= strip || x.abs() > reach {
            continue;
        }
        let mut rows = (0..g.ny).filter(|&j| region.get(g.index(i, j)));
        let j = if from_below { rows.next() } else { rows.next_back() };
        if let Some(j) = j {
            sides[(x > 0.0) as usize].push((x, g.center(i, j).y));
        }
    }
    sides.iter().filter(|s| s.len() >= 4).map(|s| fit_slope(s)).collect()
}

/// The inflated ℓ1 example with sites `(0, -1)` and `(0, 1)`: two distinct
/// zone diagrams, mirror images across `y = 0`. Outside the strip
/// `|x| <= 2` the boundary rays of the large regions must have slope at
/// most `2C√α`, with `C` from the bisector sweep; the rays are fitted on
/// columns at least twice the site separation away from the window edge.
pub fn demonstrate_inflated_nonuniqueness(alpha: f64, delta: f64, grid: &Grid) -> Result<NonUniqueness> {
    if !(alpha > 0.0 && alpha <= 0.01) {
        return Err(ZoneError::Domain(format!("alpha must lie in (0, 0.01], got {alpha}")));
    }
    if !(delta > 0.0 && delta <= alpha * alpha) {
        return Err(ZoneError::Domain(format!("delta must lie in (0, alpha^2], got {delta}")));
    }
    if grid.nx < 512 || grid.ny < 512 || !covers(grid, Vector2::new(-8.0, -8.0), Vector2::new(8.0, 8.0)) {
        return Err(ZoneError::Domain("grid must have at least 512 x 512 cells over [-8, 8]^2".into()));
    }
    let spec = NormSpec::InflatedL1 { alpha, delta };
    let sites = SiteSet::new(
        &spec,
        vec![Site::point(Vector2::new(0.0, -1.0)), Site::point(Vector2::new(0.0, 1.0))],
    )?;
    let mut demo = demonstrate_two_sites(&spec, &sites, grid, Some(0.0))?;

    let bound = 2.0 * inflated_bisector_constant(alpha, 100.0, 10_000)? * alpha.sqrt();
    let reach = grid.xmax.min(-grid.xmin) - 2.0 * sites.min_separation();
    let mut slopes = frontier_slopes(demo.a.region(1), true, 2.0, reach);
    slopes.extend(frontier_slopes(demo.b.region(0), false, 2.0, reach));
    if slopes.is_empty() {
        return Err(ZoneError::DemonstrationFailed("no boundary rays outside the central strip".into()));
    }
    let steepest = slopes.iter().map(|s| s.abs()).fold(0.0, f64::max);
    demo.summary.max_ray_slope = Some(steepest);
    demo.summary.slope_bound = Some(bound);
    if steepest > bound {
        return Err(ZoneError::DemonstrationFailed(format!(
            "boundary ray slope {steepest} exceeds 2C*sqrt(alpha) = {bound}"
        )));
    }
    Ok(demo)
}
