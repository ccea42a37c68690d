//! The dominance operator and its fixed points.
//!
//! `Dom` maps a tuple of regions `R` to the tuple whose `i`-th entry is the
//! set of cells no farther from site `i` than from `⋃_{j≠i} R_j`. It is
//! antimonotone, so `Dom²` is monotone and iterating it from the sites (or
//! from the full grid) climbs (or descends) to the least (or greatest)
//! fixed point. On a finite grid these chains become stationary after
//! finitely many steps, and convergence is tested by bitmap equality.
//!
//! Distances to the *own* site are exact (point/segment geometry); distances
//! to the other regions are cell-center to cell-center. Cells of the site's
//! own raster always belong to its dominance region, mirroring the fact
//! that a site lies in its own dominance region over any set.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, ZoneError};
use crate::norms::NormSpec;
use crate::raster::field::TargetIndex;
use crate::raster::{rasterize_site, rasterize_sites, union_others, Grid, RegionBitmap, RegionTuple};
use crate::sites::{nearest_point, Site, SiteSet};

/// Width, in cell diagonals, of the boundary band within which raster
/// discrepancies are tolerated.
pub const BOUNDARY_BAND_CELLS: f64 = 2.0;

/// Exact distance from every cell center to `site`.
pub fn site_distance_field(spec: &NormSpec, grid: &Grid, site: &Site) -> Vec<f64> {
    (0..grid.len())
        .into_par_iter()
        .map(|k| nearest_point(spec, grid.center_of(k), site).1)
        .collect()
}

fn dominance_bits(
    spec: &NormSpec,
    site_field: &[f64],
    site_raster: Option<&RegionBitmap>,
    obstacle: &RegionBitmap,
) -> RegionBitmap {
    let g = *obstacle.grid();
    if obstacle.is_empty() {
        return RegionBitmap::full(g);
    }
    let reach = TargetIndex::new(obstacle).query(spec, |k| site_field[k]);
    let bits = (0..g.len())
        .map(|k| site_raster.is_some_and(|r| r.get(k)) || site_field[k] <= reach[k])
        .collect();
    RegionBitmap::from_bits(g, bits).expect("bitmap sized from grid")
}

/// `dom(site, obstacle)`: cells whose distance to `site` does not exceed the
/// distance to the nearest obstacle cell. An empty obstacle gives the full
/// grid.
pub fn dominance_region(
    spec: &NormSpec,
    grid: &Grid,
    site: &Site,
    obstacle: &RegionBitmap,
) -> Result<RegionBitmap> {
    site.validate()?;
    if obstacle.grid() != grid {
        return Err(ZoneError::Validation("obstacle is on a different grid".into()));
    }
    let field = site_distance_field(spec, grid, site);
    let raster = rasterize_site(site, grid).ok();
    Ok(dominance_bits(spec, &field, raster.as_ref(), obstacle))
}

/// `Dom` for a fixed site set on a fixed grid, with the per-site distance
/// fields computed once.
pub struct DomOperator {
    spec: NormSpec,
    grid: Grid,
    sites: SiteSet,
    site_fields: Vec<Vec<f64>>,
    site_rasters: RegionTuple,
}

impl DomOperator {
    pub fn new(spec: &NormSpec, sites: &SiteSet, grid: &Grid) -> Result<Self> {
        spec.validate()?;
        let site_rasters = rasterize_sites(sites, grid)?;
        let site_fields = sites
            .sites()
            .iter()
            .map(|s| site_distance_field(spec, grid, s))
            .collect();
        Ok(DomOperator {
            spec: *spec,
            grid: *grid,
            sites: sites.clone(),
            site_fields,
            site_rasters,
        })
    }

    pub fn spec(&self) -> &NormSpec {
        &self.spec
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn sites(&self) -> &SiteSet {
        &self.sites
    }

    /// Exact distances from cell centers to site `i`.
    pub fn site_field(&self, i: usize) -> &[f64] {
        &self.site_fields[i]
    }

    /// The rasterized sites, `R⁽⁰⁾` of the inner chain.
    pub fn site_rasters(&self) -> &RegionTuple {
        &self.site_rasters
    }

    pub fn n(&self) -> usize {
        self.sites.len()
    }

    /// `dom(P_i, obstacle)`.
    pub fn region(&self, i: usize, obstacle: &RegionBitmap) -> RegionBitmap {
        dominance_bits(&self.spec, &self.site_fields[i], Some(self.site_rasters.region(i)), obstacle)
    }

    /// `Dom(tuple)`.
    pub fn apply(&self, tuple: &RegionTuple) -> Result<RegionTuple> {
        if tuple.grid() != &self.grid {
            return Err(ZoneError::Validation("tuple is on a different grid".into()));
        }
        if tuple.len() != self.n() {
            return Err(ZoneError::Validation(format!(
                "tuple has {} regions for {} sites",
                tuple.len(),
                self.n()
            )));
        }
        let regions = (0..self.n())
            .map(|i| union_others(tuple, i).map(|obstacle| self.region(i, &obstacle)))
            .collect::<Result<Vec<_>>>()?;
        RegionTuple::new(regions)
    }

    /// Classical Voronoi tuple: `Dom` of the rasterized sites.
    pub fn voronoi(&self) -> Result<RegionTuple> {
        self.apply(&self.site_rasters)
    }

    /// Paired inner/outer iteration: `R⁽⁰⁾ = P`, `S⁽⁰⁾ = Dom R⁽⁰⁾`,
    /// `R⁽ᵏ⁾ = Dom S⁽ᵏ⁻¹⁾`, `S⁽ᵏ⁾ = Dom R⁽ᵏ⁻¹⁾`, until both chains repeat or
    /// `max_iter` steps have run.
    ///
    /// The chain order `R⁽ᵏ⁻¹⁾ ⪯ R⁽ᵏ⁾ ⪯ S⁽ᵏ⁾ ⪯ S⁽ᵏ⁻¹⁾` is checked at every
    /// step; a violation is reported as [`ZoneError::Internal`].
    pub fn double_zone(&self, max_iter: usize) -> Result<DiagramState> {
        if max_iter == 0 {
            return Err(ZoneError::Domain("max_iter must be at least 1".into()));
        }
        let mut memo = Memo::default();
        let mut r = self.site_rasters.clone();
        let mut s = memo.apply(self, &r)?;
        if !r.precedes(&s)? {
            return Err(ZoneError::Internal("rasterized sites are not inside the Voronoi tuple".into()));
        }
        let mut history = vec![IterationMetrics::new(0, &r, &s)?];
        let mut converged = false;
        let mut k = 0;
        while k < max_iter {
            k += 1;
            let r_next = memo.apply(self, &s)?;
            let s_next = memo.apply(self, &r)?;
            let ordered = r.precedes(&r_next)? && r_next.precedes(&s_next)? && s_next.precedes(&s)?;
            if !ordered {
                return Err(ZoneError::Internal(format!(
                    "monotone chains broken at step {k}; the distance computation is inconsistent"
                )));
            }
            history.push(IterationMetrics::new(k, &r_next, &s_next)?);
            let stationary = r_next == r && s_next == s;
            r = r_next;
            s = s_next;
            if stationary {
                converged = true;
                break;
            }
        }
        Ok(DiagramState {
            r,
            s,
            iterations: k,
            history,
            converged,
        })
    }

    /// Least (`Bottom`) or greatest (`Top`) fixed point of `Dom²`, iterated
    /// from the rasterized sites or from the full grid.
    pub fn extremal(&self, seed: ExtremalSeed, max_iter: usize) -> Result<FixedPointRun> {
        if max_iter == 0 {
            return Err(ZoneError::Domain("max_iter must be at least 1".into()));
        }
        let mut d = match seed {
            ExtremalSeed::Bottom => self.site_rasters.clone(),
            ExtremalSeed::Top => RegionTuple::full(self.grid, self.n()),
        };
        for k in 1..=max_iter {
            let next = self.apply(&self.apply(&d)?)?;
            let monotone = match seed {
                ExtremalSeed::Bottom => d.precedes(&next)?,
                ExtremalSeed::Top => next.precedes(&d)?,
            };
            if !monotone {
                return Err(ZoneError::Internal(format!("Dom² chain not monotone at step {k}")));
            }
            if next == d {
                return Ok(FixedPointRun { tuple: d, iterations: k, converged: true });
            }
            d = next;
        }
        Ok(FixedPointRun { tuple: d, iterations: max_iter, converged: false })
    }

    /// Iterates `Dom` from the tuple whose region `favored` is its site
    /// raster and whose other regions are the full grid.
    ///
    /// For two sites `Dom` is monotone in the mixed order (region `favored`
    /// by inclusion, the other by reverse inclusion), and this seed is the
    /// bottom of that order, so the iterates climb to a genuine `Dom` fixed
    /// point; the mixed monotonicity is checked at each step. For more sites
    /// the iteration is a heuristic and may stop unconverged.
    pub fn asymmetric(&self, favored: usize, max_iter: usize) -> Result<FixedPointRun> {
        if favored >= self.n() {
            return Err(ZoneError::Domain(format!("site index {favored} out of range")));
        }
        let mut regions = RegionTuple::full(self.grid, self.n()).into_regions();
        regions[favored] = self.site_rasters.region(favored).clone();
        let mut t = RegionTuple::new(regions)?;
        for k in 1..=max_iter {
            let next = self.apply(&t)?;
            if next == t {
                return Ok(FixedPointRun { tuple: t, iterations: k, converged: true });
            }
            if self.n() == 2 {
                let other = 1 - favored;
                let ok = crate::raster::subset(t.region(favored), next.region(favored))?
                    && crate::raster::subset(next.region(other), t.region(other))?;
                if !ok {
                    return Err(ZoneError::Internal(format!(
                        "asymmetric iteration left the mixed order at step {k}"
                    )));
                }
            }
            t = next;
        }
        Ok(FixedPointRun { tuple: t, iterations: max_iter, converged: false })
    }

    /// Compares `tuple` with `Dom(tuple)`.
    pub fn residual(&self, tuple: &RegionTuple) -> Result<ResidualReport> {
        let image = self.apply(tuple)?;
        let per_site_symdiff = tuple.symdiff_counts(&image)?;
        let mut max_boundary_distance: f64 = 0.0;
        for (i, &count) in per_site_symdiff.iter().enumerate() {
            if count == 0 {
                continue;
            }
            let region = tuple.region(i);
            let other = image.region(i);
            let cells: Vec<usize> = (0..self.grid.len()).filter(|&k| region.get(k) != other.get(k)).collect();
            for d in boundary_distances(region, &cells) {
                max_boundary_distance = max_boundary_distance.max(d);
            }
        }
        Ok(ResidualReport {
            per_site_symdiff,
            max_boundary_distance,
        })
    }
}

/// Euclidean distance from each listed cell to the boundary of `region`:
/// the distance to the region for cells outside it, to the complement for
/// cells inside. Infinite when the relevant set is empty.
pub fn boundary_distances(region: &RegionBitmap, cells: &[usize]) -> Vec<f64> {
    if cells.is_empty() {
        return Vec::new();
    }
    let e = NormSpec::Euclidean;
    let complement = region.complement();
    let to_region = TargetIndex::new(region).query(&e, |_| f64::INFINITY);
    let to_outside = TargetIndex::new(&complement).query(&e, |_| f64::INFINITY);
    cells
        .iter()
        .map(|&k| if region.get(k) { to_outside[k] } else { to_region[k] })
        .collect()
}

/// Cells where the per-site regions of `a` and `b` differ by more than
/// `band` from the boundary of the corresponding region of `a`, as
/// `(site, cell)` pairs.
pub fn band_violations(a: &RegionTuple, b: &RegionTuple, band: f64) -> Result<Vec<(usize, usize)>> {
    let counts = a.symdiff_counts(b)?;
    let g = *a.grid();
    let mut out = Vec::new();
    for (i, &c) in counts.iter().enumerate() {
        if c == 0 {
            continue;
        }
        let (ra, rb) = (a.region(i), b.region(i));
        let cells: Vec<usize> = (0..g.len()).filter(|&k| ra.get(k) != rb.get(k)).collect();
        for (k, d) in cells.iter().zip(boundary_distances(ra, &cells)) {
            if d > band {
                out.push((i, *k));
            }
        }
    }
    Ok(out)
}

/// Remembers recent `Dom` evaluations. The paired iteration asks for the
/// same image twice whenever one of the chains pauses.
#[derive(Default)]
struct Memo {
    entries: Vec<(RegionTuple, RegionTuple)>,
}

impl Memo {
    const CAPACITY: usize = 4;

    fn apply(&mut self, op: &DomOperator, t: &RegionTuple) -> Result<RegionTuple> {
        if let Some((_, image)) = self.entries.iter().find(|(input, _)| input == t) {
            return Ok(image.clone());
        }
        let image = op.apply(t)?;
        if self.entries.len() == Self::CAPACITY {
            self.entries.remove(0);
        }
        self.entries.push((t.clone(), image.clone()));
        Ok(image)
    }
}

/// Starting point for [`DomOperator::extremal`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtremalSeed {
    Bottom,
    Top,
}

/// Result of a fixed-point iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct FixedPointRun {
    pub tuple: RegionTuple,
    pub iterations: usize,
    pub converged: bool,
}

/// Per-step record of the paired iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationMetrics {
    pub k: usize,
    pub r_counts: Vec<usize>,
    pub s_counts: Vec<usize>,
    /// Total cells where `R⁽ᵏ⁾` and `S⁽ᵏ⁾` differ, summed over sites.
    pub symdiff: usize,
}

impl IterationMetrics {
    fn new(k: usize, r: &RegionTuple, s: &RegionTuple) -> Result<Self> {
        Ok(IterationMetrics {
            k,
            r_counts: r.counts(),
            s_counts: s.counts(),
            symdiff: r.symdiff_counts(s)?.iter().sum(),
        })
    }
}

/// Outcome of the paired inner/outer iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagramState {
    /// Limit of the increasing inner chain.
    pub r: RegionTuple,
    /// Limit of the decreasing outer chain.
    pub s: RegionTuple,
    pub iterations: usize,
    pub history: Vec<IterationMetrics>,
    /// Both chains reached bitmap stationarity within the step budget.
    pub converged: bool,
}

impl DiagramState {
    /// Total number of cells where `R` and `S` differ.
    pub fn symdiff(&self) -> usize {
        self.history.last().map(|m| m.symdiff).unwrap_or(0)
    }
}

/// How far a tuple is from being a fixed point of `Dom`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    /// Cells where region `i` and `Dom(tuple)_i` differ.
    pub per_site_symdiff: Vec<usize>,
    /// Largest Euclidean distance from a differing cell to the boundary of
    /// its region.
    pub max_boundary_distance: f64,
}

impl ResidualReport {
    pub fn total(&self) -> usize {
        self.per_site_symdiff.iter().sum()
    }

    pub fn is_exact(&self) -> bool {
        self.total() == 0
    }

    /// Accepted as a raster zone diagram: every discrepancy lies within
    /// [`BOUNDARY_BAND_CELLS`] cell diagonals of a region boundary.
    pub fn within_band(&self, grid: &Grid) -> bool {
        self.is_exact() || self.max_boundary_distance <= BOUNDARY_BAND_CELLS * grid.cell_diag()
    }
}

/// `Dom(tuple)` for the given sites.
pub fn dom_operator(spec: &NormSpec, sites: &SiteSet, tuple: &RegionTuple, grid: &Grid) -> Result<RegionTuple> {
    DomOperator::new(spec, sites, grid)?.apply(tuple)
}

/// Raster Voronoi diagram of the sites.
pub fn voronoi(spec: &NormSpec, sites: &SiteSet, grid: &Grid) -> Result<RegionTuple> {
    DomOperator::new(spec, sites, grid)?.voronoi()
}

/// Paired inner/outer iteration; see [`DomOperator::double_zone`].
pub fn double_zone_iterate(spec: &NormSpec, sites: &SiteSet, grid: &Grid, max_iter: usize) -> Result<DiagramState> {
    DomOperator::new(spec, sites, grid)?.double_zone(max_iter)
}

/// Compares `tuple` with `Dom(tuple)`.
pub fn fixed_point_residual(spec: &NormSpec, sites: &SiteSet, tuple: &RegionTuple, grid: &Grid) -> Result<ResidualReport> {
    DomOperator::new(spec, sites, grid)?.residual(tuple)
}

/// Least or greatest fixed point of `Dom²`; see [`DomOperator::extremal`].
pub fn extremal_fixed_points(
    spec: &NormSpec,
    sites: &SiteSet,
    grid: &Grid,
    seed: ExtremalSeed,
    max_iter: usize,
) -> Result<FixedPointRun> {
    DomOperator::new(spec, sites, grid)?.extremal(seed, max_iter)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::norms::Vector2;
    use crate::raster::neutral_zone;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn v(x: f64, y: f64) -> Vector2 {
        Vector2::new(x, y)
    }

    fn points(spec: &NormSpec, pts: &[(f64, f64)]) -> SiteSet {
        SiteSet::new(spec, pts.iter().map(|&(x, y)| Site::point(v(x, y))).collect()).unwrap()
    }

    #[test]
    fn empty_obstacle_gives_full_grid() {
        let g = Grid::square(2.0, 32).unwrap();
        let r = dominance_region(&NormSpec::Lp { p: 3.0 }, &g, &Site::point(v(0.5, 0.5)), &RegionBitmap::empty(g)).unwrap();
        assert_eq!(r.count(), g.len());
    }

    #[test]
    fn euclidean_point_vs_cell_is_half_plane() {
        let g = Grid::square(2.0, 64).unwrap();
        let q = g.index(48, 40);
        let mut obstacle = RegionBitmap::empty(g);
        obstacle.set(q, true);
        let p = v(-0.5, -0.3);
        let r = dominance_region(&NormSpec::Euclidean, &g, &Site::point(p), &obstacle).unwrap();
        let qc = g.center_of(q);
        let (mid, dir) = ((p + qc) * 0.5, qc - p);
        let band = g.cell_diag();
        for k in 0..g.len() {
            let side = (g.center_of(k) - mid).dot(dir) / dir.length();
            if side < -band {
                assert!(r.get(k));
            } else if side > band {
                assert!(!r.get(k));
            }
        }
    }

    #[test]
    fn voronoi_matches_nearest_site_labels() {
        let spec = NormSpec::L1;
        let sites = points(&spec, &[(-1.3, 0.4), (0.9, 1.1), (0.2, -1.45)]);
        let g = Grid::square(2.0, 64).unwrap();
        let op = DomOperator::new(&spec, &sites, &g).unwrap();
        let vor = op.voronoi().unwrap();
        let rasters = op.site_rasters();
        let centers: Vec<Vec<Vector2>> = rasters.regions().iter().map(|r| r.cells().map(|k| g.center_of(k)).collect()).collect();
        for k in 0..g.len() {
            let c = g.center_of(k);
            for i in 0..3 {
                let own = op.site_field(i)[k];
                let others = (0..3)
                    .filter(|&j| j != i)
                    .flat_map(|j| centers[j].iter())
                    .map(|&t| spec.dist(c, t))
                    .fold(f64::INFINITY, f64::min);
                let expected = rasters.region(i).get(k) || own <= others;
                assert_eq!(vor.region(i).get(k), expected);
            }
        }
    }

    #[test]
    fn single_site_everything() {
        let spec = NormSpec::Euclidean;
        let sites = points(&spec, &[(0.1, 0.2)]);
        let g = Grid::square(1.0, 32).unwrap();
        assert_eq!(voronoi(&spec, &sites, &g).unwrap().region(0).count(), g.len());
        let st = double_zone_iterate(&spec, &sites, &g, 10).unwrap();
        assert!(st.converged);
        assert_eq!(st.r.region(0).count(), g.len());
        assert_eq!(st.s.region(0).count(), g.len());
        let top = extremal_fixed_points(&spec, &sites, &g, ExtremalSeed::Top, 10).unwrap();
        assert_eq!(top.tuple.region(0).count(), g.len());
    }

    #[test]
    fn dom_of_full_tuple_is_site_raster() {
        let spec = NormSpec::Euclidean;
        let sites = points(&spec, &[(-1.0, 0.0), (1.0, 0.0)]);
        let g = Grid::square(2.0, 32).unwrap();
        let op = DomOperator::new(&spec, &sites, &g).unwrap();
        let image = op.apply(&RegionTuple::full(g, 2)).unwrap();
        assert_eq!(&image, op.site_rasters());
    }

    #[test]
    fn antimonotone_on_random_tuples() {
        let g = Grid::square(2.0, 40).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for spec in [NormSpec::Euclidean, NormSpec::Lp { p: 4.0 }, NormSpec::L1, NormSpec::inflated(0.1)] {
            let sites = points(&spec, &[(-1.0, -0.5), (1.2, 0.3), (0.0, 1.4)]);
            let op = DomOperator::new(&spec, &sites, &g).unwrap();
            for _ in 0..25 {
                let small: Vec<RegionBitmap> = (0..3)
                    .map(|_| {
                        let bits = (0..g.len()).map(|_| rng.gen_bool(0.05)).collect();
                        RegionBitmap::from_bits(g, bits).unwrap()
                    })
                    .collect();
                let big: Vec<RegionBitmap> = small
                    .iter()
                    .map(|r| {
                        let bits = r.bits().iter().map(|&b| b || rng.gen_bool(0.1)).collect();
                        RegionBitmap::from_bits(g, bits).unwrap()
                    })
                    .collect();
                let a = RegionTuple::new(small).unwrap();
                let b = RegionTuple::new(big).unwrap();
                assert!(a.precedes(&b).unwrap());
                assert!(op.apply(&b).unwrap().precedes(&op.apply(&a).unwrap()).unwrap(), "{spec}");
            }
        }
    }

    #[test]
    fn euclidean_pair_converges_and_extremes_agree() {
        let spec = NormSpec::Euclidean;
        let sites = points(&spec, &[(-1.5, 0.0), (1.5, 0.0)]);
        let g = Grid::square(4.0, 64).unwrap();
        let op = DomOperator::new(&spec, &sites, &g).unwrap();
        let st = op.double_zone(200).unwrap();
        assert!(st.converged);
        for w in st.history.windows(2) {
            for i in 0..2 {
                assert!(w[0].r_counts[i] <= w[1].r_counts[i]);
                assert!(w[0].s_counts[i] >= w[1].s_counts[i]);
            }
        }
        let bottom = op.extremal(ExtremalSeed::Bottom, 200).unwrap();
        let top = op.extremal(ExtremalSeed::Top, 200).unwrap();
        assert_eq!(bottom.tuple, st.r);
        assert_eq!(top.tuple, st.s);
        assert_eq!(op.apply(&st.r).unwrap(), st.s);
        assert_eq!(op.apply(&st.s).unwrap(), st.r);
        // a zone diagram leaves a neutral zone between the regions
        assert!(neutral_zone(&st.r).count() > 0);
    }

    #[test]
    fn voronoi_is_not_a_zone_diagram() {
        let spec = NormSpec::Euclidean;
        let sites = points(&spec, &[(-1.5, 0.0), (1.5, 0.0)]);
        let g = Grid::square(4.0, 64).unwrap();
        let op = DomOperator::new(&spec, &sites, &g).unwrap();
        let res = op.residual(&op.voronoi().unwrap()).unwrap();
        assert!(res.total() > 0 && !res.within_band(&g));
        let res = op.residual(&RegionTuple::full(g, 2)).unwrap();
        assert!(res.total() > g.len());
    }

    #[test]
    fn grid_mismatch_rejected() {
        let spec = NormSpec::Euclidean;
        let sites = points(&spec, &[(-1.0, 0.0), (1.0, 0.0)]);
        let g = Grid::square(2.0, 32).unwrap();
        let other = Grid::square(2.0, 16).unwrap();
        let op = DomOperator::new(&spec, &sites, &g).unwrap();
        assert!(matches!(op.apply(&RegionTuple::full(other, 2)), Err(ZoneError::Validation(_))));
    }
}
