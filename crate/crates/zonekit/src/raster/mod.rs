//! Raster stand-ins for planar regions.
//!
//! A [`Grid`] discretizes an axis-aligned window into cells; a
//! [`RegionBitmap`] marks a set of cells and a [`RegionTuple`] holds one
//! bitmap per site. All distances between cells are measured between cell
//! centers.

pub mod convexity;
pub mod field;

use serde::{Deserialize, Serialize};

use crate::error::{Result, ZoneError};
use crate::norms::{NormSpec, Vector2};
use crate::sites::{dist_point_to_site, Site, SiteSet};

pub use convexity::convexity_violations;
pub use field::{brute_force_distance_field, distance_field};

/// Axis-aligned window split into `nx * ny` cells. Cell `(i, j)` has linear
/// index `j * nx + i`; `j` grows with `y`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub xmin: f64,
    pub ymin: f64,
    pub xmax: f64,
    pub ymax: f64,
    pub nx: usize,
    pub ny: usize,
}

impl Grid {
    pub fn new(xmin: f64, ymin: f64, xmax: f64, ymax: f64, nx: usize, ny: usize) -> Result<Self> {
        if !(xmin.is_finite() && ymin.is_finite() && xmax.is_finite() && ymax.is_finite()) {
            return Err(ZoneError::Validation("grid window must be finite".into()));
        }
        if !(xmax > xmin && ymax > ymin) {
            return Err(ZoneError::Validation(format!(
                "empty grid window [{xmin}, {xmax}] x [{ymin}, {ymax}]"
            )));
        }
        if nx == 0 || ny == 0 {
            return Err(ZoneError::Validation("grid needs at least one cell per axis".into()));
        }
        Ok(Grid { xmin, ymin, xmax, ymax, nx, ny })
    }

    /// Square window `[-r, r]^2` with `n * n` cells.
    pub fn square(r: f64, n: usize) -> Result<Self> {
        Grid::new(-r, -r, r, r, n, n)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn cell_w(&self) -> f64 {
        (self.xmax - self.xmin) / self.nx as f64
    }

    #[inline]
    pub fn cell_h(&self) -> f64 {
        (self.ymax - self.ymin) / self.ny as f64
    }

    /// Euclidean length of a cell diagonal.
    #[inline]
    pub fn cell_diag(&self) -> f64 {
        self.cell_w().hypot(self.cell_h())
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    #[inline]
    pub fn coords(&self, idx: usize) -> (usize, usize) {
        (idx % self.nx, idx / self.nx)
    }

    #[inline]
    pub fn center(&self, i: usize, j: usize) -> Vector2 {
        Vector2::new(
            self.xmin + (i as f64 + 0.5) * self.cell_w(),
            self.ymin + (j as f64 + 0.5) * self.cell_h(),
        )
    }

    #[inline]
    pub fn center_of(&self, idx: usize) -> Vector2 {
        let (i, j) = self.coords(idx);
        self.center(i, j)
    }

    /// Cell containing `p`, if inside the window.
    pub fn cell_of(&self, p: Vector2) -> Option<usize> {
        let fi = ((p.x - self.xmin) / self.cell_w()).floor();
        let fj = ((p.y - self.ymin) / self.cell_h()).floor();
        if fi < 0.0 || fj < 0.0 || fi >= self.nx as f64 || fj >= self.ny as f64 {
            return None;
        }
        Some(self.index(fi as usize, fj as usize))
    }

    /// In-window 4-neighbors of a cell.
    pub fn neighbors4(&self, idx: usize) -> impl Iterator<Item = usize> {
        let (i, j) = self.coords(idx);
        let (nx, ny) = (self.nx, self.ny);
        [
            (i > 0).then(|| idx - 1),
            (i + 1 < nx).then(|| idx + 1),
            (j > 0).then(|| idx - nx),
            (j + 1 < ny).then(|| idx + nx),
        ]
        .into_iter()
        .flatten()
    }

    /// Smallest coordinate distance from `p` to the window edge.
    pub fn edge_distance(&self, p: Vector2) -> f64 {
        (p.x - self.xmin)
            .min(self.xmax - p.x)
            .min(p.y - self.ymin)
            .min(self.ymax - p.y)
    }

    fn check_same(&self, other: &Grid) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(ZoneError::Validation("regions live on different grids".into()))
        }
    }
}

/// A set of grid cells.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionBitmap {
    grid: Grid,
    bits: Vec<bool>,
}

impl RegionBitmap {
    pub fn empty(grid: Grid) -> Self {
        RegionBitmap {
            grid,
            bits: vec![false; grid.len()],
        }
    }

    pub fn full(grid: Grid) -> Self {
        RegionBitmap {
            grid,
            bits: vec![true; grid.len()],
        }
    }

    pub fn from_bits(grid: Grid, bits: Vec<bool>) -> Result<Self> {
        if bits.len() != grid.len() {
            return Err(ZoneError::Validation(format!(
                "bitmap has {} cells, grid has {}",
                bits.len(),
                grid.len()
            )));
        }
        Ok(RegionBitmap { grid, bits })
    }

    /// Cells whose centers satisfy `pred`.
    pub fn from_predicate<F: Fn(Vector2) -> bool>(grid: Grid, pred: F) -> Self {
        let bits = (0..grid.len()).map(|k| pred(grid.center_of(k))).collect();
        RegionBitmap { grid, bits }
    }

    #[inline]
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    #[inline]
    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    #[inline]
    pub fn get(&self, idx: usize) -> bool {
        self.bits[idx]
    }

    #[inline]
    pub fn set(&mut self, idx: usize, value: bool) {
        self.bits[idx] = value;
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }

    /// Indices of set cells.
    pub fn cells(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.iter().enumerate().filter(|(_, &b)| b).map(|(k, _)| k)
    }

    pub fn complement(&self) -> Self {
        RegionBitmap {
            grid: self.grid,
            bits: self.bits.iter().map(|&b| !b).collect(),
        }
    }

    pub fn union_with(&mut self, other: &RegionBitmap) -> Result<()> {
        self.grid.check_same(&other.grid)?;
        for (a, &b) in self.bits.iter_mut().zip(&other.bits) {
            *a |= b;
        }
        Ok(())
    }

    /// Set cells with at least one in-window 4-neighbor outside the region.
    pub fn boundary_cells(&self) -> Vec<usize> {
        self.cells()
            .filter(|&k| self.grid.neighbors4(k).any(|n| !self.bits[n]))
            .collect()
    }

    /// Reflection across the horizontal line `y = c`: cell `k` is set iff
    /// the cell containing the mirror image of its center is set.
    pub fn mirrored_y(&self, c: f64) -> Self {
        let g = self.grid;
        let bits = (0..g.len())
            .map(|k| {
                let p = g.center_of(k);
                g.cell_of(Vector2::new(p.x, 2.0 * c - p.y))
                    .map(|m| self.bits[m])
                    .unwrap_or(false)
            })
            .collect();
        RegionBitmap { grid: g, bits }
    }
}

/// `a` is a subset of `b`.
pub fn subset(a: &RegionBitmap, b: &RegionBitmap) -> Result<bool> {
    a.grid.check_same(&b.grid)?;
    Ok(a.bits.iter().zip(&b.bits).all(|(&x, &y)| !x || y))
}

/// Number of cells in exactly one of `a`, `b`.
pub fn symdiff_count(a: &RegionBitmap, b: &RegionBitmap) -> Result<usize> {
    a.grid.check_same(&b.grid)?;
    Ok(a.bits.iter().zip(&b.bits).filter(|(x, y)| x != y).count())
}

/// One region per site, all on the same grid.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionTuple {
    grid: Grid,
    regions: Vec<RegionBitmap>,
}

impl RegionTuple {
    pub fn new(regions: Vec<RegionBitmap>) -> Result<Self> {
        let grid = match regions.first() {
            Some(r) => r.grid,
            None => return Err(ZoneError::Validation("region tuple needs at least one region".into())),
        };
        for r in &regions {
            grid.check_same(&r.grid)?;
        }
        Ok(RegionTuple { grid, regions })
    }

    /// `n` copies of the full grid.
    pub fn full(grid: Grid, n: usize) -> Self {
        RegionTuple {
            grid,
            regions: vec![RegionBitmap::full(grid); n],
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn regions(&self) -> &[RegionBitmap] {
        &self.regions
    }

    pub fn region(&self, i: usize) -> &RegionBitmap {
        &self.regions[i]
    }

    pub fn len(&self) -> usize {
        self.regions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.regions.is_empty()
    }

    pub fn into_regions(self) -> Vec<RegionBitmap> {
        self.regions
    }

    /// Per-region cell counts.
    pub fn counts(&self) -> Vec<usize> {
        self.regions.iter().map(|r| r.count()).collect()
    }

    /// Componentwise inclusion (`self ⪯ other`).
    pub fn precedes(&self, other: &RegionTuple) -> Result<bool> {
        self.check_compatible(other)?;
        for (a, b) in self.regions.iter().zip(&other.regions) {
            if !subset(a, b)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Per-region symmetric difference counts.
    pub fn symdiff_counts(&self, other: &RegionTuple) -> Result<Vec<usize>> {
        self.check_compatible(other)?;
        self.regions
            .iter()
            .zip(&other.regions)
            .map(|(a, b)| symdiff_count(a, b))
            .collect()
    }

    /// Mirror across `y = c`, also reversing the order of the regions. For
    /// two sites placed symmetrically about `y = c` this maps a diagram of
    /// the sites to a diagram of the same sites.
    pub fn mirrored_swapped(&self, c: f64) -> RegionTuple {
        RegionTuple {
            grid: self.grid,
            regions: self.regions.iter().rev().map(|r| r.mirrored_y(c)).collect(),
        }
    }

    fn check_compatible(&self, other: &RegionTuple) -> Result<()> {
        self.grid.check_same(&other.grid)?;
        if self.len() != other.len() {
            return Err(ZoneError::Validation(format!(
                "tuples have {} and {} regions",
                self.len(),
                other.len()
            )));
        }
        Ok(())
    }
}

/// `⋃_{j≠i} R_j`.
pub fn union_others(tuple: &RegionTuple, i: usize) -> Result<RegionBitmap> {
    if i >= tuple.len() {
        return Err(ZoneError::Domain(format!("region index {i} out of range")));
    }
    let mut out = RegionBitmap::empty(tuple.grid);
    for (j, r) in tuple.regions.iter().enumerate() {
        if j != i {
            out.union_with(r)?;
        }
    }
    Ok(out)
}

/// Complement of the union of all regions.
pub fn neutral_zone(tuple: &RegionTuple) -> RegionBitmap {
    let g = tuple.grid;
    let bits = (0..g.len())
        .map(|k| !tuple.regions.iter().any(|r| r.bits[k]))
        .collect();
    RegionBitmap { grid: g, bits }
}

/// Cells whose centers lie within half a cell diagonal (Euclidean) of the
/// site.
pub fn rasterize_site(site: &Site, grid: &Grid) -> Result<RegionBitmap> {
    site.validate()?;
    let reach = 0.5 * grid.cell_diag();
    let mut out = RegionBitmap::empty(*grid);
    let boxes = site
        .points
        .iter()
        .map(|&p| (p, p))
        .chain(site.segments.iter().map(|s| {
            (
                Vector2::new(s.0.x.min(s.1.x), s.0.y.min(s.1.y)),
                Vector2::new(s.0.x.max(s.1.x), s.0.y.max(s.1.y)),
            )
        }));
    let (w, h) = (grid.cell_w(), grid.cell_h());
    for (lo, hi) in boxes {
        let i0 = ((lo.x - reach - grid.xmin) / w).floor().max(0.0) as usize;
        let j0 = ((lo.y - reach - grid.ymin) / h).floor().max(0.0) as usize;
        let i1 = (((hi.x + reach - grid.xmin) / w).ceil().max(0.0) as usize).min(grid.nx);
        let j1 = (((hi.y + reach - grid.ymin) / h).ceil().max(0.0) as usize).min(grid.ny);
        for j in j0..j1 {
            for i in i0..i1 {
                let k = grid.index(i, j);
                if !out.bits[k] && dist_point_to_site(&NormSpec::Euclidean, grid.center(i, j), site)? <= reach {
                    out.bits[k] = true;
                }
            }
        }
    }
    if out.is_empty() {
        return Err(ZoneError::Validation("site does not meet the grid window".into()));
    }
    Ok(out)
}

/// Rasterizes every site; the bitmaps must be pairwise disjoint.
pub fn rasterize_sites(sites: &SiteSet, grid: &Grid) -> Result<RegionTuple> {
    let regions = sites
        .sites()
        .iter()
        .enumerate()
        .map(|(i, s)| rasterize_site(s, grid).map_err(|e| ZoneError::Validation(format!("site {i}: {e}"))))
        .collect::<Result<Vec<_>>>()?;
    for i in 0..regions.len() {
        for j in (i + 1)..regions.len() {
            if regions[i].bits.iter().zip(&regions[j].bits).any(|(&a, &b)| a && b) {
                return Err(ZoneError::Validation(format!(
                    "sites {i} and {j} share raster cells; refine the grid"
                )));
            }
        }
    }
    RegionTuple::new(regions)
}
