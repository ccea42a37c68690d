//! File formats: binary graymaps, SVG contour drawings and metric tables.
//!
//! Graymaps are written top row first, so `y` grows upward in viewers.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::dominance::IterationMetrics;
use crate::norms::Vector2;
use crate::raster::{Grid, RegionBitmap, RegionTuple};
use crate::sites::SiteSet;

fn pgm(grid: &Grid, value: impl Fn(usize) -> u8) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", grid.nx, grid.ny).into_bytes();
    out.reserve(grid.len());
    for j in (0..grid.ny).rev() {
        for i in 0..grid.nx {
            out.push(value(grid.index(i, j)));
        }
    }
    out
}

/// P5 graymap of one region: 255 inside, 0 outside.
pub fn region_pgm(region: &RegionBitmap) -> Vec<u8> {
    pgm(region.grid(), |k| if region.get(k) { 255 } else { 0 })
}

/// P5 label map: `i + 1` where region `i` is the lowest-indexed region
/// containing the cell, 0 in the neutral zone.
pub fn label_map_pgm(tuple: &RegionTuple) -> Vec<u8> {
    pgm(tuple.grid(), |k| {
        tuple
            .regions()
            .iter()
            .position(|r| r.get(k))
            .map(|i| (i + 1).min(255) as u8)
            .unwrap_or(0)
    })
}

/// CSV with one row per iteration: `k`, `R_i` counts, `S_i` counts and the
/// total symmetric difference.
pub fn metrics_csv(history: &[IterationMetrics]) -> String {
    let n = history.first().map(|m| m.r_counts.len()).unwrap_or(0);
    let mut out = String::from("k");
    for i in 0..n {
        let _ = write!(out, ",R_{i}");
    }
    for i in 0..n {
        let _ = write!(out, ",S_{i}");
    }
    out.push_str(",symdiff\n");
    for m in history {
        let _ = write!(out, "{}", m.k);
        for c in m.r_counts.iter().chain(&m.s_counts) {
            let _ = write!(out, ",{c}");
        }
        let _ = writeln!(out, ",{}", m.symdiff);
    }
    out
}

/// Closed boundary curves of `region` in world coordinates.
///
/// Marching squares over cell centers, with a one-cell empty border so
/// every curve closes; curves on the window edge run along the window
/// frame. Saddle squares are split so that diagonal cells stay separate.
/// The output order depends only on the bitmap.
pub fn contours(region: &RegionBitmap) -> Vec<Vec<Vector2>> {
    let g = *region.grid();
    let (w, h) = (g.nx + 2, g.ny + 2);
    let inside = |i: usize, j: usize| -> bool {
        i >= 1 && j >= 1 && i <= g.nx && j <= g.ny && region.get(g.index(i - 1, j - 1))
    };
    // Crossing points live on lattice edges: (i, j, 0) joins (i,j)-(i+1,j),
    // (i, j, 1) joins (i,j)-(i,j+1).
    type Edge = (usize, usize, u8);
    let point = |e: Edge| -> Vector2 {
        let (i, j, d) = e;
        let (fi, fj) = if d == 0 { (i as f64 + 0.5, j as f64) } else { (i as f64, j as f64 + 0.5) };
        Vector2::new(g.xmin + (fi - 0.5) * g.cell_w(), g.ymin + (fj - 0.5) * g.cell_h())
    };

    let mut segments: Vec<(Edge, Edge)> = Vec::new();
    for j in 0..h - 1 {
        for i in 0..w - 1 {
            let (a, b, c, d) = (inside(i, j), inside(i + 1, j), inside(i + 1, j + 1), inside(i, j + 1));
            let case = (a as u8) | (b as u8) << 1 | (c as u8) << 2 | (d as u8) << 3;
            let bottom = (i, j, 0);
            let right = (i + 1, j, 1);
            let top = (i, j + 1, 0);
            let left = (i, j, 1);
            // Segments keep the inside on their right.
            let segs: &[(Edge, Edge)] = match case {
                0 | 15 => &[],
                1 => &[(left, bottom)],
                2 => &[(bottom, right)],
                3 => &[(left, right)],
                4 => &[(right, top)],
                5 => &[(left, bottom), (right, top)],
                6 => &[(bottom, top)],
                7 => &[(left, top)],
                8 => &[(top, left)],
                9 => &[(top, bottom)],
                10 => &[(bottom, right), (top, left)],
                11 => &[(top, right)],
                12 => &[(right, left)],
                13 => &[(right, bottom)],
                14 => &[(bottom, left)],
                _ => unreachable!(),
            };
            segments.extend_from_slice(segs);
        }
    }

    let mut next: HashMap<Edge, usize> = HashMap::with_capacity(segments.len());
    for (s, &(from, _)) in segments.iter().enumerate() {
        next.insert(from, s);
    }
    let mut used = vec![false; segments.len()];
    let mut out = Vec::new();
    for start in 0..segments.len() {
        if used[start] {
            continue;
        }
        let mut ring = Vec::new();
        let mut s = start;
        while !used[s] {
            used[s] = true;
            ring.push(point(segments[s].0));
            match next.get(&segments[s].1) {
                Some(&t) => s = t,
                None => break,
            }
        }
        out.push(ring);
    }
    out
}

const PALETTE: [&str; 8] = [
    "#4e79a7", "#f28e2b", "#59a14f", "#e15759", "#76b7b2", "#edc948", "#b07aa1", "#9c755f",
];

/// SVG 1.1 drawing of a region tuple: one filled path per region (boundary
/// curves from [`contours`]), the sites on top, the neutral zone left
/// blank.
pub fn svg(tuple: &RegionTuple, sites: Option<&SiteSet>) -> String {
    let g = *tuple.grid();
    let (ww, wh) = (g.xmax - g.xmin, g.ymax - g.ymin);
    let scale = 800.0 / ww.max(wh);
    let (pw, ph) = (ww * scale, wh * scale);
    let px = |p: Vector2| ((p.x - g.xmin) * scale, (g.ymax - p.y) * scale);

    let mut out = String::new();
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{pw:.0}" height="{ph:.0}" viewBox="0 0 {pw:.3} {ph:.3}">"#
    );
    let _ = writeln!(out, r#"<rect width="{pw:.3}" height="{ph:.3}" fill="white"/>"#);
    for (i, r) in tuple.regions().iter().enumerate() {
        let rings = contours(r);
        if rings.is_empty() {
            continue;
        }
        let color = PALETTE[i % PALETTE.len()];
        let mut d = String::new();
        for ring in &rings {
            for (m, &p) in ring.iter().enumerate() {
                let (x, y) = px(p);
                let _ = write!(d, "{}{x:.3} {y:.3} ", if m == 0 { "M" } else { "L" });
            }
            d.push_str("Z ");
        }
        let _ = writeln!(
            out,
            r#"<path id="region-{i}" d="{}" fill="{color}" fill-opacity="0.45" fill-rule="evenodd" stroke="{color}" stroke-width="1"/>"#,
            d.trim_end()
        );
    }
    if let Some(sites) = sites {
        for site in sites.sites() {
            for &p in &site.points {
                let (x, y) = px(p);
                let _ = writeln!(out, r#"<circle cx="{x:.3}" cy="{y:.3}" r="3" fill="black"/>"#);
            }
            for s in &site.segments {
                let ((x1, y1), (x2, y2)) = (px(s.0), px(s.1));
                let _ = writeln!(
                    out,
                    r#"<line x1="{x1:.3}" y1="{y1:.3}" x2="{x2:.3}" y2="{y2:.3}" stroke="black" stroke-width="2.5"/>"#
                );
            }
        }
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Grid {
        Grid::new(0.0, 0.0, 8.0, 4.0, 8, 4).unwrap()
    }

    #[test]
    fn pgm_layout() {
        let g = grid();
        let mut r = RegionBitmap::empty(g);
        r.set(g.index(0, 0), true);
        let bytes = region_pgm(&r);
        let header = b"P5\n8 4\n255\n";
        assert_eq!(&bytes[..header.len()], header);
        let body = &bytes[header.len()..];
        assert_eq!(body.len(), 32);
        // bottom-left cell is the first pixel of the last row
        assert_eq!(body[24], 255);
        assert_eq!(body.iter().filter(|&&b| b == 255).count(), 1);
    }

    #[test]
    fn label_map_lowest_index_wins() {
        let g = grid();
        let a = RegionBitmap::from_predicate(g, |p| p.x < 5.0);
        let b = RegionBitmap::from_predicate(g, |p| p.x > 3.0 && p.x < 7.0);
        let t = RegionTuple::new(vec![a, b]).unwrap();
        let bytes = label_map_pgm(&t);
        let row: Vec<u8> = bytes[bytes.len() - 8..].to_vec();
        assert_eq!(row, vec![1, 1, 1, 1, 1, 2, 2, 0]);
    }

    #[test]
    fn full_region_traces_the_frame() {
        let g = grid();
        let rings = contours(&RegionBitmap::full(g));
        assert_eq!(rings.len(), 1);
        for p in &rings[0] {
            assert!(g.edge_distance(*p) < 1e-12, "{p:?}");
        }
        let xs: Vec<f64> = rings[0].iter().map(|p| p.x).collect();
        assert_eq!(xs.iter().cloned().fold(f64::INFINITY, f64::min), 0.0);
        assert_eq!(xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max), 8.0);
    }

    #[test]
    fn empty_region_has_no_contour() {
        assert!(contours(&RegionBitmap::empty(grid())).is_empty());
        let t = RegionTuple::new(vec![RegionBitmap::empty(grid())]).unwrap();
        assert!(!svg(&t, None).contains("<path"));
    }

    #[test]
    fn ring_and_diagonal_counts() {
        let g = Grid::square(1.0, 12).unwrap();
        let annulus = RegionBitmap::from_predicate(g, |p| {
            let r = p.length();
            r > 0.3 && r < 0.8
        });
        assert_eq!(contours(&annulus).len(), 2);
        let mut diag = RegionBitmap::empty(g);
        diag.set(g.index(3, 3), true);
        diag.set(g.index(4, 4), true);
        assert_eq!(contours(&diag).len(), 2);
    }

    #[test]
    fn metrics_table() {
        let h = vec![IterationMetrics { k: 0, r_counts: vec![1, 2], s_counts: vec![5, 6], symdiff: 8 }];
        assert_eq!(metrics_csv(&h), "k,R_0,R_1,S_0,S_1,symdiff\n0,1,2,5,6,8\n");
    }
}
