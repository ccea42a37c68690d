use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::norms::{NormSpec, Vector2};
use crate::raster::field::TargetIndex;
use crate::raster::RegionBitmap;

/// Midpoint-convexity test on a raster region.
///
/// Draws `n_pairs` pairs of set cells (seeded) and returns the pairs whose
/// midpoint lands in an unset cell lying more than `band` (Euclidean) away
/// from the region. An empty result means no violation was detected at this
/// resolution.
pub fn convexity_violations(
    region: &RegionBitmap,
    n_pairs: usize,
    band: f64,
    seed: u64,
) -> Vec<(Vector2, Vector2)> {
    let g = *region.grid();
    let cells: Vec<usize> = region.cells().collect();
    if cells.is_empty() {
        return Vec::new();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let index = TargetIndex::new(region);
    let mut field: Option<Vec<f64>> = None;
    let mut out = Vec::new();
    for _ in 0..n_pairs {
        let a = g.center_of(cells[rng.gen_range(0..cells.len())]);
        let b = g.center_of(cells[rng.gen_range(0..cells.len())]);
        let Some(m) = g.cell_of((a + b) * 0.5) else {
            continue;
        };
        if region.get(m) {
            continue;
        }
        let f = field.get_or_insert_with(|| index.query(&NormSpec::Euclidean, |_| f64::INFINITY));
        if f[m] > band {
            out.push((a, b));
        }
    }
    out
}
