//! Disk-shaped footprints (sensor field of view, retardant drop) and fast
//! footprint sums over per-zone value maps.
//!
//! A disk is stored as one column half-width per row offset, so a footprint
//! is a stack of contiguous row segments. Sums use per-row prefix sums, which
//! makes scoring every candidate center O(|Z| * rows-per-disk).

use crate::region::{RegionGrid, ZoneId, RADIUS_EPS};

#[derive(Clone, Debug, PartialEq)]
pub struct Disk {
    radius_cells: usize,
    /// `half[dr + radius_cells]` is the largest column offset in row `dr`.
    half: Vec<usize>,
}

impl Disk {
    /// Disk of all zone centers within `radius_m`, using the same boundary
    /// rule as [`RegionGrid::neighbors_within`].
    pub fn new(radius_m: f64, zone_size_m: f64) -> Self {
        let within = |dr: usize, dc: usize| ((dr * dr + dc * dc) as f64).sqrt() * zone_size_m <= radius_m + RADIUS_EPS;
        let mut radius_cells = 0;
        while within(radius_cells + 1, 0) {
            radius_cells += 1;
        }
        let mut half_pos = Vec::with_capacity(radius_cells + 1);
        for dr in 0..=radius_cells {
            let mut h = 0;
            while within(dr, h + 1) {
                h += 1;
            }
            half_pos.push(h);
        }
        let half = (0..=2 * radius_cells)
            .map(|i| half_pos[(i as isize - radius_cells as isize).unsigned_abs()])
            .collect();
        Self { radius_cells, half }
    }

    pub fn for_grid(grid: &RegionGrid, radius_m: f64) -> Self {
        Self::new(radius_m, grid.zone_size_m())
    }

    pub fn radius_cells(&self) -> usize {
        self.radius_cells
    }

    /// Number of cells in an unclipped disk.
    pub fn area_cells(&self) -> usize {
        self.half.iter().map(|h| 2 * h + 1).sum()
    }

    /// Row segments `(row, col_lo, col_hi)` (inclusive) of the disk centered
    /// at `center`, clipped to the grid, in increasing row order.
    pub fn segments(&self, grid: &RegionGrid, center: ZoneId) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        let (r0, c0) = grid.row_col(center);
        let (h, w) = (grid.height() as isize, grid.width() as isize);
        let rc = self.radius_cells as isize;
        let (r0, c0) = (r0 as isize, c0 as isize);
        (-rc..=rc).filter_map(move |dr| {
            let r = r0 + dr;
            if r < 0 || r >= h {
                return None;
            }
            let hw = self.half[(dr + rc) as usize] as isize;
            let lo = (c0 - hw).max(0);
            let hi = (c0 + hw).min(w - 1);
            Some((r as usize, lo as usize, hi as usize))
        })
    }

    /// Zones of the footprint in increasing index order.
    pub fn zones(&self, grid: &RegionGrid, center: ZoneId) -> Vec<ZoneId> {
        let mut out = Vec::with_capacity(self.area_cells());
        for (r, lo, hi) in self.segments(grid, center) {
            out.extend((lo..=hi).map(|c| grid.zone(r, c)));
        }
        out
    }

    pub fn contains(&self, grid: &RegionGrid, center: ZoneId, z: ZoneId) -> bool {
        let (r0, c0) = grid.row_col(center);
        let (r, c) = grid.row_col(z);
        let dr = r as isize - r0 as isize;
        if dr.unsigned_abs() > self.radius_cells {
            return false;
        }
        let hw = self.half[(dr + self.radius_cells as isize) as usize];
        (c as isize - c0 as isize).unsigned_abs() <= hw
    }

    /// Straight summation over the footprint in row-major order.
    pub fn naive_sum(&self, grid: &RegionGrid, center: ZoneId, values: &[f64]) -> f64 {
        let mut s = 0.0;
        for (r, lo, hi) in self.segments(grid, center) {
            let base = r * grid.width();
            for c in lo..=hi {
                s += values[base + c];
            }
        }
        s
    }
}

/// Per-row prefix sums of a zone map.
#[derive(Clone, Debug)]
pub struct RowPrefix {
    stride: usize,
    prefix: Vec<f64>,
}

impl RowPrefix {
    pub fn new(grid: &RegionGrid, values: &[f64]) -> Self {
        assert_eq!(values.len(), grid.len(), "value map size");
        let w = grid.width();
        let stride = w + 1;
        let mut prefix = vec![0.0; grid.height() * stride];
        for r in 0..grid.height() {
            let mut acc = 0.0;
            for c in 0..w {
                acc += values[r * w + c];
                prefix[r * stride + c + 1] = acc;
            }
        }
        Self { stride, prefix }
    }

    #[inline]
    pub fn segment(&self, row: usize, lo: usize, hi: usize) -> f64 {
        let base = row * self.stride;
        self.prefix[base + hi + 1] - self.prefix[base + lo]
    }
}

/// Footprint sum of `values` for every possible center.
pub fn footprint_sums(grid: &RegionGrid, disk: &Disk, values: &[f64]) -> Vec<f64> {
    let pre = RowPrefix::new(grid, values);
    grid.zones()
        .map(|z| disk.segments(grid, z).map(|(r, lo, hi)| pre.segment(r, lo, hi)).sum())
        .collect()
}

/// Center maximizing the footprint sum, ties broken by lowest index.
///
/// Candidates are screened with prefix sums. Any center within rounding
/// distance of the best is rescored by straight summation, so the returned
/// decision is the same as exhaustive naive scoring would give.
pub fn argmax_footprint(grid: &RegionGrid, disk: &Disk, values: &[f64]) -> (ZoneId, f64) {
    let sums = footprint_sums(grid, disk, values);
    let best = sums.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let scale: f64 = values.iter().map(|v| v.abs()).sum();
    let tol = 1e-10 * (1.0 + scale);
    let mut winner = None;
    for (i, s) in sums.iter().enumerate() {
        if *s >= best - tol {
            let z = ZoneId(i);
            let exact = disk.naive_sum(grid, z, values);
            match winner {
                Some((_, v)) if exact <= v => {}
                _ => winner = Some((z, exact)),
            }
        }
    }
    winner.expect("grid is non-empty")
}

/// Sum of `values` over the intersection of the footprints centered at `a`
/// and `b`.
pub fn overlap_sum(grid: &RegionGrid, disk: &Disk, pre: &RowPrefix, a: ZoneId, b: ZoneId) -> f64 {
    let (ra, ca) = grid.row_col(a);
    let (rb, cb) = grid.row_col(b);
    let rc = disk.radius_cells as isize;
    let (ra, ca, rb, cb) = (ra as isize, ca as isize, rb as isize, cb as isize);
    if (ra - rb).abs() > 2 * rc || (ca - cb).abs() > 2 * rc {
        return 0.0;
    }
    let lo_row = (ra.max(rb) - rc).max(0);
    let hi_row = (ra.min(rb) + rc).min(grid.height() as isize - 1);
    let w = grid.width() as isize;
    let mut s = 0.0;
    for r in lo_row..=hi_row {
        let ha = disk.half[(r - ra + rc) as usize] as isize;
        let hb = disk.half[(r - rb + rc) as usize] as isize;
        let lo = (ca - ha).max(cb - hb).max(0);
        let hi = (ca + ha).min(cb + hb).min(w - 1);
        if lo <= hi {
            s += pre.segment(r as usize, lo as usize, hi as usize);
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::region::FuelParams;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn grid(w: usize, h: usize) -> RegionGrid {
        RegionGrid::uniform(w, h, 30.0, FuelParams::default(), ZoneId(0)).unwrap()
    }

    #[test]
    fn disk_matches_neighbors_within() {
        let g = grid(17, 13);
        for radius in [0.0, 29.0, 30.0, 42.5, 90.0, 120.0, 180.0, 360.0] {
            let d = Disk::for_grid(&g, radius);
            for z in g.zones() {
                assert_eq!(d.zones(&g, z), g.neighbors_within(z, radius), "r={radius} z={z}");
            }
        }
    }

    #[test]
    fn interior_areas() {
        assert_eq!(Disk::new(180.0, 30.0).area_cells(), 113);
        assert_eq!(Disk::new(120.0, 30.0).area_cells(), 49);
        assert_eq!(Disk::new(0.0, 30.0).area_cells(), 1);
    }

    #[test]
    fn prefix_sums_match_naive() {
        let g = grid(12, 9);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let v: Vec<f64> = (0..g.len()).map(|_| rng.random::<f64>()).collect();
        let d = Disk::for_grid(&g, 120.0);
        let sums = footprint_sums(&g, &d, &v);
        for z in g.zones() {
            let naive: f64 = g.neighbors_within(z, 120.0).iter().map(|n| v[n.0]).sum();
            assert_abs_diff_eq!(sums[z.0], naive, epsilon = 1e-12);
        }
    }

    #[test]
    fn argmax_prefers_lowest_index_on_ties() {
        let g = grid(8, 8);
        let d = Disk::for_grid(&g, 60.0);
        let (z, s) = argmax_footprint(&g, &d, &vec![0.0; 64]);
        assert_eq!((z, s), (ZoneId(0), 0.0));
    }

    #[test]
    fn overlap_matches_set_intersection() {
        let g = grid(10, 10);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let v: Vec<f64> = (0..g.len()).map(|_| rng.random::<f64>()).collect();
        let pre = RowPrefix::new(&g, &v);
        let d = Disk::for_grid(&g, 90.0);
        for _ in 0..200 {
            let a = ZoneId(rng.random_range(0..g.len()));
            let b = ZoneId(rng.random_range(0..g.len()));
            let fa = g.neighbors_within(a, 90.0);
            let naive: f64 = g
                .neighbors_within(b, 90.0)
                .into_iter()
                .filter(|z| fa.contains(z))
                .map(|z| v[z.0])
                .sum();
            assert_abs_diff_eq!(overlap_sum(&g, &d, &pre, a, b), naive, epsilon = 1e-12);
        }
    }

    #[test]
    fn contains_agrees_with_zones() {
        let g = grid(9, 9);
        let d = Disk::for_grid(&g, 75.0);
        for c in [ZoneId(0), ZoneId(40), ZoneId(80)] {
            let zs = d.zones(&g, c);
            for z in g.zones() {
                assert_eq!(d.contains(&g, c, z), zs.contains(&z));
            }
        }
    }
}
