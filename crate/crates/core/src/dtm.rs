//! Raster terrain model built from ground points.

use std::io::Write;

use crate::error::{Error, Result};
use crate::point::{Bounds, PointRecord};

/// Number of valid cells blended when a query falls in an empty cell.
pub const IDW_NEIGHBORS: usize = 8;
pub const NODATA: f64 = -9999.0;

/// Regular grid of minimum ground elevations. Row 0 is the southern row.
#[derive(Clone, Debug, PartialEq)]
pub struct DtmGrid {
    pub origin_x: f64,
    pub origin_y: f64,
    pub cell_size: f64,
    pub ncols: usize,
    pub nrows: usize,
    pub elev: Vec<f64>,
    pub valid: Vec<bool>,
}

impl DtmGrid {
    /// Empty grid covering `bounds`. A point on the max edge still falls inside.
    pub fn new(bounds: Bounds, cell_size: f64) -> Result<Self> {
        if !(cell_size.is_finite() && cell_size > 0.0) {
            return Err(Error::InvalidParam {
                name: "cell_size",
                message: format!("must be positive, got {cell_size}"),
            });
        }
        let ncols = (bounds.width() / cell_size).floor() as usize + 1;
        let nrows = (bounds.height() / cell_size).floor() as usize + 1;
        Ok(DtmGrid {
            origin_x: bounds.min_x,
            origin_y: bounds.min_y,
            cell_size,
            ncols,
            nrows,
            elev: vec![0.0; ncols * nrows],
            valid: vec![false; ncols * nrows],
        })
    }

    /// Column and row of the cell holding `(x, y)`, clamped to the grid.
    pub fn cell_of(&self, x: f64, y: f64) -> (usize, usize) {
        let c = ((x - self.origin_x) / self.cell_size).floor();
        let r = ((y - self.origin_y) / self.cell_size).floor();
        let c = c.clamp(0.0, (self.ncols - 1) as f64) as usize;
        let r = r.clamp(0.0, (self.nrows - 1) as f64) as usize;
        (c, r)
    }

    pub fn index(&self, col: usize, row: usize) -> usize {
        row * self.ncols + col
    }

    pub fn cell_center(&self, col: usize, row: usize) -> (f64, f64) {
        (
            self.origin_x + (col as f64 + 0.5) * self.cell_size,
            self.origin_y + (row as f64 + 0.5) * self.cell_size,
        )
    }

    pub fn valid_count(&self) -> usize {
        self.valid.iter().filter(|&&v| v).count()
    }

    /// Lower the containing cell to `z` if it is empty or higher.
    pub fn insert(&mut self, x: f64, y: f64, z: f64) {
        let (c, r) = self.cell_of(x, y);
        let i = self.index(c, r);
        if !self.valid[i] || z < self.elev[i] {
            self.elev[i] = z;
            self.valid[i] = true;
        }
    }

    /// Elevation at `(x, y)`: the containing cell if valid, else an
    /// inverse-square-distance blend of the nearest valid cell centres.
    ///
    /// Returns `None` only when the grid has no valid cell.
    pub fn interpolate(&self, x: f64, y: f64) -> Option<f64> {
        let (c0, r0) = self.cell_of(x, y);
        let i0 = self.index(c0, r0);
        if self.valid[i0] {
            return Some(self.elev[i0]);
        }

        // How far the query sits outside its (clamped) cell; zero inside the grid.
        let cs = self.cell_size;
        let (cx0, cy0) = (self.origin_x + c0 as f64 * cs, self.origin_y + r0 as f64 * cs);
        let ox = (cx0 - x).max(x - (cx0 + cs)).max(0.0);
        let oy = (cy0 - y).max(y - (cy0 + cs)).max(0.0);
        let outside = ox.hypot(oy);

        let max_ring = self.ncols.max(self.nrows);
        let mut found: Vec<(f64, usize)> = Vec::new();
        for ring in 1..=max_ring {
            let ring_i = ring as isize;
            let (c0i, r0i) = (c0 as isize, r0 as isize);
            let mut visit = |c: isize, r: isize| {
                if c < 0 || r < 0 || c >= self.ncols as isize || r >= self.nrows as isize {
                    return;
                }
                let idx = self.index(c as usize, r as usize);
                if self.valid[idx] {
                    let (px, py) = self.cell_center(c as usize, r as usize);
                    found.push(((px - x).hypot(py - y), idx));
                }
            };
            for dc in -ring_i..=ring_i {
                visit(c0i + dc, r0i - ring_i);
                visit(c0i + dc, r0i + ring_i);
            }
            for dr in (-ring_i + 1)..ring_i {
                visit(c0i - ring_i, r0i + dr);
                visit(c0i + ring_i, r0i + dr);
            }
            if found.len() >= IDW_NEIGHBORS {
                found.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
                found.truncate(IDW_NEIGHBORS);
                // Every cell beyond this ring is at least this far away.
                let next_ring_bound = (ring as f64 + 0.5) * cs - outside;
                if found[IDW_NEIGHBORS - 1].0 <= next_ring_bound {
                    break;
                }
            }
        }
        if found.is_empty() {
            return None;
        }
        found.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        found.truncate(IDW_NEIGHBORS);
        if found[0].0 == 0.0 {
            return Some(self.elev[found[0].1]);
        }
        let (mut num, mut den) = (0.0, 0.0);
        for &(d, idx) in &found {
            let w = 1.0 / (d * d);
            num += w * self.elev[idx];
            den += w;
        }
        Some(num / den)
    }

    /// Copy of the grid with every empty cell filled by interpolation at its centre.
    pub fn filled(&self) -> DtmGrid {
        let mut out = self.clone();
        if self.valid_count() == 0 {
            return out;
        }
        for r in 0..self.nrows {
            for c in 0..self.ncols {
                let i = self.index(c, r);
                if !self.valid[i] {
                    let (x, y) = self.cell_center(c, r);
                    out.elev[i] = self.interpolate(x, y).unwrap_or(NODATA);
                    out.valid[i] = true;
                }
            }
        }
        out
    }

    /// ESRI ASCII grid; empty cells are written as `NODATA_value`.
    pub fn write_esri_ascii<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "ncols {}", self.ncols)?;
        writeln!(out, "nrows {}", self.nrows)?;
        writeln!(out, "xllcorner {}", self.origin_x)?;
        writeln!(out, "yllcorner {}", self.origin_y)?;
        writeln!(out, "cellsize {}", self.cell_size)?;
        writeln!(out, "NODATA_value {}", NODATA)?;
        let mut row_buf = String::new();
        for r in (0..self.nrows).rev() {
            row_buf.clear();
            for c in 0..self.ncols {
                let i = self.index(c, r);
                if c > 0 {
                    row_buf.push(' ');
                }
                if self.valid[i] {
                    row_buf.push_str(&format!("{:.3}", self.elev[i]));
                } else {
                    row_buf.push_str("-9999");
                }
            }
            writeln!(out, "{row_buf}")?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Grid over `bounds` holding the lowest ground elevation per cell.
pub fn build_dtm<'a, I>(ground_points: I, cell_size: f64, bounds: Bounds) -> Result<DtmGrid>
where
    I: IntoIterator<Item = &'a PointRecord>,
{
    let mut grid = DtmGrid::new(bounds, cell_size)?;
    let mut any = false;
    for p in ground_points {
        grid.insert(p.x, p.y, p.z);
        any = true;
    }
    if !any {
        return Err(Error::SeedFailure);
    }
    Ok(grid)
}

/// Signed height of `p` above the interpolated terrain.
pub fn point_dtm_dz(dtm: &DtmGrid, p: &PointRecord) -> f64 {
    p.z - dtm.interpolate(p.x, p.y).expect("DTM has at least one valid cell")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bounds(w: f64, h: f64) -> Bounds {
        Bounds {
            min_x: 0.0,
            min_y: 0.0,
            max_x: w,
            max_y: h,
        }
    }

    fn pt(x: f64, y: f64, z: f64) -> PointRecord {
        PointRecord::new(0, x, y, z)
    }

    #[test]
    fn single_point_cell() {
        let g = build_dtm(&[pt(0.5, 0.5, 10.0)], 1.0, bounds(3.0, 3.0)).unwrap();
        assert!(g.valid[g.index(0, 0)]);
        assert_eq!(g.elev[g.index(0, 0)], 10.0);
        assert_eq!(g.valid_count(), 1);
        assert_eq!(g.interpolate(0.5, 0.5), Some(10.0));
    }

    #[test]
    fn minimum_per_cell() {
        let g = build_dtm(&[pt(0.2, 0.2, 7.0), pt(0.7, 0.6, 5.0)], 1.0, bounds(1.0, 1.0)).unwrap();
        assert_eq!(g.elev[0], 5.0);
    }

    #[test]
    fn empty_ground_set_is_a_seed_failure() {
        let none: Vec<PointRecord> = Vec::new();
        assert!(matches!(build_dtm(&none, 1.0, bounds(1.0, 1.0)), Err(Error::SeedFailure)));
    }

    #[test]
    fn flat_ground_everywhere_zero() {
        let pts: Vec<PointRecord> = (0..10)
            .flat_map(|i| (0..10).map(move |j| pt(i as f64 + 0.5, j as f64 + 0.5, 0.0)))
            .collect();
        let g = build_dtm(&pts, 1.0, bounds(10.0, 10.0)).unwrap();
        for r in 0..10 {
            for c in 0..10 {
                assert!(g.valid[g.index(c, r)]);
                assert_eq!(g.elev[g.index(c, r)], 0.0);
            }
        }
    }

    #[test]
    fn equidistant_cells_average() {
        // Cells (0,0) and (2,0) valid; query the centre of (1,0).
        let g = build_dtm(&[pt(0.5, 0.5, 10.0), pt(2.5, 0.5, 20.0)], 1.0, bounds(2.9, 0.9)).unwrap();
        assert_eq!(g.nrows, 1);
        let v = g.interpolate(1.5, 0.5).unwrap();
        assert!((v - 15.0).abs() < 1e-12);
    }

    #[test]
    fn constant_field_and_dz_sign() {
        let pts: Vec<PointRecord> = (0..5).map(|i| pt(i as f64 * 4.0 + 1.0, 1.0, 3.0)).collect();
        let g = build_dtm(&pts, 2.0, bounds(20.0, 20.0)).unwrap();
        assert!((g.interpolate(15.0, 17.0).unwrap() - 3.0).abs() < 1e-12);
        assert_eq!(point_dtm_dz(&g, &pt(1.0, 1.0, 3.0)), 0.0);
        assert!((point_dtm_dz(&g, &pt(13.0, 9.0, 5.0)) - 2.0).abs() < 1e-12);
        assert!(point_dtm_dz(&g, &pt(13.0, 9.0, 1.0)) < 0.0);
    }

    #[test]
    fn ascii_grid_layout() {
        let mut g = DtmGrid::new(bounds(3.9, 1.9), 2.0).unwrap();
        g.insert(0.5, 0.5, 1.0);
        g.insert(2.5, 0.5, 2.0);
        g.insert(0.5, 2.5, 3.5);
        let mut buf = Vec::new();
        g.write_esri_ascii(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let expected = "ncols 2\nnrows 1\nxllcorner 0\nyllcorner 0\ncellsize 2\nNODATA_value -9999\n1.000 2.000\n";
        // bounds height 1.9 gives one row; the point at y=2.5 clamps into it.
        assert_eq!(g.nrows, 1);
        assert_eq!(text, expected);

        let mut g = DtmGrid::new(bounds(2.0, 2.0), 2.0).unwrap();
        g.insert(0.5, 0.5, 1.0);
        g.insert(2.5, 2.5, 4.0);
        let mut buf = Vec::new();
        g.write_esri_ascii(&mut buf).unwrap();
        let lines: Vec<String> = String::from_utf8(buf).unwrap().lines().map(String::from).collect();
        assert_eq!(lines[6], "-9999 4.000");
        assert_eq!(lines[7], "1.000 -9999");
    }

    #[test]
    fn filled_grid_has_no_gaps() {
        let g = build_dtm(&[pt(0.5, 0.5, 1.0), pt(9.5, 9.5, 3.0)], 1.0, bounds(10.0, 10.0)).unwrap();
        let f = g.filled();
        assert_eq!(f.valid_count(), f.ncols * f.nrows);
        assert!(f.elev.iter().all(|&z| (1.0..=3.0).contains(&z)));
    }

    /// Brute-force k-nearest IDW over all valid cells.
    fn idw_oracle(g: &DtmGrid, x: f64, y: f64) -> f64 {
        let mut all: Vec<(f64, usize)> = (0..g.valid.len())
            .filter(|&i| g.valid[i])
            .map(|i| {
                let (cx, cy) = g.cell_center(i % g.ncols, i / g.ncols);
                ((cx - x).hypot(cy - y), i)
            })
            .collect();
        all.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        all.truncate(IDW_NEIGHBORS);
        let (mut n, mut d) = (0.0, 0.0);
        for (dist, i) in all {
            n += g.elev[i] / (dist * dist);
            d += 1.0 / (dist * dist);
        }
        n / d
    }

    proptest! {
        #[test]
        fn ring_search_matches_brute_force(
            cells in prop::collection::vec((0usize..15, 0usize..12, -5.0f64..5.0), 1..40),
            qx in -3.0f64..33.0,
            qy in -3.0f64..27.0,
        ) {
            let mut g = DtmGrid::new(bounds(29.9, 23.9), 2.0).unwrap();
            for &(c, r, z) in &cells {
                let (x, y) = g.cell_center(c, r);
                g.insert(x, y, z);
            }
            let (c, r) = g.cell_of(qx, qy);
            let got = g.interpolate(qx, qy).unwrap();
            if g.valid[g.index(c, r)] {
                prop_assert_eq!(got, g.elev[g.index(c, r)]);
            } else {
                let want = idw_oracle(&g, qx, qy);
                prop_assert!((got - want).abs() < 1e-9, "got {} want {}", got, want);
                let lo = cells.iter().map(|c| c.2).fold(f64::INFINITY, f64::min);
                let hi = cells.iter().map(|c| c.2).fold(f64::NEG_INFINITY, f64::max);
                prop_assert!(got >= lo - 1e-9 && got <= hi + 1e-9);
            }
        }

        #[test]
        fn adding_ground_never_raises_a_cell(
            first in prop::collection::vec((0.0f64..10.0, 0.0f64..10.0, -5.0f64..5.0), 1..30),
            more in prop::collection::vec((0.0f64..10.0, 0.0f64..10.0, -5.0f64..5.0), 0..30),
        ) {
            let a: Vec<PointRecord> = first.iter().map(|&(x, y, z)| pt(x, y, z)).collect();
            let g1 = build_dtm(&a, 1.0, bounds(10.0, 10.0)).unwrap();
            let mut g2 = g1.clone();
            for &(x, y, z) in &more {
                g2.insert(x, y, z);
            }
            for i in 0..g1.elev.len() {
                if g1.valid[i] {
                    prop_assert!(g2.valid[i] && g2.elev[i] <= g1.elev[i]);
                }
            }
        }

        #[test]
        fn plane_interpolates_to_constant(c in -100.0f64..100.0, qx in 0.0f64..50.0, qy in 0.0f64..50.0) {
            let pts: Vec<PointRecord> = (0..7).map(|i| pt(i as f64 * 7.0 + 0.3, (i * 3 % 7) as f64 * 7.0 + 0.4, c)).collect();
            let g = build_dtm(&pts, 2.0, bounds(50.0, 50.0)).unwrap();
            prop_assert!((g.interpolate(qx, qy).unwrap() - c).abs() < 1e-9);
        }
    }
}
