use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::point::PointRecord;

/// Points of one natural scan sweep.
///
/// `point_ids` index into the point slice the line was built from and
/// `along[k]` is the projection of point `point_ids[k]` onto `axis`.
#[derive(Clone, Debug, PartialEq)]
pub struct ScanLine {
    /// Dense index of the line in ascending scan-line-number order.
    pub line_id: usize,
    /// Scan line number as read from the input.
    pub scan_line: u32,
    pub point_ids: Vec<usize>,
    pub axis: [f64; 2],
    pub along: Vec<f64>,
    /// Fewer than three points; excluded from segmentation.
    pub degenerate: bool,
}

impl ScanLine {
    pub fn len(&self) -> usize {
        self.point_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.point_ids.is_empty()
    }

    pub fn is_strictly_increasing(&self) -> bool {
        self.along.windows(2).all(|w| w[1] > w[0])
    }
}

/// Unit vector of the dominant horizontal direction of `ids`, pointing from
/// the first acquired point towards the last.
fn dominant_axis(points: &[PointRecord], ids: &[usize]) -> [f64; 2] {
    let n = ids.len() as f64;
    let (mx, my) = ids.iter().fold((0.0, 0.0), |(sx, sy), &i| {
        (sx + points[i].x, sy + points[i].y)
    });
    let (mx, my) = (mx / n, my / n);
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for &i in ids {
        let dx = points[i].x - mx;
        let dy = points[i].y - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }

    let first = &points[ids[0]];
    let last = &points[ids[ids.len() - 1]];
    let chord = [last.x - first.x, last.y - first.y];
    let chord_len = chord[0].hypot(chord[1]);

    // Eigenvalue gap of the 2x2 covariance; zero means no preferred direction.
    let gap = ((sxx - syy).powi(2) + 4.0 * sxy * sxy).sqrt();
    let scale = (sxx + syy).max(f64::MIN_POSITIVE);
    let mut axis = if gap > 1e-12 * scale && sxx + syy > 0.0 {
        let theta = 0.5 * (2.0 * sxy).atan2(sxx - syy);
        [theta.cos(), theta.sin()]
    } else if chord_len > 0.0 {
        [chord[0] / chord_len, chord[1] / chord_len]
    } else {
        [1.0, 0.0]
    };
    if axis[0] * chord[0] + axis[1] * chord[1] < 0.0 {
        axis = [-axis[0], -axis[1]];
    }
    axis
}

/// Group points into scan lines, in acquisition order within each line.
///
/// Lines come out in ascending scan-line-number order. When any point lacks
/// a scan line number, all lines are instead rebuilt from the end-of-line
/// flags. Each line's axis points in its acquisition direction, so a clean
/// sweep has ascending `along`; [`remove_backscan`] deletes the exceptions.
pub fn extract_scan_lines(points: &[PointRecord]) -> Vec<ScanLine> {
    let explicit = points.iter().all(|p| p.scan_line.is_some());
    let mut groups: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    let mut counter = 0u32;
    for (i, p) in points.iter().enumerate() {
        let key = if explicit {
            p.scan_line.unwrap()
        } else {
            let k = counter;
            if p.eol_flag {
                counter += 1;
            }
            k
        };
        groups.entry(key).or_default().push(i);
    }

    groups
        .into_iter()
        .enumerate()
        .map(|(line_id, (scan_line, point_ids))| {
            let axis = dominant_axis(points, &point_ids);
            let along = point_ids
                .iter()
                .map(|&i| points[i].x * axis[0] + points[i].y * axis[1])
                .collect();
            ScanLine {
                line_id,
                scan_line,
                degenerate: point_ids.len() < 3,
                point_ids,
                axis,
                along,
            }
        })
        .collect()
}

/// Drop back-scanned points: walking forward, any point that does not
/// advance past the furthest `along` seen so far is removed.
///
/// Returns the cleaned line and the removed point ids. The result is
/// strictly increasing in `along`.
pub fn remove_backscan(line: &ScanLine) -> (ScanLine, Vec<usize>) {
    let mut kept_ids = Vec::with_capacity(line.len());
    let mut kept_along = Vec::with_capacity(line.len());
    let mut removed = Vec::new();
    let mut running_max = f64::NEG_INFINITY;
    for (&id, &a) in line.point_ids.iter().zip(&line.along) {
        if a > running_max {
            running_max = a;
            kept_ids.push(id);
            kept_along.push(a);
        } else {
            removed.push(id);
        }
    }
    let cleaned = ScanLine {
        line_id: line.line_id,
        scan_line: line.scan_line,
        degenerate: kept_ids.len() < 3,
        point_ids: kept_ids,
        axis: line.axis,
        along: kept_along,
    };
    (cleaned, removed)
}

/// Flip a line so its axis points into the half-plane `x > 0` (or `+y` when
/// the axis is vertical), keeping `along` ascending.
///
/// Serpentine acquisition alternates sweep directions; without this, the
/// endpoint slope of a segment would change sign from one line to the next.
pub fn orient_canonical(line: ScanLine) -> ScanLine {
    let [ax, ay] = line.axis;
    let flip = ax < -1e-12 || (ax.abs() <= 1e-12 && ay < 0.0);
    if !flip {
        return line;
    }
    let ScanLine {
        line_id,
        scan_line,
        mut point_ids,
        along,
        degenerate,
        ..
    } = line;
    point_ids.reverse();
    let along = along.into_iter().rev().map(|a| -a).collect();
    ScanLine {
        line_id,
        scan_line,
        point_ids,
        axis: [-ax, -ay],
        along,
        degenerate,
    }
}

/// Scan lines ready for segmentation.
#[derive(Clone, Debug)]
pub struct PreparedLines {
    pub lines: Vec<ScanLine>,
    /// Ids removed as back-scan points.
    pub backscan: Vec<usize>,
}

impl PreparedLines {
    pub fn degenerate_count(&self) -> usize {
        self.lines.iter().filter(|l| l.degenerate).count()
    }
}

/// Extract, clean and orient all scan lines.
pub fn prepare_scan_lines(points: &[PointRecord]) -> PreparedLines {
    let raw = extract_scan_lines(points);
    let cleaned: Vec<(ScanLine, Vec<usize>)> = raw
        .par_iter()
        .map(|line| {
            let (line, removed) = remove_backscan(line);
            (orient_canonical(line), removed)
        })
        .collect();
    let mut lines = Vec::with_capacity(cleaned.len());
    let mut backscan = Vec::new();
    for (line, removed) in cleaned {
        lines.push(line);
        backscan.extend(removed);
    }
    backscan.sort_unstable();
    PreparedLines { lines, backscan }
}
