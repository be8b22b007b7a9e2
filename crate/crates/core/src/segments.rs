//! Splitting scan lines into homogeneous segments by slope difference.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::ingest::ScanLine;
use crate::params::FilterParams;
use crate::point::{Label, PointRecord};

/// A maximal run of kept points inside one scan line.
#[derive(Clone, Debug, PartialEq)]
pub struct LineSegment {
    pub seg_id: usize,
    pub line_id: usize,
    /// Point ids in ascending `along` order.
    pub point_ids: Vec<usize>,
    /// Horizontal distance between the two endpoints.
    pub length_m: f64,
    pub label: Label,
}

impl LineSegment {
    fn from_run(line_id: usize, point_ids: Vec<usize>, points: &[PointRecord]) -> Self {
        let first = &points[point_ids[0]];
        let last = &points[point_ids[point_ids.len() - 1]];
        LineSegment {
            seg_id: 0,
            line_id,
            length_m: first.horizontal_distance(last),
            point_ids,
            label: Label::Unlabeled,
        }
    }

    /// First endpoint (smallest `along`).
    pub fn start(&self) -> usize {
        self.point_ids[0]
    }

    /// Last endpoint (largest `along`).
    pub fn end(&self) -> usize {
        self.point_ids[self.point_ids.len() - 1]
    }

    pub fn len(&self) -> usize {
        self.point_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.point_ids.is_empty()
    }

    pub fn min_z(&self, points: &[PointRecord]) -> f64 {
        self.point_ids
            .iter()
            .map(|&i| points[i].z)
            .fold(f64::INFINITY, f64::min)
    }
}

/// Slope of `cur -> next` minus slope of `prev -> cur`, each slope being the
/// elevation change over the horizontal distance.
pub fn dslope(prev: &PointRecord, cur: &PointRecord, next: &PointRecord) -> Result<f64> {
    let back = prev.horizontal_distance(cur);
    let ahead = cur.horizontal_distance(next);
    if back == 0.0 {
        return Err(Error::DuplicatePoint {
            first: prev.id,
            second: cur.id,
        });
    }
    if ahead == 0.0 {
        return Err(Error::DuplicatePoint {
            first: cur.id,
            second: next.id,
        });
    }
    Ok((next.z - cur.z) / ahead - (cur.z - prev.z) / back)
}

/// Segments of one line plus the interior points deleted as discontinuities.
#[derive(Clone, Debug, Default)]
pub struct LineSplit {
    pub segments: Vec<LineSegment>,
    pub deleted: Vec<usize>,
}

/// Delete every interior point whose |dslope| exceeds `t_dslope` and cut the
/// line at each deletion. The two line endpoints have no slope difference
/// and stay with their neighbouring run.
///
/// Degenerate lines produce no segments; all their points are reported as
/// deleted.
pub fn split_segments(
    line: &ScanLine,
    points: &[PointRecord],
    params: &FilterParams,
) -> Result<LineSplit> {
    let ids = &line.point_ids;
    if line.degenerate || ids.len() < 3 {
        return Ok(LineSplit {
            segments: Vec::new(),
            deleted: ids.clone(),
        });
    }
    let mut keep = vec![true; ids.len()];
    for i in 1..ids.len() - 1 {
        let d = dslope(&points[ids[i - 1]], &points[ids[i]], &points[ids[i + 1]])?;
        if d.abs() > params.t_dslope {
            keep[i] = false;
        }
    }

    let mut split = LineSplit::default();
    let mut run: Vec<usize> = Vec::new();
    for (k, &id) in ids.iter().enumerate() {
        if keep[k] {
            run.push(id);
        } else {
            split.deleted.push(id);
            if !run.is_empty() {
                split
                    .segments
                    .push(LineSegment::from_run(line.line_id, std::mem::take(&mut run), points));
            }
        }
    }
    if !run.is_empty() {
        split
            .segments
            .push(LineSegment::from_run(line.line_id, run, points));
    }
    Ok(split)
}

/// Keep segments with at least `min_seg_points` points and
/// `min_seg_length` metres; returns `(kept, dropped point ids)`.
pub fn drop_short_segments(
    segments: Vec<LineSegment>,
    params: &FilterParams,
) -> (Vec<LineSegment>, Vec<usize>) {
    let mut dropped = Vec::new();
    let kept = segments
        .into_iter()
        .filter_map(|s| {
            if s.len() < params.min_seg_points || s.length_m < params.min_seg_length {
                dropped.extend_from_slice(&s.point_ids);
                None
            } else {
                Some(s)
            }
        })
        .collect();
    (kept, dropped)
}

/// Segmentation of a whole cloud.
#[derive(Clone, Debug, Default)]
pub struct Segmentation {
    /// Surviving segments; `seg_id` equals the index, ordered by line then along.
    pub segments: Vec<LineSegment>,
    /// Points deleted for exceeding the slope-difference threshold, or lying
    /// on degenerate lines.
    pub deleted: Vec<usize>,
    /// Points of segments removed as too short.
    pub dropped: Vec<usize>,
}

impl Segmentation {
    /// Map from point index to owning segment.
    pub fn segment_of_points(&self, n_points: usize) -> Vec<Option<usize>> {
        let mut owner = vec![None; n_points];
        for s in &self.segments {
            for &p in &s.point_ids {
                owner[p] = Some(s.seg_id);
            }
        }
        owner
    }
}

/// Split and prune every line. Lines are processed in parallel; seg ids are
/// assigned afterwards in (line, along) order.
pub fn segment_lines(
    lines: &[ScanLine],
    points: &[PointRecord],
    params: &FilterParams,
) -> Result<Segmentation> {
    let per_line: Vec<(LineSplit, Vec<usize>)> = lines
        .par_iter()
        .map(|line| {
            let split = split_segments(line, points, params)?;
            let (kept, dropped) = drop_short_segments(split.segments, params);
            Ok((
                LineSplit {
                    segments: kept,
                    deleted: split.deleted,
                },
                dropped,
            ))
        })
        .collect::<Result<_>>()?;

    let mut out = Segmentation::default();
    for (split, dropped) in per_line {
        out.deleted.extend(split.deleted);
        out.dropped.extend(dropped);
        for mut seg in split.segments {
            seg.seg_id = out.segments.len();
            out.segments.push(seg);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::prepare_scan_lines;
    use proptest::prelude::*;

    fn p(x: f64, y: f64, z: f64) -> PointRecord {
        PointRecord::new(0, x, y, z)
    }

    /// Independent evaluation of the slope-difference formula.
    fn dslope_oracle(a: (f64, f64, f64), b: (f64, f64, f64), c: (f64, f64, f64)) -> f64 {
        let run1 = ((b.0 - a.0).powi(2) + (b.1 - a.1).powi(2)).sqrt();
        let run2 = ((c.0 - b.0).powi(2) + (c.1 - b.1).powi(2)).sqrt();
        (c.2 - b.2) / run2 - (b.2 - a.2) / run1
    }

    fn profile(zs: &[f64], spacing: f64) -> (Vec<PointRecord>, ScanLine) {
        let pts: Vec<PointRecord> = zs
            .iter()
            .enumerate()
            .map(|(i, &z)| PointRecord::new(i, i as f64 * spacing, 0.0, z).with_line(0))
            .collect();
        let line = prepare_scan_lines(&pts).lines.remove(0);
        (pts, line)
    }

    #[test]
    fn dslope_examples() {
        assert_eq!(dslope(&p(0., 0., 0.), &p(1., 0., 0.), &p(2., 0., 0.)).unwrap(), 0.0);
        assert_eq!(dslope(&p(0., 0., 0.), &p(1., 0., 0.), &p(2., 0., 1.)).unwrap(), 1.0);
        let d = dslope(&p(0., 0., 0.), &p(0.4, 0., 0.02), &p(0.8, 0., 0.)).unwrap();
        let oracle = dslope_oracle((0., 0., 0.), (0.4, 0., 0.02), (0.8, 0., 0.));
        assert!((oracle + 0.1).abs() < 1e-12);
        assert!((d - oracle).abs() < 1e-12);
    }

    #[test]
    fn dslope_rejects_duplicates() {
        let a = PointRecord::new(3, 1.0, 1.0, 0.0);
        let b = PointRecord::new(4, 1.0, 1.0, 5.0);
        let c = PointRecord::new(5, 2.0, 1.0, 0.0);
        assert!(matches!(
            dslope(&a, &b, &c),
            Err(Error::DuplicatePoint { first: 3, second: 4 })
        ));
    }

    #[test]
    fn flat_line_is_one_segment() {
        let (pts, line) = profile(&[0.0; 20], 0.4);
        let split = split_segments(&line, &pts, &FilterParams::default()).unwrap();
        assert_eq!(split.segments.len(), 1);
        assert_eq!(split.segments[0].len(), 20);
        assert!(split.deleted.is_empty());
        assert!((split.segments[0].length_m - 7.6).abs() < 1e-9);
    }

    #[test]
    fn spike_is_cut_out() {
        let mut zs = vec![0.0; 20];
        zs[10] = 5.0;
        let (pts, line) = profile(&zs, 0.4);
        let params = FilterParams::default();
        let expected_deleted: Vec<usize> = (1..19)
            .filter(|&i| {
                let at = |k: usize| (k as f64 * 0.4, 0.0, zs[k]);
                dslope_oracle(at(i - 1), at(i), at(i + 1)).abs() > params.t_dslope
            })
            .collect();
        assert_eq!(expected_deleted, vec![9, 10, 11]);

        let split = split_segments(&line, &pts, &params).unwrap();
        assert_eq!(split.deleted, expected_deleted);
        assert_eq!(split.segments.len(), 2);
        assert_eq!(split.segments[0].point_ids, (0..9).collect::<Vec<_>>());
        assert_eq!(split.segments[1].point_ids, (12..20).collect::<Vec<_>>());
    }

    #[test]
    fn step_edge_splits_ground_from_roof() {
        // Ground, two wall returns, then a roof 6 m up.
        let mut pts = Vec::new();
        let mut x = 0.0;
        for _ in 0..15 {
            pts.push((x, 0.0));
            x += 0.4;
        }
        let wall_x = x - 0.2;
        pts.push((wall_x, 2.0));
        pts.push((wall_x + 0.01, 4.0));
        for _ in 0..15 {
            pts.push((x, 6.0));
            x += 0.4;
        }
        let recs: Vec<PointRecord> = pts
            .iter()
            .enumerate()
            .map(|(i, &(x, z))| PointRecord::new(i, x, 0.0, z).with_line(0))
            .collect();
        let line = prepare_scan_lines(&recs).lines.remove(0);
        let split = split_segments(&line, &recs, &FilterParams::default()).unwrap();
        assert!(split.segments.len() >= 2);
        for id in [14, 15, 16, 17] {
            assert!(split.deleted.contains(&id), "point {id} should be deleted");
        }
        assert!(split.segments.iter().all(|s| {
            let zs: Vec<f64> = s.point_ids.iter().map(|&i| recs[i].z).collect();
            zs.iter().all(|&z| z == zs[0])
        }));
    }

    #[test]
    fn short_segments_are_dropped() {
        let params = FilterParams::default();
        let pts: Vec<PointRecord> = (0..50)
            .map(|i| PointRecord::new(i, i as f64 * 0.41, 0.0, 0.0))
            .collect();
        let short = LineSegment::from_run(0, vec![0, 1, 2], &pts);
        let long = LineSegment::from_run(0, (0..50).collect(), &pts);
        assert!(long.length_m >= 20.0);
        let (kept, dropped) = drop_short_segments(vec![short, long.clone()], &params);
        assert_eq!(kept, vec![long]);
        assert_eq!(dropped, vec![0, 1, 2]);

        // Enough points but under one metre.
        let close: Vec<PointRecord> = (0..6)
            .map(|i| PointRecord::new(i, i as f64 * 0.1, 0.0, 0.0))
            .collect();
        let tiny = LineSegment::from_run(0, (0..6).collect(), &close);
        let (kept, dropped) = drop_short_segments(vec![tiny], &params);
        assert!(kept.is_empty());
        assert_eq!(dropped.len(), 6);
    }

    #[test]
    fn degenerate_line_yields_nothing() {
        let (pts, mut line) = profile(&[0.0, 0.0, 0.0], 1.0);
        line.degenerate = true;
        let split = split_segments(&line, &pts, &FilterParams::default()).unwrap();
        assert!(split.segments.is_empty());
        assert_eq!(split.deleted.len(), 3);
    }

    #[test]
    fn seg_ids_follow_line_order() {
        let mut pts = Vec::new();
        for line in 0..3u32 {
            for i in 0..30 {
                let z = if (10..12).contains(&i) { 4.0 } else { 0.0 };
                pts.push(PointRecord::new(pts.len(), i as f64 * 0.4, line as f64, z).with_line(line));
            }
        }
        let prepared = prepare_scan_lines(&pts);
        let seg = segment_lines(&prepared.lines, &pts, &FilterParams::default()).unwrap();
        assert_eq!(seg.segments.len(), 6);
        for (i, s) in seg.segments.iter().enumerate() {
            assert_eq!(s.seg_id, i);
            assert_eq!(s.line_id, i / 2);
        }
        let owner = seg.segment_of_points(pts.len());
        assert_eq!(owner[0], Some(0));
        assert_eq!(owner[10], None);
    }

    proptest! {
        #[test]
        fn quadratic_profile_has_constant_dslope(c in -5.0f64..5.0, d in 0.05f64..3.0, s0 in -20.0f64..20.0) {
            let z = |s: f64| c * s * s;
            let pts: Vec<PointRecord> = (0..3)
                .map(|k| {
                    let s = s0 + k as f64 * d;
                    PointRecord::new(k, s, 0.0, z(s))
                })
                .collect();
            let got = dslope(&pts[0], &pts[1], &pts[2]).unwrap();
            let want = 2.0 * c * d;
            let tol = 1e-9 * want.abs().max(1.0) * (1.0 + s0.abs() / d);
            prop_assert!((got - want).abs() <= tol, "got {got} want {want}");
        }

        #[test]
        fn rigid_horizontal_motion_keeps_dslope(
            zs in prop::array::uniform3(-10.0f64..10.0),
            gaps in prop::array::uniform2(0.1f64..3.0),
            angle in 0.0f64..std::f64::consts::TAU,
            tx in -1e3f64..1e3,
            ty in -1e3f64..1e3,
        ) {
            let xs = [0.0, gaps[0], gaps[0] + gaps[1]];
            let base: Vec<PointRecord> = (0..3).map(|k| PointRecord::new(k, xs[k], 0.0, zs[k])).collect();
            let (sa, ca) = angle.sin_cos();
            let moved: Vec<PointRecord> = base
                .iter()
                .map(|q| PointRecord::new(q.id, q.x * ca - q.y * sa + tx, q.x * sa + q.y * ca + ty, q.z))
                .collect();
            let a = dslope(&base[0], &base[1], &base[2]).unwrap();
            let b = dslope(&moved[0], &moved[1], &moved[2]).unwrap();
            prop_assert!((a - b).abs() <= 1e-6 * (1.0 + a.abs()));
        }

        #[test]
        fn mirroring_z_negates_and_keeps_split(zs in prop::collection::vec(-3.0f64..3.0, 3..40)) {
            let (pts, line) = profile(&zs, 0.4);
            let mirrored: Vec<f64> = zs.iter().map(|z| -z).collect();
            let (mpts, mline) = profile(&mirrored, 0.4);
            for i in 1..zs.len() - 1 {
                let a = dslope(&pts[i - 1], &pts[i], &pts[i + 1]).unwrap();
                let b = dslope(&mpts[i - 1], &mpts[i], &mpts[i + 1]).unwrap();
                prop_assert!((a + b).abs() < 1e-12);
            }
            let params = FilterParams::default();
            let s1 = split_segments(&line, &pts, &params).unwrap();
            let s2 = split_segments(&mline, &mpts, &params).unwrap();
            prop_assert_eq!(s1.deleted, s2.deleted);
            let ids1: Vec<_> = s1.segments.iter().map(|s| s.point_ids.clone()).collect();
            let ids2: Vec<_> = s2.segments.iter().map(|s| s.point_ids.clone()).collect();
            prop_assert_eq!(ids1, ids2);
        }

        #[test]
        fn segments_are_contiguous_runs(zs in prop::collection::vec(-1.0f64..1.0, 3..60)) {
            let (pts, line) = profile(&zs, 0.4);
            let split = split_segments(&line, &pts, &FilterParams::default()).unwrap();
            let mut covered: Vec<usize> = split.deleted.clone();
            for s in &split.segments {
                prop_assert!(s.point_ids.windows(2).all(|w| w[1] == w[0] + 1));
                covered.extend(&s.point_ids);
            }
            covered.sort_unstable();
            prop_assert_eq!(covered, (0..zs.len()).collect::<Vec<_>>());
        }
    }
}
