//! Seeding, consistency adjustment and DTM-driven iterative labeling.

use rayon::prelude::*;

use crate::dtm::{build_dtm, point_dtm_dz, DtmGrid};
use crate::error::{Error, Result};
use crate::graph::{build_similarity_graph, extract_regions, region_of_segments, Region, SimilarityGraph};
use crate::ingest::{prepare_scan_lines, PreparedLines};
use crate::params::FilterParams;
use crate::point::{Bounds, Label, PointRecord};
use crate::segments::{segment_lines, LineSegment, Segmentation};

/// Everything produced before labeling starts.
#[derive(Clone, Debug)]
pub struct SegmentedCloud {
    pub lines: PreparedLines,
    pub segmentation: Segmentation,
    pub graph: SimilarityGraph,
    pub regions: Vec<Region>,
}

impl SegmentedCloud {
    pub fn segments(&self) -> &[LineSegment] {
        &self.segmentation.segments
    }

    /// Region id of every point, `None` for points outside all segments.
    pub fn region_of_points(&self, n_points: usize) -> Vec<Option<usize>> {
        let seg_region = region_of_segments(&self.regions, self.segments().len());
        let mut out = vec![None; n_points];
        for s in self.segments() {
            for &p in &s.point_ids {
                out[p] = Some(seg_region[s.seg_id]);
            }
        }
        out
    }
}

fn check_points(points: &[PointRecord]) -> Result<()> {
    match points.iter().find(|p| !p.is_finite()) {
        Some(p) => Err(Error::NonFinite { id: p.id }),
        None => Ok(()),
    }
}

/// Scan lines, segments, similarity graph and regions for a cloud.
pub fn segment_cloud(points: &[PointRecord], params: &FilterParams) -> Result<SegmentedCloud> {
    params.validate()?;
    check_points(points)?;
    let lines = prepare_scan_lines(points);
    let segmentation = segment_lines(&lines.lines, points, params)?;
    let graph = build_similarity_graph(&segmentation.segments, points, params)?;
    let regions = extract_regions(&graph, &segmentation.segments, points);
    log::debug!(
        "{} lines, {} segments, {} edges, {} regions",
        lines.lines.len(),
        segmentation.segments.len(),
        graph.edges.len(),
        regions.len()
    );
    Ok(SegmentedCloud {
        lines,
        segmentation,
        graph,
        regions,
    })
}

/// Initial per-segment labels from square tiles of side `seed_tile`.
///
/// Each tile's low is the lowest segment point inside it. A segment belongs
/// to the tile holding its lowest point and is seeded ground within `h1` of
/// that low, non-ground at `h_high` or more above it.
pub fn select_seeds(
    segments: &[LineSegment],
    points: &[PointRecord],
    bounds: Bounds,
    params: &FilterParams,
) -> Vec<Label> {
    let tile = params.seed_tile;
    let ntx = (bounds.width() / tile).floor() as usize + 1;
    let nty = (bounds.height() / tile).floor() as usize + 1;
    let tile_of = |p: &PointRecord| -> usize {
        let tx = (((p.x - bounds.min_x) / tile).floor().max(0.0) as usize).min(ntx - 1);
        let ty = (((p.y - bounds.min_y) / tile).floor().max(0.0) as usize).min(nty - 1);
        ty * ntx + tx
    };

    let mut tile_low = vec![f64::INFINITY; ntx * nty];
    for s in segments {
        for &i in &s.point_ids {
            let t = tile_of(&points[i]);
            tile_low[t] = tile_low[t].min(points[i].z);
        }
    }

    segments
        .iter()
        .map(|s| {
            let lowest = s
                .point_ids
                .iter()
                .map(|&i| &points[i])
                .min_by(|a, b| a.z.total_cmp(&b.z).then(a.id.cmp(&b.id)))
                .expect("segments are non-empty");
            let low = tile_low[tile_of(lowest)];
            if lowest.z <= low + params.h1 {
                Label::Ground
            } else if lowest.z >= low + params.h_high {
                Label::NonGround
            } else {
                Label::Unlabeled
            }
        })
        .collect()
}

/// Majority vote of seeded points per region; ties and unseeded regions
/// stay unlabeled.
pub fn consistency_adjust(regions: &[Region], segments: &[LineSegment], seeds: &[Label]) -> Vec<Label> {
    regions
        .iter()
        .map(|r| {
            let (mut ground, mut non_ground) = (0usize, 0usize);
            for &s in &r.seg_ids {
                match seeds[s] {
                    Label::Ground => ground += segments[s].len(),
                    Label::NonGround => non_ground += segments[s].len(),
                    _ => {}
                }
            }
            match ground.cmp(&non_ground) {
                std::cmp::Ordering::Greater => Label::Ground,
                std::cmp::Ordering::Less => Label::NonGround,
                std::cmp::Ordering::Equal => Label::Unlabeled,
            }
        })
        .collect()
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Decide every unlabeled region against the DTM: ground when the median
/// |dz| is within `h`, non-ground when even its lowest point is more than
/// `h` above. Returns how many regions changed.
pub fn label_regions(
    regions: &[Region],
    segments: &[LineSegment],
    points: &[PointRecord],
    dtm: &DtmGrid,
    h: f64,
    region_labels: &mut [Label],
) -> usize {
    let decisions: Vec<(usize, Label)> = regions
        .par_iter()
        .filter(|r| region_labels[r.region_id] == Label::Unlabeled)
        .filter_map(|r| {
            let mut dz: Vec<f64> = r
                .seg_ids
                .iter()
                .flat_map(|&s| segments[s].point_ids.iter())
                .map(|&p| point_dtm_dz(dtm, &points[p]))
                .collect();
            let min_dz = dz.iter().copied().fold(f64::INFINITY, f64::min);
            let mut abs: Vec<f64> = dz.iter_mut().map(|d| d.abs()).collect();
            if median(&mut abs) <= h {
                Some((r.region_id, Label::Ground))
            } else if min_dz > h {
                Some((r.region_id, Label::NonGround))
            } else {
                None
            }
        })
        .collect();
    for &(id, label) in &decisions {
        region_labels[id] = label;
    }
    decisions.len()
}

/// Snapshot after one labeling round (round 0 is the seeded state).
#[derive(Clone, Debug)]
pub struct FilterState {
    pub iteration: usize,
    pub dtm: DtmGrid,
    pub region_labels: Vec<Label>,
    pub changed: usize,
}

impl FilterState {
    pub fn ground_regions(&self) -> impl Iterator<Item = usize> + '_ {
        self.region_labels
            .iter()
            .enumerate()
            .filter(|(_, l)| **l == Label::Ground)
            .map(|(i, _)| i)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FilterStats {
    pub points: usize,
    pub lines: usize,
    pub degenerate_lines: usize,
    pub backscan_removed: usize,
    pub deleted: usize,
    pub short_dropped: usize,
    pub segments: usize,
    pub regions: usize,
    pub ground_regions: usize,
    pub non_ground_regions: usize,
    pub iterations: usize,
}

#[derive(Clone, Debug)]
pub struct FilterResult {
    /// One label per input point, in input order.
    pub labels: Vec<Label>,
    pub dtm: DtmGrid,
    pub history: Vec<FilterState>,
    /// False when `max_iter` rounds ran without the labels settling.
    pub converged: bool,
    pub stats: FilterStats,
}

fn ground_dtm(
    regions: &[Region],
    region_labels: &[Label],
    segments: &[LineSegment],
    points: &[PointRecord],
    bounds: Bounds,
    cell_size: f64,
) -> Result<DtmGrid> {
    let ground = regions
        .iter()
        .filter(|r| region_labels[r.region_id] == Label::Ground)
        .flat_map(|r| r.seg_ids.iter())
        .flat_map(|&s| segments[s].point_ids.iter())
        .map(|&p| &points[p]);
    build_dtm(ground, cell_size, bounds)
}

/// Run the complete ground filter.
///
/// Regions still undecided when labeling settles are reported as
/// non-ground; points outside every segment are unclassified.
pub fn run_filter(points: &[PointRecord], params: &FilterParams) -> Result<FilterResult> {
    let cloud = segment_cloud(points, params)?;
    let bounds = Bounds::of_points(points).ok_or(Error::SeedFailure)?;
    let segments = cloud.segments();
    let regions = &cloud.regions;

    let seeds = select_seeds(segments, points, bounds, params);
    if !seeds.contains(&Label::Ground) {
        return Err(Error::SeedFailure);
    }
    let mut region_labels = consistency_adjust(regions, segments, &seeds);
    if !region_labels.contains(&Label::Ground) {
        return Err(Error::SeedFailure);
    }

    let mut dtm = ground_dtm(regions, &region_labels, segments, points, bounds, params.cell_size)?;
    let mut history = vec![FilterState {
        iteration: 0,
        dtm: dtm.clone(),
        region_labels: region_labels.clone(),
        changed: region_labels.iter().filter(|l| **l != Label::Unlabeled).count(),
    }];

    let mut converged = false;
    for iteration in 1..=params.max_iter {
        let before_ground = region_labels.iter().filter(|l| **l == Label::Ground).count();
        let changed = label_regions(regions, segments, points, &dtm, params.h2, &mut region_labels);
        let after_ground = region_labels.iter().filter(|l| **l == Label::Ground).count();
        if after_ground != before_ground {
            dtm = ground_dtm(regions, &region_labels, segments, points, bounds, params.cell_size)?;
        }
        log::debug!("round {iteration}: {changed} regions changed");
        history.push(FilterState {
            iteration,
            dtm: dtm.clone(),
            region_labels: region_labels.clone(),
            changed,
        });
        if changed == 0 {
            converged = true;
            break;
        }
    }
    if !converged {
        log::warn!("labels still changing after {} rounds", params.max_iter);
    }

    let mut labels = vec![Label::Unclassified; points.len()];
    let seg_region = region_of_segments(regions, segments.len());
    for s in segments {
        let label = match region_labels[seg_region[s.seg_id]] {
            Label::Ground => Label::Ground,
            _ => Label::NonGround,
        };
        for &p in &s.point_ids {
            labels[p] = label;
        }
    }

    let stats = FilterStats {
        points: points.len(),
        lines: cloud.lines.lines.len(),
        degenerate_lines: cloud.lines.degenerate_count(),
        backscan_removed: cloud.lines.backscan.len(),
        deleted: cloud.segmentation.deleted.len(),
        short_dropped: cloud.segmentation.dropped.len(),
        segments: segments.len(),
        regions: regions.len(),
        ground_regions: region_labels.iter().filter(|l| **l == Label::Ground).count(),
        non_ground_regions: region_labels.iter().filter(|l| **l != Label::Ground).count(),
        iterations: history.len() - 1,
    };
    Ok(FilterResult {
        labels,
        dtm,
        history,
        converged,
        stats,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Parallel lines along x at `line_spacing`, heights from `z(x, y)`.
    fn grid(nx: usize, ny: usize, z: impl Fn(f64, f64) -> f64) -> Vec<PointRecord> {
        let mut pts = Vec::new();
        for j in 0..ny {
            for i in 0..nx {
                let (x, y) = (i as f64 * 0.4, j as f64 * 0.6);
                pts.push(PointRecord::new(pts.len(), x, y, z(x, y)).with_line(j as u32));
            }
        }
        pts
    }

    fn seg_from(points: &[PointRecord], seg_id: usize, ids: Vec<usize>) -> LineSegment {
        LineSegment {
            seg_id,
            line_id: seg_id,
            length_m: points[ids[0]].horizontal_distance(&points[*ids.last().unwrap()]),
            point_ids: ids,
            label: Label::Unlabeled,
        }
    }

    fn region(id: usize, seg_ids: Vec<usize>, point_count: usize) -> Region {
        Region {
            region_id: id,
            seg_ids,
            label: Label::Unlabeled,
            point_count,
            z_min: 0.0,
            z_max: 0.0,
        }
    }

    #[test]
    fn flat_tile_is_all_ground_seeds() {
        let pts = grid(50, 10, |_, _| 0.0);
        let cloud = segment_cloud(&pts, &FilterParams::default()).unwrap();
        let b = Bounds::of_points(&pts).unwrap();
        let seeds = select_seeds(cloud.segments(), &pts, b, &FilterParams::default());
        assert!(seeds.iter().all(|&l| l == Label::Ground));
    }

    #[test]
    fn roof_seeds_non_ground() {
        let pts = grid(80, 30, |x, y| {
            if (10.0..20.0).contains(&x) && (5.0..12.0).contains(&y) {
                10.0
            } else {
                0.0
            }
        });
        let params = FilterParams::default();
        let cloud = segment_cloud(&pts, &params).unwrap();
        let b = Bounds::of_points(&pts).unwrap();
        let seeds = select_seeds(cloud.segments(), &pts, b, &params);
        let mut roof = 0;
        for (s, label) in cloud.segments().iter().zip(&seeds) {
            if s.min_z(&pts) > 5.0 {
                roof += 1;
                assert_eq!(*label, Label::NonGround);
            } else {
                assert_eq!(*label, Label::Ground);
            }
        }
        assert!(roof > 0);
    }

    #[test]
    fn small_terraces_are_seeded_ground() {
        // Steps of 0.4 m every 6 m of y.
        let pts = grid(60, 30, |_, y| 0.4 * (y / 6.0).floor().min(1.0));
        let params = FilterParams::default();
        let cloud = segment_cloud(&pts, &params).unwrap();
        let b = Bounds::of_points(&pts).unwrap();
        let seeds = select_seeds(cloud.segments(), &pts, b, &params);
        assert!(seeds.iter().all(|&l| l == Label::Ground));
    }

    #[test]
    fn majority_and_ties() {
        let pts: Vec<PointRecord> = (0..210).map(|i| PointRecord::new(i, i as f64, 0.0, 0.0)).collect();
        let segs = vec![
            seg_from(&pts, 0, (0..100).collect()),
            seg_from(&pts, 1, (100..105).collect()),
            seg_from(&pts, 2, (105..155).collect()),
            seg_from(&pts, 3, (155..205).collect()),
            seg_from(&pts, 4, (205..210).collect()),
        ];
        let regions = vec![
            region(0, vec![0, 1], 105),
            region(1, vec![2, 3], 100),
            region(2, vec![4], 5),
        ];
        let seeds = [Label::Ground, Label::NonGround, Label::Ground, Label::NonGround, Label::Unlabeled];
        let labels = consistency_adjust(&regions, &segs, &seeds);
        assert_eq!(labels, vec![Label::Ground, Label::Unlabeled, Label::Unlabeled]);

        let only_ground = [Label::Ground; 5];
        let labels = consistency_adjust(&regions, &segs, &only_ground);
        assert!(labels.iter().all(|&l| l == Label::Ground));
    }

    #[test]
    fn dtm_labeling_rules() {
        let mut pts: Vec<PointRecord> = Vec::new();
        for i in 0..40 {
            pts.push(PointRecord::new(pts.len(), i as f64 * 0.5, 0.0, 0.0));
        }
        for i in 0..10 {
            pts.push(PointRecord::new(pts.len(), 5.0 + i as f64 * 0.5, 5.0, 8.0));
        }
        for i in 0..10 {
            pts.push(PointRecord::new(pts.len(), 5.0 + i as f64 * 0.5, 9.0, 1.5));
        }
        let segs = vec![
            seg_from(&pts, 0, (0..40).collect()),
            seg_from(&pts, 1, (40..50).collect()),
            seg_from(&pts, 2, (50..60).collect()),
        ];
        let regions = vec![region(0, vec![0], 40), region(1, vec![1], 10), region(2, vec![2], 10)];
        let b = Bounds::of_points(&pts).unwrap();
        let dtm = build_dtm(&pts[..40], 2.0, b).unwrap();
        let mut labels = vec![Label::Ground, Label::Unlabeled, Label::Unlabeled];
        let changed = label_regions(&regions, &segs, &pts, &dtm, 2.0, &mut labels);
        assert_eq!(changed, 2);
        assert_eq!(labels, vec![Label::Ground, Label::NonGround, Label::Ground]);
        // Nothing left to decide.
        assert_eq!(label_regions(&regions, &segs, &pts, &dtm, 2.0, &mut labels), 0);
    }

    #[test]
    fn flat_plane_is_all_ground() {
        let pts = grid(100, 40, |_, _| 0.0);
        let res = run_filter(&pts, &FilterParams::default()).unwrap();
        assert!(res.labels.iter().all(|&l| l == Label::Ground));
        assert!(res.converged);
        assert!(res.stats.iterations <= 2);
    }

    #[test]
    fn box_building_on_plane() {
        let roof = |x: f64, y: f64| (15.0..25.0).contains(&x) && (6.0..16.0).contains(&y);
        let pts = grid(100, 40, |x, y| if roof(x, y) { 10.0 } else { 0.0 });
        let res = run_filter(&pts, &FilterParams::default()).unwrap();
        assert!(res.converged);
        for (p, l) in pts.iter().zip(&res.labels) {
            match *l {
                Label::Ground => assert!(!roof(p.x, p.y)),
                Label::NonGround => assert!(roof(p.x, p.y)),
                Label::Unclassified => {}
                Label::Unlabeled => panic!("point {} left unlabeled", p.id),
            }
        }
        let roof_total = pts.iter().filter(|p| roof(p.x, p.y)).count();
        let roof_ng = res.labels.iter().filter(|l| **l == Label::NonGround).count();
        assert!(roof_ng * 10 >= roof_total * 8);
    }

    #[test]
    fn upper_terrace_joins_ground_later() {
        // A 1.5 m terrace bounded by a step, too high for seeding.
        let upper = |y: f64| y >= 12.0;
        let pts = grid(100, 40, |_, y| if upper(y) { 1.5 } else { 0.0 });
        let params = FilterParams {
            seed_tile: 100.0,
            ..FilterParams::default()
        };
        let res = run_filter(&pts, &params).unwrap();
        assert!(res.converged);
        let seeded = &res.history[0];
        assert!(res.history.len() >= 2);
        let cloud = segment_cloud(&pts, &params).unwrap();
        let point_region = cloud.region_of_points(pts.len());
        let upper_region = point_region[pts.iter().position(|p| upper(p.y)).unwrap()].unwrap();
        assert_eq!(seeded.region_labels[upper_region], Label::Unlabeled);
        assert_eq!(res.history.last().unwrap().region_labels[upper_region], Label::Ground);
        assert!(pts
            .iter()
            .zip(&res.labels)
            .filter(|(p, _)| upper(p.y))
            .all(|(_, l)| *l == Label::Ground));
    }

    #[test]
    fn no_ground_seeds_is_an_error() {
        // Every line degenerate: nothing to seed.
        let pts: Vec<PointRecord> = (0..4)
            .map(|i| PointRecord::new(i, i as f64, 0.0, 0.0).with_line(i as u32))
            .collect();
        assert!(matches!(run_filter(&pts, &FilterParams::default()), Err(Error::SeedFailure)));
        assert!(matches!(run_filter(&[], &FilterParams::default()), Err(Error::SeedFailure)));
    }

    #[test]
    fn non_finite_points_are_rejected() {
        let mut pts = grid(10, 3, |_, _| 0.0);
        pts[4].z = f64::NAN;
        assert!(matches!(run_filter(&pts, &FilterParams::default()), Err(Error::NonFinite { id: 4 })));
    }
}
