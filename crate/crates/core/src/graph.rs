//! Similarity graph over line segments and its connected regions.

use std::io::Write;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::params::FilterParams;
use crate::point::{Label, PointRecord};
use crate::segments::LineSegment;

/// Distance, elevation gap and slope-angle difference between two segments.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimilarityMeasures {
    /// Smallest horizontal distance over all point pairs (m).
    pub d_x: f64,
    /// Smallest absolute elevation difference over all point pairs (m).
    pub dh: f64,
    /// Absolute difference of the endpoint slope angles (degrees).
    pub theta_z: f64,
}

impl SimilarityMeasures {
    pub fn within(&self, params: &FilterParams) -> bool {
        self.d_x <= params.t_dx && self.dh <= params.t_dh && self.theta_z <= params.t_theta_deg
    }
}

/// Endpoint slope angle of a segment in degrees, in (-90, 90).
pub fn segment_slope_deg(seg: &LineSegment, points: &[PointRecord]) -> Result<f64> {
    let a = &points[seg.start()];
    let b = &points[seg.end()];
    let run = a.horizontal_distance(b);
    if run == 0.0 {
        return Err(Error::DegenerateSegment { seg_id: seg.seg_id });
    }
    Ok(((b.z - a.z) / run).atan().to_degrees())
}

/// Per-segment data reused across all pair evaluations.
#[derive(Clone, Debug)]
struct SegmentGeometry {
    /// Horizontal positions sorted by x.
    xy: Vec<[f64; 2]>,
    /// Elevations sorted ascending.
    z: Vec<f64>,
    slope_deg: f64,
    min: [f64; 2],
    max: [f64; 2],
}

impl SegmentGeometry {
    fn new(seg: &LineSegment, points: &[PointRecord]) -> Result<Self> {
        let mut xy: Vec<[f64; 2]> = seg.point_ids.iter().map(|&i| [points[i].x, points[i].y]).collect();
        xy.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
        let mut z: Vec<f64> = seg.point_ids.iter().map(|&i| points[i].z).collect();
        z.sort_by(f64::total_cmp);
        let mut min = [f64::INFINITY; 2];
        let mut max = [f64::NEG_INFINITY; 2];
        for p in &xy {
            for k in 0..2 {
                min[k] = min[k].min(p[k]);
                max[k] = max[k].max(p[k]);
            }
        }
        Ok(SegmentGeometry {
            xy,
            z,
            slope_deg: segment_slope_deg(seg, points)?,
            min,
            max,
        })
    }

    fn boxes_within(&self, other: &SegmentGeometry, margin: f64) -> bool {
        (0..2).all(|k| self.min[k] - margin <= other.max[k] && other.min[k] - margin <= self.max[k])
    }

    fn measures(&self, other: &SegmentGeometry) -> SimilarityMeasures {
        SimilarityMeasures {
            d_x: min_horizontal_distance(&self.xy, &other.xy),
            dh: min_abs_difference(&self.z, &other.z),
            theta_z: (other.slope_deg - self.slope_deg).abs(),
        }
    }
}

/// Exact closest-pair distance between two point sets, each sorted by x.
fn min_horizontal_distance(a: &[[f64; 2]], b: &[[f64; 2]]) -> f64 {
    let (small, large) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    let mut best_sq = f64::INFINITY;
    for p in small {
        let pivot = large.partition_point(|q| q[0] < p[0]);
        for q in large[pivot..].iter() {
            let dx = q[0] - p[0];
            if dx * dx >= best_sq {
                break;
            }
            best_sq = best_sq.min(dx * dx + (q[1] - p[1]).powi(2));
        }
        for q in large[..pivot].iter().rev() {
            let dx = p[0] - q[0];
            if dx * dx >= best_sq {
                break;
            }
            best_sq = best_sq.min(dx * dx + (q[1] - p[1]).powi(2));
        }
    }
    best_sq.sqrt()
}

/// Smallest |a_i - b_j| for two ascending sequences.
fn min_abs_difference(a: &[f64], b: &[f64]) -> f64 {
    let (mut i, mut j) = (0, 0);
    let mut best = f64::INFINITY;
    while i < a.len() && j < b.len() {
        best = best.min((a[i] - b[j]).abs());
        if a[i] < b[j] {
            i += 1;
        } else {
            j += 1;
        }
    }
    best
}

/// Similarity of two segments.
pub fn segment_similarity(
    a: &LineSegment,
    b: &LineSegment,
    points: &[PointRecord],
) -> Result<SimilarityMeasures> {
    let ga = SegmentGeometry::new(a, points)?;
    let gb = SegmentGeometry::new(b, points)?;
    Ok(ga.measures(&gb))
}

fn geometries(segments: &[LineSegment], points: &[PointRecord]) -> Result<Vec<SegmentGeometry>> {
    segments
        .par_iter()
        .map(|s| SegmentGeometry::new(s, points))
        .collect()
}

fn candidates_from(segments: &[LineSegment], geoms: &[SegmentGeometry], t_dx: f64) -> Vec<(usize, usize)> {
    // Index ranges of each line's segments; segments arrive ordered by line.
    let mut lines: Vec<(usize, std::ops::Range<usize>)> = Vec::new();
    for (i, s) in segments.iter().enumerate() {
        match lines.last_mut() {
            Some((line, range)) if *line == s.line_id => range.end = i + 1,
            _ => lines.push((s.line_id, i..i + 1)),
        }
    }

    let mut pairs = Vec::new();
    for (k, (line, range)) in lines.iter().enumerate() {
        for i in range.start..range.end.saturating_sub(1) {
            pairs.push((i, i + 1));
        }
        if let Some((next_line, next_range)) = lines.get(k + 1) {
            if *next_line != line + 1 {
                continue;
            }
            for i in range.clone() {
                for j in next_range.clone() {
                    if geoms[i].boxes_within(&geoms[j], t_dx) {
                        pairs.push((i, j));
                    }
                }
            }
        }
    }
    let mut pairs: Vec<(usize, usize)> = pairs
        .into_iter()
        .map(|(i, j)| {
            let (a, b) = (segments[i].seg_id, segments[j].seg_id);
            (a.min(b), a.max(b))
        })
        .collect();
    pairs.sort_unstable();
    pairs
}

/// Segment pairs worth comparing: neighbours within a scan line, and
/// segments of consecutive lines whose bounding boxes come within `t_dx`.
///
/// `segments` must be ordered by line (as produced by segmentation). Pairs
/// are returned as `(lower seg_id, higher seg_id)`, sorted.
pub fn candidate_neighbors(
    segments: &[LineSegment],
    points: &[PointRecord],
    params: &FilterParams,
) -> Result<Vec<(usize, usize)>> {
    let geoms = geometries(segments, points)?;
    Ok(candidates_from(segments, &geoms, params.t_dx))
}

/// An edge of the similarity graph with the measures that admitted it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub measures: SimilarityMeasures,
}

/// Undirected graph with one node per segment.
#[derive(Clone, Debug, Default)]
pub struct SimilarityGraph {
    pub node_count: usize,
    /// Sorted by `(a, b)` with `a < b`.
    pub edges: Vec<Edge>,
    adjacency: Vec<Vec<usize>>,
}

impl SimilarityGraph {
    pub fn from_edges(node_count: usize, mut edges: Vec<Edge>) -> Self {
        edges.sort_by_key(|e| (e.a, e.b));
        edges.dedup_by_key(|e| (e.a, e.b));
        let mut adjacency = vec![Vec::new(); node_count];
        for e in &edges {
            adjacency[e.a].push(e.b);
            adjacency[e.b].push(e.a);
        }
        for adj in adjacency.iter_mut() {
            adj.sort_unstable();
        }
        SimilarityGraph {
            node_count,
            edges,
            adjacency,
        }
    }

    pub fn neighbors(&self, node: usize) -> &[usize] {
        &self.adjacency[node]
    }

    pub fn edge_pairs(&self) -> Vec<(usize, usize)> {
        self.edges.iter().map(|e| (e.a, e.b)).collect()
    }

    /// Debug dump, one `seg_a seg_b d_x dh theta_z` row per edge.
    pub fn write_edges<W: Write>(&self, mut out: W) -> Result<()> {
        for e in &self.edges {
            writeln!(
                out,
                "{} {} {:.4} {:.4} {:.4}",
                e.a, e.b, e.measures.d_x, e.measures.dh, e.measures.theta_z
            )?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Connect candidate pairs whose three measures all pass their thresholds.
///
/// Segment `seg_id`s must equal their index in `segments`.
pub fn build_similarity_graph(
    segments: &[LineSegment],
    points: &[PointRecord],
    params: &FilterParams,
) -> Result<SimilarityGraph> {
    debug_assert!(segments.iter().enumerate().all(|(i, s)| s.seg_id == i));
    let geoms = geometries(segments, points)?;
    let candidates = candidates_from(segments, &geoms, params.t_dx);
    let edges: Vec<Edge> = candidates
        .par_iter()
        .filter_map(|&(a, b)| {
            let measures = geoms[a].measures(&geoms[b]);
            measures.within(params).then_some(Edge { a, b, measures })
        })
        .collect();
    Ok(SimilarityGraph::from_edges(segments.len(), edges))
}

/// A connected set of segments sharing one label.
#[derive(Clone, Debug, PartialEq)]
pub struct Region {
    pub region_id: usize,
    /// Member segments, ascending.
    pub seg_ids: Vec<usize>,
    pub label: Label,
    pub point_count: usize,
    pub z_min: f64,
    pub z_max: f64,
}

/// Connected components by iterative depth-first traversal.
///
/// Components are discovered from the smallest unvisited seg id, so region
/// ids ascend with each region's smallest member.
pub fn extract_regions(
    graph: &SimilarityGraph,
    segments: &[LineSegment],
    points: &[PointRecord],
) -> Vec<Region> {
    let mut visited = vec![false; graph.node_count];
    let mut regions = Vec::new();
    let mut stack = Vec::new();
    for root in 0..graph.node_count {
        if visited[root] {
            continue;
        }
        visited[root] = true;
        stack.push(root);
        let mut members = Vec::new();
        while let Some(node) = stack.pop() {
            members.push(node);
            for &next in graph.neighbors(node).iter().rev() {
                if !visited[next] {
                    visited[next] = true;
                    stack.push(next);
                }
            }
        }
        members.sort_unstable();

        let mut point_count = 0;
        let mut z_min = f64::INFINITY;
        let mut z_max = f64::NEG_INFINITY;
        for &s in &members {
            point_count += segments[s].len();
            for &p in &segments[s].point_ids {
                z_min = z_min.min(points[p].z);
                z_max = z_max.max(points[p].z);
            }
        }
        regions.push(Region {
            region_id: regions.len(),
            seg_ids: members,
            label: Label::Unlabeled,
            point_count,
            z_min,
            z_max,
        });
    }
    regions
}

/// Region index of every segment.
pub fn region_of_segments(regions: &[Region], segment_count: usize) -> Vec<usize> {
    let mut owner = vec![usize::MAX; segment_count];
    for r in regions {
        for &s in &r.seg_ids {
            owner[s] = r.region_id;
        }
    }
    owner
}
