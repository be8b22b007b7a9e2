//! Shared fixtures for the benchmarks.

use scanseg::{generate_scene, PointRecord, SceneSpec};

/// The reference town cropped to a `size` x `size` metre square.
pub fn town_points(size: f64) -> Vec<PointRecord> {
    let mut spec = SceneSpec::standard_town();
    spec.extent = (size, size);
    spec.features.retain(|f| scene_feature_fits(f, size));
    generate_scene(&spec).expect("valid bench scene").points
}

fn scene_feature_fits(f: &scanseg::Feature, size: f64) -> bool {
    use scanseg::Feature::*;
    let inside = |x: f64, y: f64| x <= size && y <= size;
    match f {
        BoxBuilding { footprint, .. } | GableBuilding { footprint, .. } | Car { footprint, .. } => {
            inside(footprint.x1, footprint.y1)
        }
        Cliff { start, end, .. } => inside(start[0], start[1]) && inside(end[0], end[1]),
        TreeCluster { center, radius, .. } => inside(center[0] + radius, center[1] + radius),
    }
}
