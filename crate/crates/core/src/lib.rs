//! Ground filtering of airborne LiDAR by scan-line segmentation.
//!
//! Each scan line is cut into segments wherever the along-line slope
//! changes sharply. Similar segments on the same and adjacent lines are
//! joined into regions, and regions are labeled ground or non-ground against
//! a progressively refined terrain model.
//!
//! ```
//! use scanseg::{generate_scene, run_filter, FilterParams, SceneSpec};
//!
//! let spec = SceneSpec { extent: (20.0, 20.0), ..SceneSpec::default() };
//! let scene = generate_scene(&spec).unwrap();
//! let result = run_filter(&scene.points, &FilterParams::default()).unwrap();
//! assert!(result.converged);
//! ```

pub mod dtm;
pub mod error;
pub mod eval;
pub mod filter;
pub mod graph;
pub mod ingest;
pub mod io;
pub mod noise;
pub mod params;
pub mod point;
pub mod segments;
pub mod synth;

pub use crate::dtm::{build_dtm, DtmGrid};
pub use crate::error::{Error, Result};
pub use crate::eval::{
    error_report, overlay_compare, sensitivity_sweep, ErrorReport, EvaluatedSet, OverlayTable,
    SweepParameter, SweepResult,
};
pub use crate::filter::{run_filter, segment_cloud, FilterResult, FilterState, FilterStats, SegmentedCloud};
pub use crate::graph::{build_similarity_graph, extract_regions, Region, SimilarityGraph, SimilarityMeasures};
pub use crate::ingest::{parse_points, prepare_scan_lines, read_las, read_xyzl, write_xyzl, InputFormat, ScanLine};
pub use crate::noise::{estimate_sigma_z, sigma_dslope, suggest_tdslope, NoiseEstimate};
pub use crate::params::FilterParams;
pub use crate::point::{Bounds, Label, PointRecord};
pub use crate::segments::{dslope, segment_lines, LineSegment};
pub use crate::synth::{generate_scene, Feature, Rect, SceneSpec, SurfaceKind, SyntheticScene, Terrain};
