//! Synthetic scan-line scenes with exact per-point truth labels.
//!
//! Scan lines run along +x/-x in serpentine order, one every
//! `line_spacing` metres of y. Features are evaluated in listed order and
//! the last one covering a position wins.

use std::fmt::Write as _;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::point::{Label, PointRecord};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Terrain {
    Flat,
    /// Flat up to `start_x`, then rising with `slope` along +x.
    Ramp { slope: f64, start_x: f64 },
    /// `amplitude * sin(2 pi x / wavelength) * sin(2 pi y / wavelength)`.
    Hill { amplitude: f64, wavelength: f64 },
}

impl Terrain {
    fn height(&self, x: f64, y: f64) -> f64 {
        match *self {
            Terrain::Flat => 0.0,
            Terrain::Ramp { slope, start_x } => slope * (x - start_x).max(0.0),
            Terrain::Hill { amplitude, wavelength } => {
                let k = std::f64::consts::TAU / wavelength;
                amplitude * (k * x).sin() * (k * y).sin()
            }
        }
    }
}

/// Axis-aligned footprint.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rect {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl Rect {
    pub fn new(xa: f64, ya: f64, xb: f64, yb: f64) -> Self {
        Rect {
            x0: xa.min(xb),
            y0: ya.min(yb),
            x1: xa.max(xb),
            y1: ya.max(yb),
        }
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.x0 && x <= self.x1 && y >= self.y0 && y <= self.y1
    }

    fn center(&self) -> (f64, f64) {
        (0.5 * (self.x0 + self.x1), 0.5 * (self.y0 + self.y1))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Feature {
    /// Flat roof `height` above the terrain at the footprint centre.
    BoxBuilding { footprint: Rect, height: f64 },
    /// Two roof planes meeting at a ridge along the footprint's longer side.
    GableBuilding {
        footprint: Rect,
        ridge_height: f64,
        pitch_deg: f64,
    },
    /// Terrain to the right of the directed line `start -> end` (extended
    /// indefinitely) is lowered by `drop`.
    Cliff { start: [f64; 2], end: [f64; 2], drop: f64 },
    /// Circular crown; each return inside it hits canopy with probability
    /// `density`, at a random height in `[min_height, max_height]`.
    TreeCluster {
        center: [f64; 2],
        radius: f64,
        density: f64,
        min_height: f64,
        max_height: f64,
    },
    Car { footprint: Rect, height: f64 },
}

impl Feature {
    fn covers(&self, x: f64, y: f64) -> bool {
        match self {
            Feature::BoxBuilding { footprint, .. }
            | Feature::GableBuilding { footprint, .. }
            | Feature::Car { footprint, .. } => footprint.contains(x, y),
            Feature::TreeCluster { center, radius, .. } => {
                (x - center[0]).hypot(y - center[1]) <= *radius
            }
            Feature::Cliff { .. } => false,
        }
    }

    fn is_building(&self) -> bool {
        matches!(self, Feature::BoxBuilding { .. } | Feature::GableBuilding { .. })
    }
}

/// What a synthetic return hit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SurfaceKind {
    Terrain,
    Roof,
    Wall,
    Car,
    Canopy,
}

impl SurfaceKind {
    pub fn truth(self) -> Label {
        match self {
            SurfaceKind::Terrain => Label::Ground,
            _ => Label::NonGround,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SceneSpec {
    /// Width (x) and depth (y) in metres.
    pub extent: (f64, f64),
    pub line_spacing: f64,
    pub point_spacing: f64,
    pub terrain: Terrain,
    pub features: Vec<Feature>,
    pub noise_sigma_z: f64,
    pub outlier_fraction: f64,
    pub outlier_dz: f64,
    pub rng_seed: u64,
    /// Probability of a back-scanned return after each sample.
    pub backscan_fraction: f64,
    /// Vertical spacing of returns on building walls.
    pub wall_step: f64,
}

impl Default for SceneSpec {
    fn default() -> Self {
        SceneSpec {
            extent: (100.0, 100.0),
            line_spacing: 0.6,
            point_spacing: 0.4,
            terrain: Terrain::Flat,
            features: Vec::new(),
            noise_sigma_z: 0.0,
            outlier_fraction: 0.0,
            outlier_dz: 50.0,
            rng_seed: 0,
            backscan_fraction: 0.0,
            wall_step: 1.0,
        }
    }
}

impl SceneSpec {
    /// Reference town: flat ground turning into a 5% ramp, a 3 m cliff, three
    /// flat-roofed blocks, a 25 degree gable house, two tree stands and four cars.
    pub fn standard_town() -> SceneSpec {
        let r = Rect::new;
        SceneSpec {
            extent: (200.0, 200.0),
            line_spacing: 0.6,
            point_spacing: 0.4,
            terrain: Terrain::Ramp {
                slope: 0.05,
                start_x: 120.0,
            },
            features: vec![
                Feature::Cliff {
                    start: [0.0, 35.0],
                    end: [200.0, 55.0],
                    drop: 3.0,
                },
                Feature::BoxBuilding {
                    footprint: r(20.0, 80.0, 45.0, 100.0),
                    height: 10.0,
                },
                Feature::BoxBuilding {
                    footprint: r(60.0, 115.0, 90.0, 135.0),
                    height: 8.0,
                },
                Feature::BoxBuilding {
                    footprint: r(140.0, 85.0, 160.0, 110.0),
                    height: 12.0,
                },
                Feature::GableBuilding {
                    footprint: r(70.0, 160.0, 100.0, 172.0),
                    ridge_height: 9.0,
                    pitch_deg: 25.0,
                },
                Feature::TreeCluster {
                    center: [30.0, 165.0],
                    radius: 7.0,
                    density: 1.0,
                    min_height: 4.0,
                    max_height: 14.0,
                },
                Feature::TreeCluster {
                    center: [150.0, 165.0],
                    radius: 9.0,
                    density: 1.0,
                    min_height: 5.0,
                    max_height: 16.0,
                },
                Feature::Car {
                    footprint: r(110.0, 70.0, 114.5, 71.8),
                    height: 1.5,
                },
                Feature::Car {
                    footprint: r(120.0, 75.0, 121.8, 79.5),
                    height: 1.5,
                },
                Feature::Car {
                    footprint: r(40.0, 62.0, 44.5, 63.8),
                    height: 1.5,
                },
                Feature::Car {
                    footprint: r(100.0, 100.0, 101.8, 104.5),
                    height: 1.5,
                },
            ],
            noise_sigma_z: 0.05,
            outlier_fraction: 0.0,
            outlier_dz: 50.0,
            rng_seed: 42,
            backscan_fraction: 0.0,
            wall_step: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidScene(m));
        let (w, h) = self.extent;
        if !(w > 0.0 && h > 0.0 && w.is_finite() && h.is_finite()) {
            return bad(format!("extent must be positive, got {w} x {h}"));
        }
        if !(self.line_spacing > 0.0 && self.point_spacing > 0.0) {
            return bad("spacings must be positive".into());
        }
        if self.wall_step.is_nan() || self.wall_step <= 0.0 {
            return bad("wall_step must be positive".into());
        }
        if self.noise_sigma_z.is_nan() || self.noise_sigma_z < 0.0 {
            return bad("noise_sigma_z must be non-negative".into());
        }
        for (name, f) in [
            ("outlier_fraction", self.outlier_fraction),
            ("backscan_fraction", self.backscan_fraction),
        ] {
            if !(0.0..=1.0).contains(&f) {
                return bad(format!("{name} must lie in [0, 1], got {f}"));
            }
        }
        if let Terrain::Hill { wavelength, .. } = self.terrain {
            if wavelength.is_nan() || wavelength <= 0.0 {
                return bad("hill wavelength must be positive".into());
            }
        }
        let inside = |x: f64, y: f64| (0.0..=w).contains(&x) && (0.0..=h).contains(&y);
        let rect_inside = |r: &Rect| inside(r.x0, r.y0) && inside(r.x1, r.y1);
        for (i, f) in self.features.iter().enumerate() {
            let ok = match f {
                Feature::BoxBuilding { footprint, height } | Feature::Car { footprint, height } => {
                    rect_inside(footprint) && *height > 0.0
                }
                Feature::GableBuilding {
                    footprint,
                    ridge_height,
                    pitch_deg,
                } => {
                    let half = 0.5 * (footprint.x1 - footprint.x0).min(footprint.y1 - footprint.y0);
                    rect_inside(footprint)
                        && *pitch_deg > 0.0
                        && *pitch_deg < 90.0
                        && ridge_height - half * pitch_deg.to_radians().tan() > 0.0
                }
                Feature::Cliff { start, end, drop } => {
                    inside(start[0], start[1]) && inside(end[0], end[1]) && start != end && *drop > 0.0
                }
                Feature::TreeCluster {
                    center,
                    radius,
                    density,
                    min_height,
                    max_height,
                } => {
                    inside(center[0], center[1])
                        && *radius > 0.0
                        && (0.0..=1.0).contains(density)
                        && *min_height >= 0.0
                        && max_height >= min_height
                }
            };
            if !ok {
                return bad(format!("feature {i} is invalid or outside the extent: {f:?}"));
            }
        }
        Ok(())
    }

    fn ground(&self, x: f64, y: f64) -> f64 {
        let mut z = self.terrain.height(x, y);
        for f in &self.features {
            if let Feature::Cliff { start, end, drop } = f {
                let cross = (end[0] - start[0]) * (y - start[1]) - (end[1] - start[1]) * (x - start[0]);
                if cross < 0.0 {
                    z -= drop;
                }
            }
        }
        z
    }

    fn object_at(&self, x: f64, y: f64) -> Option<usize> {
        self.features.iter().rposition(|f| f.covers(x, y))
    }

    /// Deterministic surface height and kind; canopy is reported at ground
    /// level (its height is random).
    fn surface(&self, x: f64, y: f64, obj: Option<usize>) -> (f64, SurfaceKind) {
        let Some(i) = obj else {
            return (self.ground(x, y), SurfaceKind::Terrain);
        };
        match self.features[i] {
            Feature::BoxBuilding { footprint, height } => {
                let (cx, cy) = footprint.center();
                (self.ground(cx, cy) + height, SurfaceKind::Roof)
            }
            Feature::Car { footprint, height } => {
                let (cx, cy) = footprint.center();
                (self.ground(cx, cy) + height, SurfaceKind::Car)
            }
            Feature::GableBuilding {
                footprint,
                ridge_height,
                pitch_deg,
            } => {
                let (cx, cy) = footprint.center();
                let ridge_along_x = footprint.x1 - footprint.x0 >= footprint.y1 - footprint.y0;
                let off = if ridge_along_x { (y - cy).abs() } else { (x - cx).abs() };
                let z = self.ground(cx, cy) + ridge_height - off * pitch_deg.to_radians().tan();
                (z, SurfaceKind::Roof)
            }
            Feature::TreeCluster { .. } => (self.ground(x, y), SurfaceKind::Canopy),
            Feature::Cliff { .. } => unreachable!("cliffs never cover a position"),
        }
    }
}

/// Generated points with their ground truth.
#[derive(Clone, Debug, Default)]
pub struct SyntheticScene {
    pub points: Vec<PointRecord>,
    pub truth: Vec<Label>,
    pub kinds: Vec<SurfaceKind>,
    /// Index into `SceneSpec::features` of the object hit, if any.
    pub feature: Vec<Option<usize>>,
    pub outlier: Vec<bool>,
    pub backscan: Vec<bool>,
}

impl SyntheticScene {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

struct Sample {
    x: f64,
    y: f64,
    z: f64,
    kind: SurfaceKind,
    feature: Option<usize>,
    backscan: bool,
}

fn canopy_sample(spec: &SceneSpec, x: f64, y: f64, i: usize, rng: &mut ChaCha8Rng) -> (f64, SurfaceKind) {
    if let Feature::TreeCluster {
        density,
        min_height,
        max_height,
        ..
    } = spec.features[i]
    {
        if rng.random::<f64>() < density {
            let h = if max_height > min_height {
                rng.random_range(min_height..max_height)
            } else {
                min_height
            };
            return (spec.ground(x, y) + h, SurfaceKind::Canopy);
        }
    }
    (spec.ground(x, y), SurfaceKind::Terrain)
}

fn sample_at(spec: &SceneSpec, x: f64, y: f64, rng: &mut ChaCha8Rng) -> Sample {
    let obj = spec.object_at(x, y);
    let (z, kind) = match obj {
        Some(i) if matches!(spec.features[i], Feature::TreeCluster { .. }) => canopy_sample(spec, x, y, i, rng),
        _ => spec.surface(x, y, obj),
    };
    let feature = if kind == SurfaceKind::Terrain { None } else { obj };
    Sample {
        x,
        y,
        z,
        kind,
        feature,
        backscan: false,
    }
}

/// Wall returns between two consecutive samples when a building edge lies between them.
fn wall_between(spec: &SceneSpec, y: f64, xa: f64, xb: f64, out: &mut Vec<Sample>) {
    let (oa, ob) = (spec.object_at(xa, y), spec.object_at(xb, y));
    if oa == ob {
        return;
    }
    let building = |o: Option<usize>| o.filter(|&i| spec.features[i].is_building());
    let (ba, bb) = (building(oa), building(ob));
    if ba.is_none() && bb.is_none() {
        return;
    }
    let (za, _) = spec.surface(xa, y, oa);
    let (zb, _) = spec.surface(xb, y, ob);
    let jump = zb - za;
    let m = (jump.abs() / spec.wall_step).ceil() as usize;
    if m < 2 {
        return;
    }
    let m = m - 1;
    let owner = match (ba, bb) {
        (Some(a), Some(b)) => Some(if za > zb { a } else { b }),
        (a, b) => a.or(b),
    };

    // Locate the edge by bisection on the object predicate.
    let (mut lo, mut hi) = (xa, xb);
    for _ in 0..40 {
        let mid = 0.5 * (lo + hi);
        if spec.object_at(mid, y) == oa {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let gap = xb - xa;
    let (lo_lim, hi_lim) = if gap > 0.0 {
        (xa + 0.25 * gap, xb - 0.25 * gap)
    } else {
        (xb - 0.25 * gap, xa + 0.25 * gap)
    };
    let centre = hi.clamp(lo_lim.min(hi_lim), lo_lim.max(hi_lim));
    let step = (0.02f64).min(0.4 * gap.abs() / m as f64) * gap.signum();
    for k in 0..m {
        let offset = (k as f64 - (m as f64 - 1.0) / 2.0) * step;
        out.push(Sample {
            x: centre + offset,
            y,
            z: za + jump * (k + 1) as f64 / (m + 1) as f64,
            kind: SurfaceKind::Wall,
            feature: owner,
            backscan: false,
        });
    }
}

fn generate_line(spec: &SceneSpec, k: usize) -> Vec<Sample> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.rng_seed);
    rng.set_stream(k as u64);
    let y = k as f64 * spec.line_spacing;
    let forward = (k & 1) == 0;
    let n = (spec.extent.0 / spec.point_spacing + 1e-9).floor() as usize + 1;
    let xs: Vec<f64> = if forward {
        (0..n).map(|i| i as f64 * spec.point_spacing).collect()
    } else {
        (0..n).rev().map(|i| i as f64 * spec.point_spacing).collect()
    };

    let mut out = Vec::with_capacity(n + n / 20);
    for (j, &x) in xs.iter().enumerate() {
        if j > 0 {
            wall_between(spec, y, xs[j - 1], x, &mut out);
        }
        out.push(sample_at(spec, x, y, &mut rng));
        if j > 0 && spec.backscan_fraction > 0.0 && rng.random::<f64>() < spec.backscan_fraction {
            let back = if forward { x - 0.5 * spec.point_spacing } else { x + 0.5 * spec.point_spacing };
            let mut s = sample_at(spec, back, y, &mut rng);
            s.backscan = true;
            out.push(s);
        }
    }
    out
}

/// Generate the scene described by `spec`. Output is fully determined by
/// `rng_seed`; each line draws from its own stream of that seed.
pub fn generate_scene(spec: &SceneSpec) -> Result<SyntheticScene> {
    spec.validate()?;
    let n_lines = (spec.extent.1 / spec.line_spacing + 1e-9).floor() as usize + 1;
    let noise = Normal::new(0.0, spec.noise_sigma_z).map_err(|e| Error::InvalidScene(e.to_string()))?;

    let lines: Vec<Vec<(Sample, bool)>> = (0..n_lines)
        .into_par_iter()
        .map(|k| {
            let mut samples = generate_line(spec, k);
            // Noise and outliers use a separate stream so geometry draws stay put.
            let mut rng = ChaCha8Rng::seed_from_u64(spec.rng_seed ^ 0x9E37_79B9_7F4A_7C15);
            rng.set_stream(k as u64);
            samples
                .drain(..)
                .map(|mut s| {
                    if spec.noise_sigma_z > 0.0 {
                        s.z += noise.sample(&mut rng);
                    }
                    let outlier = spec.outlier_fraction > 0.0 && rng.random::<f64>() < spec.outlier_fraction;
                    if outlier {
                        let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
                        s.z += sign * spec.outlier_dz;
                    }
                    (s, outlier)
                })
                .collect()
        })
        .collect();

    let mut scene = SyntheticScene::default();
    for (k, line) in lines.into_iter().enumerate() {
        let len = line.len();
        for (j, (s, outlier)) in line.into_iter().enumerate() {
            let id = scene.points.len();
            let mut p = PointRecord::new(id, s.x, s.y, s.z).with_line(k as u32);
            p.dir_flag = k % 2 == 1;
            p.eol_flag = j + 1 == len;
            scene.points.push(p);
            scene.truth.push(if outlier { Label::NonGround } else { s.kind.truth() });
            scene.kinds.push(s.kind);
            scene.feature.push(s.feature);
            scene.outlier.push(outlier);
            scene.backscan.push(s.backscan);
        }
    }
    Ok(scene)
}

fn parse_floats(key: &str, value: &str, line: usize) -> Result<Vec<f64>> {
    value
        .split_whitespace()
        .map(|t| {
            t.parse::<f64>()
                .map_err(|e| Error::parse(line, format!("{key}: bad number `{t}`: {e}")))
        })
        .collect()
}

fn expect_n(key: &str, v: Vec<f64>, n: usize, line: usize) -> Result<Vec<f64>> {
    if v.len() != n {
        return Err(Error::parse(line, format!("{key}: expected {n} numbers, got {}", v.len())));
    }
    Ok(v)
}

fn parse_feature(value: &str, line: usize) -> Result<Feature> {
    let (kind, rest) = value.split_once(char::is_whitespace).unwrap_or((value, ""));
    let nums = parse_floats(kind, rest, line)?;
    let f = match kind {
        "box" => {
            let v = expect_n(kind, nums, 5, line)?;
            Feature::BoxBuilding {
                footprint: Rect::new(v[0], v[1], v[2], v[3]),
                height: v[4],
            }
        }
        "gable" => {
            let v = expect_n(kind, nums, 6, line)?;
            Feature::GableBuilding {
                footprint: Rect::new(v[0], v[1], v[2], v[3]),
                ridge_height: v[4],
                pitch_deg: v[5],
            }
        }
        "cliff" => {
            let v = expect_n(kind, nums, 5, line)?;
            Feature::Cliff {
                start: [v[0], v[1]],
                end: [v[2], v[3]],
                drop: v[4],
            }
        }
        "trees" => {
            let v = expect_n(kind, nums, 6, line)?;
            Feature::TreeCluster {
                center: [v[0], v[1]],
                radius: v[2],
                density: v[3],
                min_height: v[4],
                max_height: v[5],
            }
        }
        "car" => {
            let v = expect_n(kind, nums, 5, line)?;
            Feature::Car {
                footprint: Rect::new(v[0], v[1], v[2], v[3]),
                height: v[4],
            }
        }
        other => return Err(Error::parse(line, format!("unknown feature `{other}`"))),
    };
    Ok(f)
}

impl FromStr for SceneSpec {
    type Err = Error;

    /// `key = value` lines; `#` starts a comment. `feature` may repeat.
    fn from_str(text: &str) -> Result<Self> {
        let mut spec = SceneSpec::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| Error::parse(line, "expected `key = value`"))?;
            let (key, value) = (key.trim(), value.trim());
            let scalar = |v: &str| -> Result<f64> {
                let nums = expect_n(key, parse_floats(key, v, line)?, 1, line)?;
                Ok(nums[0])
            };
            match key {
                "extent" => {
                    let v = expect_n(key, parse_floats(key, value, line)?, 2, line)?;
                    spec.extent = (v[0], v[1]);
                }
                "line_spacing" => spec.line_spacing = scalar(value)?,
                "point_spacing" => spec.point_spacing = scalar(value)?,
                "noise_sigma_z" => spec.noise_sigma_z = scalar(value)?,
                "outlier_fraction" => spec.outlier_fraction = scalar(value)?,
                "outlier_dz" => spec.outlier_dz = scalar(value)?,
                "backscan_fraction" => spec.backscan_fraction = scalar(value)?,
                "wall_step" => spec.wall_step = scalar(value)?,
                "rng_seed" => {
                    spec.rng_seed = value
                        .parse()
                        .map_err(|e| Error::parse(line, format!("rng_seed: {e}")))?
                }
                "terrain" => {
                    let (kind, rest) = value.split_once(char::is_whitespace).unwrap_or((value, ""));
                    let nums = parse_floats(kind, rest, line)?;
                    spec.terrain = match (kind, nums.as_slice()) {
                        ("flat", []) => Terrain::Flat,
                        ("ramp", [slope]) => Terrain::Ramp {
                            slope: *slope,
                            start_x: 0.0,
                        },
                        ("ramp", [slope, start_x]) => Terrain::Ramp {
                            slope: *slope,
                            start_x: *start_x,
                        },
                        ("hill", [amplitude, wavelength]) => Terrain::Hill {
                            amplitude: *amplitude,
                            wavelength: *wavelength,
                        },
                        _ => return Err(Error::parse(line, format!("bad terrain `{value}`"))),
                    };
                }
                "feature" => spec.features.push(parse_feature(value, line)?),
                other => return Err(Error::parse(line, format!("unknown key `{other}`"))),
            }
        }
        spec.validate()?;
        Ok(spec)
    }
}

impl SceneSpec {
    /// Inverse of the `key = value` parser.
    pub fn to_config_string(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "extent = {} {}", self.extent.0, self.extent.1);
        let _ = writeln!(s, "line_spacing = {}", self.line_spacing);
        let _ = writeln!(s, "point_spacing = {}", self.point_spacing);
        let terrain = match self.terrain {
            Terrain::Flat => "flat".to_string(),
            Terrain::Ramp { slope, start_x } => format!("ramp {slope} {start_x}"),
            Terrain::Hill { amplitude, wavelength } => format!("hill {amplitude} {wavelength}"),
        };
        let _ = writeln!(s, "terrain = {terrain}");
        let _ = writeln!(s, "noise_sigma_z = {}", self.noise_sigma_z);
        let _ = writeln!(s, "outlier_fraction = {}", self.outlier_fraction);
        let _ = writeln!(s, "outlier_dz = {}", self.outlier_dz);
        let _ = writeln!(s, "backscan_fraction = {}", self.backscan_fraction);
        let _ = writeln!(s, "wall_step = {}", self.wall_step);
        let _ = writeln!(s, "rng_seed = {}", self.rng_seed);
        for f in &self.features {
            let line = match f {
                Feature::BoxBuilding { footprint: r, height } => {
                    format!("box {} {} {} {} {}", r.x0, r.y0, r.x1, r.y1, height)
                }
                Feature::GableBuilding {
                    footprint: r,
                    ridge_height,
                    pitch_deg,
                } => format!("gable {} {} {} {} {} {}", r.x0, r.y0, r.x1, r.y1, ridge_height, pitch_deg),
                Feature::Cliff { start, end, drop } => {
                    format!("cliff {} {} {} {} {}", start[0], start[1], end[0], end[1], drop)
                }
                Feature::TreeCluster {
                    center,
                    radius,
                    density,
                    min_height,
                    max_height,
                } => format!(
                    "trees {} {} {} {} {} {}",
                    center[0], center[1], radius, density, min_height, max_height
                ),
                Feature::Car { footprint: r, height } => {
                    format!("car {} {} {} {} {}", r.x0, r.y0, r.x1, r.y1, height)
                }
            };
            let _ = writeln!(s, "feature = {line}");
        }
        s
    }
}
