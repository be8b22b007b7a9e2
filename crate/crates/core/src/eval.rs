//! Type I/II error reports, labeling cross-tabs and parameter sweeps.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::filter::segment_cloud;
use crate::params::FilterParams;
use crate::point::{Label, PointRecord};

/// Which points enter the error denominators.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum EvaluatedSet {
    /// Points the filter left unclassified are excluded.
    #[default]
    SegmentedOnly,
    /// Every point; an unclassified true-ground point counts as a Type I error.
    AllPoints,
}

impl FromStr for EvaluatedSet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "segmented" | "segmented-only" => Ok(EvaluatedSet::SegmentedOnly),
            "all" | "all-points" => Ok(EvaluatedSet::AllPoints),
            other => Err(Error::InvalidParam {
                name: "evaluated_set",
                message: format!("expected `segmented` or `all`, got `{other}`"),
            }),
        }
    }
}

impl fmt::Display for EvaluatedSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EvaluatedSet::SegmentedOnly => "segmented-only",
            EvaluatedSet::AllPoints => "all-points",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ErrorReport {
    /// True-ground points in the evaluated set.
    pub n_ground_truth: usize,
    pub n_nonground_truth: usize,
    /// True-ground points labeled anything but ground.
    pub type1_count: usize,
    /// True-non-ground points labeled ground.
    pub type2_count: usize,
    /// Points left out of the evaluated set.
    pub n_excluded: usize,
    pub type1: f64,
    pub type2: f64,
    pub total_error: f64,
    pub evaluated_set: EvaluatedSet,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Type I and Type II error fractions of `predicted` against `truth`.
///
/// Truth labels must be ground or non-ground.
pub fn error_report(predicted: &[Label], truth: &[Label], set: EvaluatedSet) -> Result<ErrorReport> {
    if predicted.len() != truth.len() {
        return Err(Error::LengthMismatch {
            left: predicted.len(),
            right: truth.len(),
        });
    }
    let (mut ng, mut nn, mut e1, mut e2, mut excluded) = (0, 0, 0, 0, 0);
    for (i, (&p, &t)) in predicted.iter().zip(truth).enumerate() {
        if set == EvaluatedSet::SegmentedOnly && !matches!(p, Label::Ground | Label::NonGround) {
            excluded += 1;
            continue;
        }
        match t {
            Label::Ground => {
                ng += 1;
                if p != Label::Ground {
                    e1 += 1;
                }
            }
            Label::NonGround => {
                nn += 1;
                if p == Label::Ground {
                    e2 += 1;
                }
            }
            other => {
                return Err(Error::InvalidLabel(format!(
                    "truth label of point {i} is {other}, expected ground or non-ground"
                )))
            }
        }
    }
    Ok(ErrorReport {
        n_ground_truth: ng,
        n_nonground_truth: nn,
        type1_count: e1,
        type2_count: e2,
        n_excluded: excluded,
        type1: ratio(e1, ng),
        type2: ratio(e2, nn),
        total_error: ratio(e1 + e2, ng + nn),
        evaluated_set: set,
    })
}

impl ErrorReport {
    pub const CSV_HEADER: &'static str =
        "evaluated_set,n_ground_truth,n_nonground_truth,type1_count,type2_count,n_excluded,type1,type2,total_error";

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let rows: [(&str, String); 8] = [
            ("evaluated set", self.evaluated_set.to_string()),
            ("truth ground", self.n_ground_truth.to_string()),
            ("truth non-ground", self.n_nonground_truth.to_string()),
            ("excluded", self.n_excluded.to_string()),
            (
                "type I",
                format!("{:.4} ({} pts)", self.type1, self.type1_count),
            ),
            (
                "type II",
                format!("{:.4} ({} pts)", self.type2, self.type2_count),
            ),
            ("total error", format!("{:.4}", self.total_error)),
            (
                "type I / II %",
                format!("{:.2} / {:.2}", 100.0 * self.type1, 100.0 * self.type2),
            ),
        ];
        for (k, v) in rows {
            let _ = writeln!(s, "{k:<18}{v}");
        }
        s
    }

    pub fn to_csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{:.6},{:.6},{:.6}",
            self.evaluated_set,
            self.n_ground_truth,
            self.n_nonground_truth,
            self.type1_count,
            self.type2_count,
            self.n_excluded,
            self.type1,
            self.type2,
            self.total_error
        )
    }
}

const OVERLAY_CLASSES: [Label; 3] = [Label::Ground, Label::NonGround, Label::Unclassified];

fn overlay_class(l: Label) -> usize {
    match l {
        Label::Ground => 0,
        Label::NonGround => 1,
        Label::Unclassified | Label::Unlabeled => 2,
    }
}

/// Cross-tabulation of two labelings over ground / non-ground / unclassified.
/// Rows follow `a`, columns follow `b`.
#[derive(Clone, Debug, PartialEq)]
pub struct OverlayTable {
    pub counts: [[usize; 3]; 3],
    pub fractions: [[f64; 3]; 3],
    pub total: usize,
}

pub fn overlay_compare(a: &[Label], b: &[Label]) -> Result<OverlayTable> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    let mut counts = [[0usize; 3]; 3];
    for (&la, &lb) in a.iter().zip(b) {
        counts[overlay_class(la)][overlay_class(lb)] += 1;
    }
    let mut fractions = [[0.0; 3]; 3];
    for (r, row) in counts.iter().enumerate() {
        for (c, &n) in row.iter().enumerate() {
            fractions[r][c] = ratio(n, a.len());
        }
    }
    Ok(OverlayTable {
        counts,
        fractions,
        total: a.len(),
    })
}

impl OverlayTable {
    /// Fraction of points on which both labelings agree.
    pub fn agreement(&self) -> f64 {
        (0..3).map(|i| self.fractions[i][i]).sum()
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = write!(s, "{:<14}", "a \\ b");
        for l in OVERLAY_CLASSES {
            let _ = write!(s, "{:>14}", l.to_string());
        }
        s.push('\n');
        for (r, l) in OVERLAY_CLASSES.iter().enumerate() {
            let _ = write!(s, "{:<14}", l.to_string());
            for c in 0..3 {
                let _ = write!(s, "{:>13.2}%", 100.0 * self.fractions[r][c]);
            }
            s.push('\n');
        }
        s
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("a,b,count,fraction\n");
        for (r, la) in OVERLAY_CLASSES.iter().enumerate() {
            for (c, lb) in OVERLAY_CLASSES.iter().enumerate() {
                let _ = writeln!(s, "{la},{lb},{},{:.6}", self.counts[r][c], self.fractions[r][c]);
            }
        }
        s
    }
}

/// Thresholds that can be swept.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepParameter {
    TDslope,
    TDh,
    TThetaDeg,
}

impl SweepParameter {
    pub fn name(self) -> &'static str {
        match self {
            SweepParameter::TDslope => "t_dslope",
            SweepParameter::TDh => "t_dh",
            SweepParameter::TThetaDeg => "t_theta_deg",
        }
    }

    pub fn apply(self, params: &mut FilterParams, value: f64) {
        match self {
            SweepParameter::TDslope => params.t_dslope = value,
            SweepParameter::TDh => params.t_dh = value,
            SweepParameter::TThetaDeg => params.t_theta_deg = value,
        }
    }
}

impl FromStr for SweepParameter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "t_dslope" | "tdslope" => Ok(SweepParameter::TDslope),
            "t_dh" | "tdh" => Ok(SweepParameter::TDh),
            "t_theta_deg" | "t_theta" | "ttheta" => Ok(SweepParameter::TThetaDeg),
            other => Err(Error::UnknownParameter(other.to_string())),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepResult {
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
    pub line_segment_counts: Vec<usize>,
    pub region_counts: Vec<usize>,
}

/// `(max - min) / min` of a count series; 0 for fewer than two entries.
pub fn relative_spread(counts: &[usize]) -> f64 {
    let (Some(&lo), Some(&hi)) = (counts.iter().min(), counts.iter().max()) else {
        return 0.0;
    };
    if lo == 0 {
        return if hi == 0 { 0.0 } else { f64::INFINITY };
    }
    (hi - lo) as f64 / lo as f64
}

impl SweepResult {
    pub fn region_spread(&self) -> f64 {
        relative_spread(&self.region_counts)
    }

    pub fn segment_spread(&self) -> f64 {
        relative_spread(&self.line_segment_counts)
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("{:>12}{:>12}{:>12}\n", self.parameter.name(), "segments", "regions");
        for i in 0..self.values.len() {
            let _ = writeln!(
                s,
                "{:>12}{:>12}{:>12}",
                self.values[i], self.line_segment_counts[i], self.region_counts[i]
            );
        }
        s
    }

    pub fn to_csv(&self) -> String {
        let mut s = format!("{},segments,regions\n", self.parameter.name());
        for i in 0..self.values.len() {
            let _ = writeln!(
                s,
                "{},{},{}",
                self.values[i], self.line_segment_counts[i], self.region_counts[i]
            );
        }
        s
    }
}

/// Rerun segmentation and region extraction for each value of one threshold.
pub fn sensitivity_sweep(
    points: &[PointRecord],
    params: &FilterParams,
    parameter: SweepParameter,
    values: &[f64],
) -> Result<SweepResult> {
    let counts: Vec<(usize, usize)> = values
        .par_iter()
        .map(|&v| {
            let mut p = params.clone();
            parameter.apply(&mut p, v);
            let cloud = segment_cloud(points, &p)?;
            Ok((cloud.segments().len(), cloud.regions.len()))
        })
        .collect::<Result<_>>()?;
    Ok(SweepResult {
        parameter,
        values: values.to_vec(),
        line_segment_counts: counts.iter().map(|c| c.0).collect(),
        region_counts: counts.iter().map(|c| c.1).collect(),
    })
}
