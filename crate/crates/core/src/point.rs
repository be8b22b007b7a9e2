use std::fmt;

use crate::error::{Error, Result};

/// Classification state of a single return.
///
/// `Unlabeled` is transient; every point leaves the pipeline as one of the
/// other three.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    #[default]
    Unlabeled,
    Ground,
    NonGround,
    Unclassified,
}

impl Label {
    /// Integer code used by the labeled-point and truth files.
    pub fn code(self) -> Option<i8> {
        match self {
            Label::Ground => Some(1),
            Label::NonGround => Some(0),
            Label::Unclassified => Some(-1),
            Label::Unlabeled => None,
        }
    }

    pub fn from_code(code: i64) -> Result<Self> {
        match code {
            1 => Ok(Label::Ground),
            0 => Ok(Label::NonGround),
            -1 => Ok(Label::Unclassified),
            other => Err(Error::InvalidLabel(format!("unknown label code {other}"))),
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Label::Unlabeled => "unlabeled",
            Label::Ground => "ground",
            Label::NonGround => "non-ground",
            Label::Unclassified => "unclassified",
        };
        f.write_str(name)
    }
}

/// One laser return.
#[derive(Clone, Debug, PartialEq)]
pub struct PointRecord {
    /// Position in the input stream.
    pub id: usize,
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub scan_line: Option<u32>,
    /// Scan direction bit as recorded by the sensor.
    pub dir_flag: bool,
    /// Set on the last return of a scan line.
    pub eol_flag: bool,
    pub label: Label,
}

impl PointRecord {
    pub fn new(id: usize, x: f64, y: f64, z: f64) -> Self {
        PointRecord {
            id,
            x,
            y,
            z,
            scan_line: None,
            dir_flag: false,
            eol_flag: false,
            label: Label::Unlabeled,
        }
    }

    pub fn with_line(mut self, line: u32) -> Self {
        self.scan_line = Some(line);
        self
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn horizontal_distance(&self, other: &PointRecord) -> f64 {
        (other.x - self.x).hypot(other.y - self.y)
    }
}

/// Horizontal extent of a set of points.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bounds {
    pub min_x: f64,
    pub min_y: f64,
    pub max_x: f64,
    pub max_y: f64,
}

impl Bounds {
    pub fn of_points<'a, I>(points: I) -> Option<Bounds>
    where
        I: IntoIterator<Item = &'a PointRecord>,
    {
        let mut iter = points.into_iter();
        let first = iter.next()?;
        let mut b = Bounds {
            min_x: first.x,
            min_y: first.y,
            max_x: first.x,
            max_y: first.y,
        };
        for p in iter {
            b.min_x = b.min_x.min(p.x);
            b.min_y = b.min_y.min(p.y);
            b.max_x = b.max_x.max(p.x);
            b.max_y = b.max_y.max(p.y);
        }
        Some(b)
    }

    pub fn width(&self) -> f64 {
        self.max_x - self.min_x
    }

    pub fn height(&self) -> f64 {
        self.max_y - self.min_y
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.min_x && x <= self.max_x && y >= self.min_y && y <= self.max_y
    }
}
