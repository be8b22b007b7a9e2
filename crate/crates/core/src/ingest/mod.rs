//! Reading point clouds and rebuilding their natural scan lines.

mod las;
mod scanline;
mod text;

use std::io::Read;

pub use self::las::{read_las, write_las};
pub use self::scanline::{
    extract_scan_lines, orient_canonical, prepare_scan_lines, remove_backscan, PreparedLines,
    ScanLine,
};
pub use self::text::{read_xyzl, write_xyzl};

use crate::error::Result;
use crate::point::PointRecord;

/// Supported on-disk point formats.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InputFormat {
    /// Whitespace-delimited `x y z scan_line_id` rows.
    XyzlText,
    /// ASPRS LAS 1.2, point record formats 0 and 1.
    Las,
}

impl InputFormat {
    /// Guess the format from a file extension (`.las` is LAS, anything else text).
    pub fn from_extension(path: &std::path::Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("las") => InputFormat::Las,
            _ => InputFormat::XyzlText,
        }
    }
}

/// Parse a byte stream into point records with sequential ids.
pub fn parse_points<R: Read>(source: R, format: InputFormat) -> Result<Vec<PointRecord>> {
    match format {
        InputFormat::XyzlText => read_xyzl(std::io::BufReader::new(source)),
        InputFormat::Las => read_las(source),
    }
}
