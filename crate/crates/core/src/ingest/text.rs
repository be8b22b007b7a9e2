use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::point::PointRecord;

/// Read `x y z scan_line_id` rows. Blank lines and `#` comments are skipped.
///
/// The end-of-line flag is set on the last row before the scan line id
/// changes, and the direction flag toggles at each change, mimicking what a
/// sensor would have recorded.
pub fn read_xyzl<R: BufRead>(reader: R) -> Result<Vec<PointRecord>> {
    let mut points: Vec<PointRecord> = Vec::new();
    let mut dir = false;
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        if fields.len() != 4 {
            return Err(Error::parse(
                line_no,
                format!("expected 4 columns `x y z scan_line`, found {}", fields.len()),
            ));
        }
        let coord = |i: usize, name: &str| -> Result<f64> {
            fields[i]
                .parse::<f64>()
                .map_err(|e| Error::parse(line_no, format!("bad {name} value `{}`: {e}", fields[i])))
        };
        let (x, y, z) = (coord(0, "x")?, coord(1, "y")?, coord(2, "z")?);
        let scan_line = fields[3].parse::<u32>().map_err(|e| {
            Error::parse(line_no, format!("bad scan line id `{}`: {e}", fields[3]))
        })?;

        let id = points.len();
        let mut p = PointRecord::new(id, x, y, z).with_line(scan_line);
        if !p.is_finite() {
            return Err(Error::NonFinite { id });
        }
        if let Some(prev) = points.last_mut() {
            if prev.scan_line != Some(scan_line) {
                prev.eol_flag = true;
                dir = !dir;
            }
        }
        p.dir_flag = dir;
        points.push(p);
    }
    if let Some(last) = points.last_mut() {
        last.eol_flag = true;
    }
    Ok(points)
}

/// Write points as `x y z scan_line_id` rows with fixed precision.
///
/// Points without a scan line are written with line 0.
pub fn write_xyzl<W: Write>(points: &[PointRecord], mut out: W) -> Result<()> {
    for p in points {
        writeln!(
            out,
            "{:.4} {:.4} {:.4} {}",
            p.x,
            p.y,
            p.z,
            p.scan_line.unwrap_or(0)
        )?;
    }
    out.flush()?;
    Ok(())
}
