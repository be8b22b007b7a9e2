//! Minimal LAS 1.2 support: point formats 0 and 1, no VLR interpretation.

use std::io::{Cursor, Read, Seek, SeekFrom, Write};

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};

use crate::error::{Error, Result};
use crate::point::{Label, PointRecord};

const HEADER_SIZE_1_2: u16 = 227;
const FORMAT0_LEN: u16 = 20;
const FORMAT1_LEN: u16 = 28;

const SCAN_DIRECTION_BIT: u8 = 0x40;
const EDGE_OF_FLIGHT_LINE_BIT: u8 = 0x80;

fn las_err(offset: u64, message: impl Into<String>) -> Error {
    Error::Las {
        offset,
        message: message.into(),
    }
}

struct Header {
    offset_to_points: u32,
    format: u8,
    record_len: u16,
    count: u32,
    scale: [f64; 3],
    offset: [f64; 3],
}

fn read_header(cur: &mut Cursor<&[u8]>) -> Result<Header> {
    let len = cur.get_ref().len() as u64;
    if len < HEADER_SIZE_1_2 as u64 {
        return Err(las_err(len, "file shorter than a LAS 1.2 header"));
    }
    let mut sig = [0u8; 4];
    cur.read_exact(&mut sig)?;
    if &sig != b"LASF" {
        return Err(las_err(0, "missing LASF signature"));
    }
    cur.seek(SeekFrom::Start(24))?;
    let major = cur.read_u8()?;
    let minor = cur.read_u8()?;
    if major != 1 || minor > 4 {
        return Err(las_err(24, format!("unsupported LAS version {major}.{minor}")));
    }
    cur.seek(SeekFrom::Start(96))?;
    let offset_to_points = cur.read_u32::<LittleEndian>()?;
    cur.seek(SeekFrom::Start(104))?;
    let format = cur.read_u8()?;
    let record_len = cur.read_u16::<LittleEndian>()?;
    let count = cur.read_u32::<LittleEndian>()?;
    let min_len = match format {
        0 => FORMAT0_LEN,
        1 => FORMAT1_LEN,
        other => {
            return Err(las_err(104, format!("unsupported point format {other}")));
        }
    };
    if record_len < min_len {
        return Err(las_err(
            105,
            format!("record length {record_len} too short for format {format}"),
        ));
    }
    cur.seek(SeekFrom::Start(131))?;
    let mut scale = [0.0; 3];
    for s in scale.iter_mut() {
        *s = cur.read_f64::<LittleEndian>()?;
    }
    let mut offset = [0.0; 3];
    for o in offset.iter_mut() {
        *o = cur.read_f64::<LittleEndian>()?;
    }
    if scale.iter().any(|s| !s.is_finite() || *s == 0.0) {
        return Err(las_err(131, "invalid scale factor"));
    }
    Ok(Header {
        offset_to_points,
        format,
        record_len,
        count,
        scale,
        offset,
    })
}

/// Read a LAS stream. Scan lines are numbered from 0 and advance after
/// every point whose edge-of-flight-line bit is set.
pub fn read_las<R: Read>(mut source: R) -> Result<Vec<PointRecord>> {
    let mut bytes = Vec::new();
    source.read_to_end(&mut bytes)?;
    let mut cur = Cursor::new(bytes.as_slice());
    let header = read_header(&mut cur)?;
    log::debug!(
        "LAS point format {}, {} records of {} bytes",
        header.format,
        header.count,
        header.record_len
    );

    let start = header.offset_to_points as u64;
    let needed = start + header.count as u64 * header.record_len as u64;
    if needed > bytes.len() as u64 {
        return Err(las_err(
            bytes.len() as u64,
            format!("truncated point data: need {needed} bytes"),
        ));
    }

    let mut points = Vec::with_capacity(header.count as usize);
    let mut line = 0u32;
    for i in 0..header.count as u64 {
        let rec_start = start + i * header.record_len as u64;
        cur.seek(SeekFrom::Start(rec_start))?;
        let xi = cur.read_i32::<LittleEndian>()?;
        let yi = cur.read_i32::<LittleEndian>()?;
        let zi = cur.read_i32::<LittleEndian>()?;
        let _intensity = cur.read_u16::<LittleEndian>()?;
        let flags = cur.read_u8()?;

        let id = points.len();
        let x = xi as f64 * header.scale[0] + header.offset[0];
        let y = yi as f64 * header.scale[1] + header.offset[1];
        let z = zi as f64 * header.scale[2] + header.offset[2];
        let mut p = PointRecord::new(id, x, y, z).with_line(line);
        if !p.is_finite() {
            return Err(Error::NonFinite { id });
        }
        p.dir_flag = flags & SCAN_DIRECTION_BIT != 0;
        p.eol_flag = flags & EDGE_OF_FLIGHT_LINE_BIT != 0;
        if p.eol_flag {
            line += 1;
        }
        points.push(p);
    }
    Ok(points)
}

fn classification(label: Label) -> u8 {
    match label {
        Label::Unlabeled => 0,
        Label::Unclassified | Label::NonGround => 1,
        Label::Ground => 2,
    }
}

/// Write points as LAS 1.2, point format 0, with the given coordinate scale.
///
/// The scan-direction and edge-of-flight-line bits are taken from the
/// records; labels map to ASPRS classes (2 ground, 1 other, 0 never classified).
pub fn write_las<W: Write>(points: &[PointRecord], scale: f64, mut out: W) -> Result<()> {
    if !(scale.is_finite() && scale > 0.0) {
        return Err(Error::InvalidParam {
            name: "scale",
            message: format!("must be positive, got {scale}"),
        });
    }
    let mut min = [f64::INFINITY; 3];
    let mut max = [f64::NEG_INFINITY; 3];
    for p in points {
        for (k, v) in [p.x, p.y, p.z].into_iter().enumerate() {
            min[k] = min[k].min(v);
            max[k] = max[k].max(v);
        }
    }
    if points.is_empty() {
        min = [0.0; 3];
        max = [0.0; 3];
    }
    let offset = [min[0].floor(), min[1].floor(), min[2].floor()];

    let mut h = Vec::with_capacity(HEADER_SIZE_1_2 as usize);
    h.extend_from_slice(b"LASF");
    h.write_u16::<LittleEndian>(0)?; // file source id
    h.write_u16::<LittleEndian>(0)?; // global encoding
    h.extend_from_slice(&[0u8; 16]); // project GUID
    h.write_u8(1)?;
    h.write_u8(2)?;
    let mut name = [0u8; 32];
    name[..7].copy_from_slice(b"scanseg");
    h.extend_from_slice(&name); // system identifier
    h.extend_from_slice(&name); // generating software
    h.write_u16::<LittleEndian>(1)?; // creation day
    h.write_u16::<LittleEndian>(2024)?; // creation year
    h.write_u16::<LittleEndian>(HEADER_SIZE_1_2)?;
    h.write_u32::<LittleEndian>(HEADER_SIZE_1_2 as u32)?;
    h.write_u32::<LittleEndian>(0)?; // VLR count
    h.write_u8(0)?; // point format
    h.write_u16::<LittleEndian>(FORMAT0_LEN)?;
    h.write_u32::<LittleEndian>(points.len() as u32)?;
    h.write_u32::<LittleEndian>(points.len() as u32)?;
    for _ in 0..4 {
        h.write_u32::<LittleEndian>(0)?;
    }
    for _ in 0..3 {
        h.write_f64::<LittleEndian>(scale)?;
    }
    for o in offset {
        h.write_f64::<LittleEndian>(o)?;
    }
    for k in 0..3 {
        h.write_f64::<LittleEndian>(max[k])?;
        h.write_f64::<LittleEndian>(min[k])?;
    }
    debug_assert_eq!(h.len(), HEADER_SIZE_1_2 as usize);
    out.write_all(&h)?;

    let quantize = |v: f64, k: usize| -> Result<i32> {
        let q = ((v - offset[k]) / scale).round();
        if q < i32::MIN as f64 || q > i32::MAX as f64 {
            return Err(Error::InvalidParam {
                name: "scale",
                message: format!("coordinate {v} overflows at scale {scale}"),
            });
        }
        Ok(q as i32)
    };
    for p in points {
        out.write_i32::<LittleEndian>(quantize(p.x, 0)?)?;
        out.write_i32::<LittleEndian>(quantize(p.y, 1)?)?;
        out.write_i32::<LittleEndian>(quantize(p.z, 2)?)?;
        out.write_u16::<LittleEndian>(0)?;
        let mut flags = 0x09u8; // return 1 of 1
        if p.dir_flag {
            flags |= SCAN_DIRECTION_BIT;
        }
        if p.eol_flag {
            flags |= EDGE_OF_FLIGHT_LINE_BIT;
        }
        out.write_u8(flags)?;
        out.write_u8(classification(p.label))?;
        out.write_i8(0)?;
        out.write_u8(0)?;
        out.write_u16::<LittleEndian>(0)?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Vec<PointRecord> {
        let mut pts = Vec::new();
        for i in 0..6 {
            let mut p = PointRecord::new(i, 100.0 + i as f64 * 0.5, 200.25, 12.5 + i as f64 * 0.01);
            p.eol_flag = i == 2 || i == 5;
            p.dir_flag = i >= 3;
            pts.push(p);
        }
        pts
    }

    #[test]
    fn edge_bits_split_scan_lines() {
        let mut buf = Vec::new();
        write_las(&sample(), 0.001, &mut buf).unwrap();
        let pts = read_las(buf.as_slice()).unwrap();
        assert_eq!(pts.len(), 6);
        let lines: Vec<u32> = pts.iter().map(|p| p.scan_line.unwrap()).collect();
        assert_eq!(lines, vec![0, 0, 0, 1, 1, 1]);
        assert!(pts[3].dir_flag && !pts[0].dir_flag);
        assert!((pts[4].x - 102.0).abs() < 1e-9);
        assert!((pts[4].z - 12.54).abs() < 1e-9);
        assert_eq!(pts[5].id, 5);
    }

    #[test]
    fn rejects_bad_signature_and_truncation() {
        let mut buf = Vec::new();
        write_las(&sample(), 0.01, &mut buf).unwrap();
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(matches!(read_las(bad.as_slice()), Err(Error::Las { offset: 0, .. })));
        let short = &buf[..buf.len() - 3];
        assert!(matches!(read_las(short), Err(Error::Las { .. })));
        assert!(matches!(read_las(&buf[..100]), Err(Error::Las { .. })));
    }

    #[test]
    fn rejects_unsupported_point_format() {
        let mut buf = Vec::new();
        write_las(&sample(), 0.01, &mut buf).unwrap();
        buf[104] = 3;
        assert!(matches!(read_las(buf.as_slice()), Err(Error::Las { offset: 104, .. })));
    }

    #[test]
    fn reads_format_one_with_padding() {
        // Convert a format 0 file into format 1 records with 4 extra bytes.
        let mut buf = Vec::new();
        write_las(&sample(), 0.01, &mut buf).unwrap();
        let header = &buf[..227];
        let mut out = header.to_vec();
        out[104] = 1;
        out[105..107].copy_from_slice(&32u16.to_le_bytes());
        for rec in buf[227..].chunks(20) {
            out.extend_from_slice(rec);
            out.extend_from_slice(&[0u8; 12]);
        }
        let pts = read_las(out.as_slice()).unwrap();
        assert_eq!(pts.len(), 6);
        assert!((pts[1].x - 100.5).abs() < 1e-9);
        assert_eq!(pts[5].scan_line, Some(1));
    }
}
