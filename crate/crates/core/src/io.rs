//! Labeled-point and truth sidecar files.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::point::{Label, PointRecord};

fn code_of(label: Label) -> i8 {
    label.code().unwrap_or(-1)
}

/// One `x y z label` row per point; label is 1 ground, 0 non-ground, -1 unclassified.
pub fn write_labels<W: Write>(points: &[PointRecord], labels: &[Label], mut out: W) -> Result<()> {
    if points.len() != labels.len() {
        return Err(Error::LengthMismatch {
            left: points.len(),
            right: labels.len(),
        });
    }
    for (p, &l) in points.iter().zip(labels) {
        writeln!(out, "{:.4} {:.4} {:.4} {}", p.x, p.y, p.z, code_of(l))?;
    }
    out.flush()?;
    Ok(())
}

fn data_lines<R: BufRead>(input: R) -> impl Iterator<Item = Result<(usize, String)>> {
    input.lines().enumerate().filter_map(|(i, line)| match line {
        Err(e) => Some(Err(e.into())),
        Ok(l) => {
            let t = l.trim();
            (!t.is_empty() && !t.starts_with('#')).then(|| Ok((i + 1, t.to_string())))
        }
    })
}

fn parse_code(tok: &str, line: usize) -> Result<Label> {
    let code: i64 = tok
        .parse()
        .map_err(|_| Error::parse(line, format!("bad label `{tok}`")))?;
    Label::from_code(code)
}

/// Labels from the last column of an `x y z label` file.
pub fn read_labels<R: BufRead>(input: R) -> Result<Vec<Label>> {
    let mut out = Vec::new();
    for row in data_lines(input) {
        let (line, text) = row?;
        let cols: Vec<&str> = text.split_whitespace().collect();
        if cols.len() != 4 {
            return Err(Error::parse(line, format!("expected 4 columns, got {}", cols.len())));
        }
        out.push(parse_code(cols[3], line)?);
    }
    Ok(out)
}

/// One `id truth_label` row per point.
pub fn write_truth<W: Write>(truth: &[Label], mut out: W) -> Result<()> {
    for (i, &l) in truth.iter().enumerate() {
        writeln!(out, "{i} {}", code_of(l))?;
    }
    out.flush()?;
    Ok(())
}

/// Truth labels indexed by id. Ids must cover `0..n` exactly once, in any order.
pub fn read_truth<R: BufRead>(input: R) -> Result<Vec<Label>> {
    let mut rows = Vec::new();
    for row in data_lines(input) {
        let (line, text) = row?;
        let cols: Vec<&str> = text.split_whitespace().collect();
        if cols.len() != 2 {
            return Err(Error::parse(line, format!("expected 2 columns, got {}", cols.len())));
        }
        let id: usize = cols[0]
            .parse()
            .map_err(|_| Error::parse(line, format!("bad id `{}`", cols[0])))?;
        rows.push((id, parse_code(cols[1], line)?, line));
    }
    let mut out = vec![None; rows.len()];
    for (id, label, line) in rows {
        match out.get_mut(id) {
            Some(slot @ None) => *slot = Some(label),
            Some(Some(_)) => return Err(Error::parse(line, format!("duplicate id {id}"))),
            None => return Err(Error::parse(line, format!("id {id} out of range"))),
        }
    }
    Ok(out.into_iter().map(|l| l.expect("every slot filled")).collect())
}
