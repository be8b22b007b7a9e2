//! Elevation noise and the slope-difference threshold it implies.

use crate::error::{Error, Result};
use crate::ingest::ScanLine;
use crate::point::PointRecord;

/// Noise figures for a flat patch.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseEstimate {
    pub sigma_z: f64,
    pub d_points: f64,
    /// `2 sigma_z / sqrt(d_points)`.
    pub sigma_dslope: f64,
    /// `2 sigma_dslope`.
    pub suggested_tdslope: f64,
    /// Error propagation through the three-point difference, `sqrt(6) sigma_z / d_points`.
    pub propagated_sigma_dslope: f64,
}

impl NoiseEstimate {
    pub fn new(sigma_z: f64, d_points: f64) -> Result<Self> {
        let sd = sigma_dslope(sigma_z, d_points)?;
        Ok(NoiseEstimate {
            sigma_z,
            d_points,
            sigma_dslope: sd,
            suggested_tdslope: suggest_tdslope(sd),
            propagated_sigma_dslope: propagated_sigma_dslope(sigma_z, d_points, d_points)?,
        })
    }
}

/// Sample standard deviation of the residuals from the least-squares plane.
pub fn estimate_sigma_z(patch: &[PointRecord]) -> Result<f64> {
    let n = patch.len();
    if n < 10 {
        return Err(Error::DegeneratePatch(format!("need at least 10 points, got {n}")));
    }
    let nf = n as f64;
    let (mx, my, mz) = patch.iter().fold((0.0, 0.0, 0.0), |(a, b, c), p| (a + p.x, b + p.y, c + p.z));
    let (mx, my, mz) = (mx / nf, my / nf, mz / nf);
    let (mut sxx, mut syy, mut sxy, mut sxz, mut syz) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for p in patch {
        let (dx, dy, dz) = (p.x - mx, p.y - my, p.z - mz);
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
        sxz += dx * dz;
        syz += dy * dz;
    }
    let det = sxx * syy - sxy * sxy;
    if det.is_nan() || det <= 1e-12 * (sxx + syy).powi(2) {
        return Err(Error::DegeneratePatch("points are collinear".into()));
    }
    let gx = (sxz * syy - syz * sxy) / det;
    let gy = (syz * sxx - sxz * sxy) / det;
    let ss: f64 = patch
        .iter()
        .map(|p| {
            let r = (p.z - mz) - gx * (p.x - mx) - gy * (p.y - my);
            r * r
        })
        .sum();
    Ok((ss / (nf - 1.0)).sqrt())
}

/// Mean gap between consecutive points over all lines.
pub fn estimate_point_spacing(lines: &[ScanLine]) -> Result<f64> {
    let (mut total, mut count) = (0.0, 0usize);
    for line in lines {
        for w in line.along.windows(2) {
            total += (w[1] - w[0]).abs();
            count += 1;
        }
    }
    if count == 0 {
        return Err(Error::InvalidSpacing(0.0));
    }
    Ok(total / count as f64)
}

/// Standard deviation of the slope difference, `2 sigma_z / sqrt(d_points)`.
pub fn sigma_dslope(sigma_z: f64, d_points: f64) -> Result<f64> {
    if d_points.is_nan() || d_points <= 0.0 {
        return Err(Error::InvalidSpacing(d_points));
    }
    Ok(2.0 * sigma_z / d_points.sqrt())
}

/// Two-sigma bound on the slope difference of flat-surface points.
pub fn suggest_tdslope(sd: f64) -> f64 {
    2.0 * sd
}

/// Standard deviation of `(z+ - z)/a - (z - z-)/b` for independent
/// elevations of spread `sigma_z`; equals `sqrt(6) sigma_z / d` when `a = b = d`.
pub fn propagated_sigma_dslope(sigma_z: f64, a: f64, b: f64) -> Result<f64> {
    if a.is_nan() || a <= 0.0 {
        return Err(Error::InvalidSpacing(a));
    }
    if b.is_nan() || b <= 0.0 {
        return Err(Error::InvalidSpacing(b));
    }
    let (ia, ib) = (1.0 / a, 1.0 / b);
    Ok(sigma_z * (ia * ia + (ia + ib).powi(2) + ib * ib).sqrt())
}
