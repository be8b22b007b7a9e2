use crate::error::{Error, Result};

/// Thresholds and sizes that drive segmentation and labeling.
#[derive(Clone, Debug, PartialEq)]
pub struct FilterParams {
    /// Maximum |slope difference| for a point to stay in a segment.
    pub t_dslope: f64,
    /// Maximum horizontal gap between similar segments (m).
    pub t_dx: f64,
    /// Maximum elevation gap between similar segments (m).
    pub t_dh: f64,
    /// Maximum slope-angle difference between similar segments (degrees).
    pub t_theta_deg: f64,
    /// Seed height above the local low (m).
    pub h1: f64,
    /// Region-to-DTM height used in the iterative rounds (m).
    pub h2: f64,
    pub min_seg_points: usize,
    pub min_seg_length: f64,
    /// DTM raster cell size (m).
    pub cell_size: f64,
    /// Side of the square tiles used for seed selection (m).
    pub seed_tile: f64,
    /// Segments this far above the tile low are seeded non-ground (m).
    pub h_high: f64,
    pub max_iter: usize,
}

impl Default for FilterParams {
    fn default() -> Self {
        FilterParams {
            t_dslope: 0.5,
            t_dx: 1.0,
            t_dh: 0.5,
            t_theta_deg: 30.0,
            h1: 0.5,
            h2: 2.0,
            min_seg_points: 4,
            min_seg_length: 1.0,
            cell_size: 2.0,
            seed_tile: 40.0,
            h_high: 3.0,
            max_iter: 20,
        }
    }
}

impl FilterParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("t_dslope", self.t_dslope),
            ("t_dx", self.t_dx),
            ("t_dh", self.t_dh),
            ("t_theta_deg", self.t_theta_deg),
            ("h1", self.h1),
            ("h2", self.h2),
            ("min_seg_length", self.min_seg_length),
            ("cell_size", self.cell_size),
            ("seed_tile", self.seed_tile),
            ("h_high", self.h_high),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidParam {
                    name,
                    message: format!("must be a positive number, got {value}"),
                });
            }
        }
        if self.min_seg_points < 3 {
            return Err(Error::InvalidParam {
                name: "min_seg_points",
                message: format!("must be at least 3, got {}", self.min_seg_points),
            });
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidParam {
                name: "max_iter",
                message: "must be at least 1".into(),
            });
        }
        if self.t_theta_deg > 180.0 {
            return Err(Error::InvalidParam {
                name: "t_theta_deg",
                message: format!("must not exceed 180, got {}", self.t_theta_deg),
            });
        }
        Ok(())
    }
    /// Set one field by name. Accepts the field names and the CLI flag
    /// spellings (`tdslope`, `cell-size`, ...).
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim().replace('-', "_");
        let value = value.trim();
        let float = |name: &'static str| -> Result<f64> {
            value.parse().map_err(|_| Error::InvalidParam {
                name,
                message: format!("expected a number, got `{value}`"),
            })
        };
        let count = |name: &'static str| -> Result<usize> {
            value.parse().map_err(|_| Error::InvalidParam {
                name,
                message: format!("expected a non-negative integer, got `{value}`"),
            })
        };
        match key.as_str() {
            "t_dslope" | "tdslope" => self.t_dslope = float("t_dslope")?,
            "t_dx" | "tdx" => self.t_dx = float("t_dx")?,
            "t_dh" | "tdh" => self.t_dh = float("t_dh")?,
            "t_theta_deg" | "t_theta" | "ttheta" => self.t_theta_deg = float("t_theta_deg")?,
            "h1" => self.h1 = float("h1")?,
            "h2" => self.h2 = float("h2")?,
            "min_seg_points" => self.min_seg_points = count("min_seg_points")?,
            "min_seg_length" => self.min_seg_length = float("min_seg_length")?,
            "cell_size" => self.cell_size = float("cell_size")?,
            "seed_tile" => self.seed_tile = float("seed_tile")?,
            "h_high" => self.h_high = float("h_high")?,
            "max_iter" => self.max_iter = count("max_iter")?,
            _ => return Err(Error::UnknownParameter(key)),
        }
        Ok(())
    }

    /// Apply `key = value` lines on top of `self`; `#` starts a comment.
    pub fn apply_config(&mut self, text: &str) -> Result<()> {
        for (idx, raw) in text.lines().enumerate() {
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| Error::parse(idx + 1, "expected `key = value`"))?;
            self.set(key, value)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_thresholds() {
        let p = FilterParams::default();
        assert_eq!(p.t_dslope, 0.5);
        assert_eq!(p.t_dx, 1.0);
        assert_eq!(p.t_dh, 0.5);
        assert_eq!(p.t_theta_deg, 30.0);
        assert_eq!(p.h1, 0.5);
        assert_eq!(p.h2, 2.0);
        assert!(p.validate().is_ok());
    }

    #[test]
    fn rejects_non_positive_thresholds() {
        let p = FilterParams {
            t_dh: 0.0,
            ..FilterParams::default()
        };
        assert!(matches!(
            p.validate(),
            Err(Error::InvalidParam { name: "t_dh", .. })
        ));
        let p = FilterParams {
            cell_size: f64::NAN,
            ..FilterParams::default()
        };
        assert!(p.validate().is_err());
    }

    #[test]
    fn config_lines_override_defaults() {
        let mut p = FilterParams::default();
        p.apply_config("# bundle\ntdslope = 0.7\ncell-size=1.5\nmax_iter = 5 # short\n")
            .unwrap();
        assert_eq!((p.t_dslope, p.cell_size, p.max_iter), (0.7, 1.5, 5));
        assert!(matches!(p.set("t_foo", "1"), Err(Error::UnknownParameter(_))));
        assert!(p.set("h1", "abc").is_err());
        assert!(p.apply_config("h1 0.3").is_err());
    }
}
