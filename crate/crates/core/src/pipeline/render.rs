//! ASCII PGM (P2) rendering of indicator grids.

use std::fmt;
use std::path::Path;

use crate::indicator::IndicatorImage;
use crate::pipeline::io::read_image;
use crate::{Error, Result};

pub const PGM_MAXVAL: u32 = 65535;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PgmScale {
    /// Min–max over unmasked points.
    Linear,
    /// The given percentile of unmasked values maps to white; above clips.
    Percentile(f64),
}

impl fmt::Display for PgmScale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PgmScale::Linear => write!(f, "linear"),
            PgmScale::Percentile(p) => write!(f, "percentile:{p:?}"),
        }
    }
}

impl std::str::FromStr for PgmScale {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "linear" {
            return Ok(PgmScale::Linear);
        }
        if s == "percentile" {
            return Ok(PgmScale::Percentile(99.0));
        }
        let p = s
            .strip_prefix("percentile:")
            .and_then(|p| p.parse::<f64>().ok())
            .filter(|p| *p > 0.0 && *p <= 100.0)
            .ok_or_else(|| Error::Config(format!("unknown pgm scale '{s}' (linear or percentile:P)")))?;
        Ok(PgmScale::Percentile(p))
    }
}

/// Nearest-rank percentile of `values` (sorted copy).
fn percentile(values: &[f64], p: f64) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let rank = ((p / 100.0) * v.len() as f64).ceil().max(1.0) as usize;
    v[rank.min(v.len()) - 1]
}

/// P2 text; rows top to bottom follow the grid (largest y first).
pub fn render_pgm(image: &IndicatorImage, scale: PgmScale) -> Result<String> {
    let g = &image.grid;
    let active: Vec<f64> = image.active().map(|(_, v)| v).collect();
    if active.is_empty() || active.iter().any(|v| !v.is_finite()) {
        return Err(Error::Mismatch("image has no finite unmasked values".into()));
    }
    let lo = active.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = match scale {
        PgmScale::Linear => active.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        PgmScale::Percentile(p) => percentile(&active, p),
    };
    let level = |v: f64| -> u32 {
        if hi <= lo {
            return PGM_MAXVAL;
        }
        let t = ((v - lo) / (hi - lo)).clamp(0.0, 1.0);
        (t * PGM_MAXVAL as f64).round() as u32
    };
    let mut out = format!("P2\n{} {}\n{}\n", g.nx, g.ny, PGM_MAXVAL);
    for row in 0..g.ny {
        let line: Vec<String> = (0..g.nx)
            .map(|col| {
                let i = g.index(row, col);
                if g.mask()[i] {
                    "0".to_string()
                } else {
                    level(image.values[i]).to_string()
                }
            })
            .collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    Ok(out)
}

/// Renders a grid CSV file to a PGM file.
pub fn render_pgm_file(csv: &Path, output: &Path, scale: PgmScale) -> Result<()> {
    let image = read_image(csv)?;
    let text = render_pgm(&image, scale)?;
    std::fs::write(output, text).map_err(|e| Error::io(output, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::imaging_grid;
    use crate::indicator::Normalization;
    use crate::BoundaryCondition;

    fn image(values: Vec<f64>, nx: usize, ny: usize) -> IndicatorImage {
        IndicatorImage {
            grid: imaging_grid(0.0, 1.0, 0.0, 1.0, nx, ny, None).unwrap(),
            kind: BoundaryCondition::Soft,
            wavenumbers: vec![3.0],
            normalization: Normalization::Raw,
            flags: vec![false; values.len()],
            values,
        }
    }

    #[test]
    fn two_by_two_linear() {
        let text = render_pgm(&image(vec![0.0, 1.0, 1.0, 0.0], 2, 2), PgmScale::Linear).unwrap();
        assert_eq!(text, "P2\n2 2\n65535\n0 65535\n65535 0\n");
    }

    #[test]
    fn constant_grid_is_uniform() {
        let text = render_pgm(&image(vec![3.0; 6], 3, 2), PgmScale::Percentile(99.0)).unwrap();
        let pixels: Vec<&str> = text.lines().skip(3).flat_map(|l| l.split(' ')).collect();
        assert!(pixels.iter().all(|p| *p == pixels[0]));
    }

    #[test]
    fn percentile_clips_outliers() {
        let mut v: Vec<f64> = (0..100).map(|i| i as f64).collect();
        v[99] = 1e6;
        let text = render_pgm(&image(v, 10, 10), PgmScale::Percentile(99.0)).unwrap();
        let last: Vec<&str> = text.lines().last().unwrap().split(' ').collect();
        assert_eq!(last[8], "65535");
        assert_eq!(last[9], "65535");
    }

    #[test]
    fn scale_parsing() {
        assert_eq!("linear".parse::<PgmScale>().unwrap(), PgmScale::Linear);
        assert_eq!("percentile:95".parse::<PgmScale>().unwrap(), PgmScale::Percentile(95.0));
        assert!("cubic".parse::<PgmScale>().is_err());
    }
}
