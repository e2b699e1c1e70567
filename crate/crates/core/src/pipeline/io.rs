//! Ring-data and indicator-grid CSV files.
//!
//! Both formats start with `# key=value` metadata lines followed by a
//! column header. Floats are written with 17 significant digits.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::Path;

use num_complex::Complex64;

use crate::forward::{FieldKind, RingMeasurement, SourceSet};
use crate::geometry::{imaging_grid, Circle, Point};
use crate::indicator::IndicatorImage;
use crate::{BoundaryCondition, Error, Result, Side};

pub type Metadata = BTreeMap<String, String>;

const RING_HEADER: &str = "source_index,receiver_index,theta,re,im";
const GRID_HEADER: &str = "x,y,value,flag";

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

/// Serializes ring data; `extra` entries (bc, shape, seed, ...) join the header.
pub fn ring_to_csv(ring: &RingMeasurement, extra: &Metadata) -> String {
    let mut meta = extra.clone();
    meta.insert("k".into(), format!("{:?}", ring.wavenumber));
    meta.insert("side".into(), ring.sources.side.as_str().into());
    meta.insert("radius".into(), format!("{:?}", ring.radius));
    meta.insert("source_count".into(), ring.sources.len().to_string());
    meta.insert("source_radius".into(), format!("{:?}", ring.sources.circle.radius));
    let c = ring.sources.circle.center;
    meta.insert("source_center".into(), format!("{:?},{:?}", c.x, c.y));
    meta.insert("receiver_count".into(), ring.receiver_count().to_string());
    meta.insert("field".into(), ring.field.as_str().into());
    meta.insert("delta".into(), format!("{:?}", ring.delta));
    let mut out = String::new();
    for (k, v) in &meta {
        out.push_str(&format!("# {k}={v}\n"));
    }
    out.push_str(RING_HEADER);
    out.push('\n');
    for (j, row) in ring.samples.iter().enumerate() {
        for (m, u) in row.iter().enumerate() {
            out.push_str(&format!(
                "{j},{m},{},{},{}\n",
                num(ring.receiver_angle(m)),
                num(u.re),
                num(u.im)
            ));
        }
    }
    out
}

fn split_header<'a>(text: &'a str, path: &Path, header: &str) -> Result<(Metadata, Vec<(usize, &'a str)>)> {
    let mut meta = Metadata::new();
    let mut rows = Vec::new();
    let mut seen_header = false;
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            if let Some((k, v)) = rest.trim().split_once('=') {
                meta.insert(k.trim().to_string(), v.trim().to_string());
            }
            continue;
        }
        if !seen_header {
            if line != header {
                return Err(Error::Parse {
                    path: path.display().to_string(),
                    line: i + 1,
                    message: format!("expected column header '{header}'"),
                });
            }
            seen_header = true;
            continue;
        }
        rows.push((i + 1, line));
    }
    if !seen_header {
        return Err(Error::Parse {
            path: path.display().to_string(),
            line: 0,
            message: format!("missing column header '{header}'"),
        });
    }
    Ok((meta, rows))
}

fn meta_value<T: std::str::FromStr>(meta: &Metadata, key: &str, path: &Path) -> Result<T> {
    meta.get(key)
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| Error::Parse {
            path: path.display().to_string(),
            line: 0,
            message: format!("missing or malformed header '{key}'"),
        })
}

fn field<T: std::str::FromStr>(parts: &[&str], idx: usize, path: &Path, line: usize) -> Result<T> {
    parts
        .get(idx)
        .and_then(|v| v.trim().parse().ok())
        .ok_or_else(|| Error::Parse {
            path: path.display().to_string(),
            line,
            message: format!("bad or missing column {}", idx + 1),
        })
}

/// Parses ring CSV text; receivers must be the equispaced angles `2πm/M`.
pub fn ring_from_csv(text: &str, path: &Path) -> Result<(RingMeasurement, Metadata)> {
    let (meta, rows) = split_header(text, path, RING_HEADER)?;
    let k: f64 = meta_value(&meta, "k", path)?;
    let side: Side = meta_value::<String>(&meta, "side", path)?.parse()?;
    let radius: f64 = meta_value(&meta, "radius", path)?;
    let n_src: usize = meta_value(&meta, "source_count", path)?;
    let src_radius: f64 = meta_value(&meta, "source_radius", path)?;
    let n_rec: usize = meta_value(&meta, "receiver_count", path)?;
    let delta: f64 = meta_value(&meta, "delta", path)?;
    let field_kind: FieldKind = meta_value::<String>(&meta, "field", path)?.parse()?;
    let center = match meta.get("source_center") {
        Some(v) => {
            let (x, y) = v.split_once(',').ok_or_else(|| Error::Parse {
                path: path.display().to_string(),
                line: 0,
                message: "source_center must be x,y".into(),
            })?;
            Point::new(
                x.trim().parse().map_err(|_| Error::Parse { path: path.display().to_string(), line: 0, message: "bad source_center".into() })?,
                y.trim().parse().map_err(|_| Error::Parse { path: path.display().to_string(), line: 0, message: "bad source_center".into() })?,
            )
        }
        None => Point::ORIGIN,
    };
    let mut samples = vec![vec![None; n_rec]; n_src];
    for (line, row) in rows {
        let parts: Vec<&str> = row.split(',').collect();
        if parts.len() != 5 {
            return Err(Error::Parse {
                path: path.display().to_string(),
                line,
                message: format!("expected 5 columns, got {}", parts.len()),
            });
        }
        let j: usize = field(&parts, 0, path, line)?;
        let m: usize = field(&parts, 1, path, line)?;
        let theta: f64 = field(&parts, 2, path, line)?;
        let re: f64 = field(&parts, 3, path, line)?;
        let im: f64 = field(&parts, 4, path, line)?;
        if j >= n_src || m >= n_rec {
            return Err(Error::Parse {
                path: path.display().to_string(),
                line,
                message: format!("index ({j}, {m}) outside {n_src} x {n_rec}"),
            });
        }
        if (theta - 2.0 * PI * m as f64 / n_rec as f64).abs() > 1e-12 {
            return Err(Error::NonEquispaced);
        }
        samples[j][m] = Some(Complex64::new(re, im));
    }
    let samples = samples
        .into_iter()
        .map(|row| row.into_iter().collect::<Option<Vec<_>>>())
        .collect::<Option<Vec<_>>>()
        .ok_or_else(|| Error::Parse {
            path: path.display().to_string(),
            line: 0,
            message: "ring data has missing samples".into(),
        })?;
    let ring = RingMeasurement {
        radius,
        wavenumber: k,
        sources: SourceSet::new(Circle::new(center, src_radius), n_src, side)?,
        field: field_kind,
        delta,
        samples,
    };
    ring.validate()?;
    Ok((ring, meta))
}

pub fn write_ring(path: &Path, ring: &RingMeasurement, extra: &Metadata) -> Result<()> {
    std::fs::write(path, ring_to_csv(ring, extra)).map_err(|e| Error::io(path, e))
}

pub fn read_ring(path: &Path) -> Result<(RingMeasurement, Metadata)> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    ring_from_csv(&text, path)
}

pub fn image_to_csv(image: &IndicatorImage) -> String {
    let g = &image.grid;
    let ks: Vec<String> = image.wavenumbers.iter().map(|k| format!("{k:?}")).collect();
    let mut out = String::new();
    let meta = [
        ("kind", image.kind.as_str().to_string()),
        ("normalization", image.normalization.as_str().to_string()),
        ("wavenumbers", ks.join(",")),
        ("nx", g.nx.to_string()),
        ("ny", g.ny.to_string()),
        ("xmin", format!("{:?}", g.xmin)),
        ("xmax", format!("{:?}", g.xmax)),
        ("ymin", format!("{:?}", g.ymin)),
        ("ymax", format!("{:?}", g.ymax)),
        (
            "exclusion",
            g.exclusion
                .map_or("none".to_string(), |c| format!("{:?},{:?},{:?}", c.center.x, c.center.y, c.radius)),
        ),
    ];
    for (k, v) in meta {
        out.push_str(&format!("# {k}={v}\n"));
    }
    out.push_str(GRID_HEADER);
    out.push('\n');
    for (i, p) in g.points().iter().enumerate() {
        if g.mask()[i] {
            continue;
        }
        out.push_str(&format!(
            "{},{},{},{}\n",
            num(p.x),
            num(p.y),
            num(image.values[i]),
            u8::from(image.flags[i])
        ));
    }
    out
}

pub fn image_from_csv(text: &str, path: &Path) -> Result<IndicatorImage> {
    let (meta, rows) = split_header(text, path, GRID_HEADER)?;
    let bad = |message: String| Error::Parse {
        path: path.display().to_string(),
        line: 0,
        message,
    };
    let exclusion = match meta.get("exclusion").map(String::as_str) {
        None | Some("none") => None,
        Some(v) => {
            let p: Vec<f64> = v
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| bad(format!("bad exclusion '{v}'")))?;
            if p.len() != 3 {
                return Err(bad(format!("bad exclusion '{v}'")));
            }
            Some(Circle::new(Point::new(p[0], p[1]), p[2]))
        }
    };
    let grid = imaging_grid(
        meta_value(&meta, "xmin", path)?,
        meta_value(&meta, "xmax", path)?,
        meta_value(&meta, "ymin", path)?,
        meta_value(&meta, "ymax", path)?,
        meta_value(&meta, "nx", path)?,
        meta_value(&meta, "ny", path)?,
        exclusion,
    )?;
    let kind: BoundaryCondition = meta_value::<String>(&meta, "kind", path)?.parse()?;
    let normalization = meta_value::<String>(&meta, "normalization", path)?.parse()?;
    let wavenumbers = meta
        .get("wavenumbers")
        .map(|v| {
            v.split(',')
                .filter(|s| !s.trim().is_empty())
                .map(|s| s.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
        })
        .transpose()
        .map_err(|_| bad("bad wavenumbers".into()))?
        .unwrap_or_default();
    let active: Vec<usize> = (0..grid.len()).filter(|&i| !grid.mask()[i]).collect();
    if rows.len() != active.len() {
        return Err(bad(format!("expected {} grid rows, found {}", active.len(), rows.len())));
    }
    let (dx, dy) = grid.spacing();
    let mut values = vec![0.0; grid.len()];
    let mut flags = vec![false; grid.len()];
    for (&idx, (line, row)) in active.iter().zip(rows) {
        let parts: Vec<&str> = row.split(',').collect();
        if parts.len() != 4 {
            return Err(Error::Parse {
                path: path.display().to_string(),
                line,
                message: format!("expected 4 columns, got {}", parts.len()),
            });
        }
        let x: f64 = field(&parts, 0, path, line)?;
        let y: f64 = field(&parts, 1, path, line)?;
        let p = grid.points()[idx];
        if (x - p.x).abs() > 1e-6 * dx || (y - p.y).abs() > 1e-6 * dy {
            return Err(Error::Parse {
                path: path.display().to_string(),
                line,
                message: format!("point ({x}, {y}) does not match the grid layout"),
            });
        }
        values[idx] = field(&parts, 2, path, line)?;
        flags[idx] = field::<u8>(&parts, 3, path, line)? != 0;
    }
    Ok(IndicatorImage {
        grid,
        kind,
        wavenumbers,
        normalization,
        values,
        flags,
    })
}

pub fn write_image(path: &Path, image: &IndicatorImage) -> Result<()> {
    std::fs::write(path, image_to_csv(image)).map_err(|e| Error::io(path, e))
}

pub fn read_image(path: &Path) -> Result<IndicatorImage> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    image_from_csv(&text, path)
}
