//! Flat `key = value` scenario configuration.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::geometry::{imaging_grid, Circle, ImagingGrid, Point, ShapeKind, ShapeSpec, TrigSeries};
use crate::pipeline::render::PgmScale;
use crate::{BoundaryCondition, Error, Result, Side};

/// Every key accepted in a config file or as a `--set` override.
pub const KEYS: &[&str] = &[
    "side",
    "bc",
    "shape",
    "circle_radius",
    "circle_center",
    "trig_x",
    "trig_y",
    "shape_nodes",
    "wavenumbers",
    "delta",
    "seed",
    "truncation",
    "source_center",
    "source_radius",
    "source_count",
    "receiver_radius",
    "receiver_count",
    "grid_xmin",
    "grid_xmax",
    "grid_ymin",
    "grid_ymax",
    "grid_nx",
    "grid_ny",
    "exclusion_radius",
    "mode_guard",
    "rays",
    "pgm_scale",
    "output_dir",
];

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub side: Side,
    pub bc: BoundaryCondition,
    pub shape: ShapeKind,
    pub shape_nodes: usize,
    pub wavenumbers: Vec<f64>,
    pub delta: f64,
    pub seed: u64,
    /// Explicit truncation order; required when `delta = 0`.
    pub truncation: Option<usize>,
    pub source_center: Point,
    pub source_radius: f64,
    pub source_count: usize,
    pub receiver_radius: f64,
    pub receiver_count: usize,
    pub grid_bounds: [f64; 4],
    pub grid_nx: usize,
    pub grid_ny: usize,
    /// Radius of the masked disk around the origin (cavity problems).
    pub exclusion_radius: Option<f64>,
    pub mode_guard: f64,
    pub rays: usize,
    pub pgm_scale: PgmScale,
    pub output_dir: PathBuf,
}

impl ScenarioConfig {
    /// Defaults for one problem class: 12 sources and 128 receivers at
    /// radius 2.2 (obstacle) or 0.5 (cavity), 150×150 grid on [-1.5, 1.5]²,
    /// δ = 0.05 (soft) or 0.02 (hard).
    pub fn defaults(side: Side, bc: BoundaryCondition) -> Self {
        let ring = match side {
            Side::Exterior => 2.2,
            Side::Interior => 0.5,
        };
        let (delta, wavenumbers) = match bc {
            BoundaryCondition::Soft => (0.05, vec![3.0]),
            BoundaryCondition::Hard => (0.02, (0..7).map(|l| 3.0 + 0.5 * l as f64).collect()),
        };
        Self {
            side,
            bc,
            shape: ShapeKind::Circle {
                center: Point::ORIGIN,
                radius: 1.0,
            },
            shape_nodes: 512,
            wavenumbers,
            delta,
            seed: 1,
            truncation: None,
            source_center: Point::ORIGIN,
            source_radius: ring,
            source_count: 12,
            receiver_radius: ring,
            receiver_count: 128,
            grid_bounds: [-1.5, 1.5, -1.5, 1.5],
            grid_nx: 150,
            grid_ny: 150,
            exclusion_radius: match side {
                Side::Exterior => None,
                Side::Interior => Some(ring),
            },
            mode_guard: crate::continuation::DEFAULT_MODE_GUARD,
            rays: 64,
            pgm_scale: PgmScale::Percentile(99.0),
            output_dir: PathBuf::from("out"),
        }
    }

    /// Builds a config from ordered key/value pairs; later pairs win.
    /// `side` and `bc` pick the defaults for every other key.
    pub fn from_pairs(pairs: &[(String, String)]) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (k, v) in pairs {
            if !KEYS.contains(&k.as_str()) {
                return Err(Error::Config(format!("unknown key '{k}'")));
            }
            map.insert(k.as_str(), v.as_str());
        }
        let side: Side = map.get("side").copied().unwrap_or("exterior").parse()?;
        let bc: BoundaryCondition = map.get("bc").copied().unwrap_or("soft").parse()?;
        let mut cfg = Self::defaults(side, bc);
        let shape_name = map.get("shape").copied().unwrap_or("circle").trim().to_ascii_lowercase();
        for (&key, &value) in &map {
            cfg.apply(key, value)?;
        }
        cfg.shape = match shape_name.as_str() {
            "circle" => ShapeKind::Circle {
                center: map.get("circle_center").map(|v| parse_point(v, "circle_center")).transpose()?.unwrap_or(Point::ORIGIN),
                radius: map.get("circle_radius").map(|v| parse_num(v, "circle_radius")).transpose()?.unwrap_or(1.0),
            },
            "kite" => ShapeKind::Kite,
            "starfish" => ShapeKind::Starfish,
            "trig" => {
                let get = |k: &str| {
                    map.get(k)
                        .ok_or_else(|| Error::Config(format!("shape = trig needs '{k}'")))
                        .and_then(|v| TrigSeries::parse(v))
                };
                ShapeKind::Trig {
                    x: get("trig_x")?,
                    y: get("trig_y")?,
                }
            }
            other => return Err(Error::Config(format!("unknown shape '{other}'"))),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn apply(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key {
            "side" | "bc" | "shape" | "circle_radius" | "circle_center" | "trig_x" | "trig_y" => {}
            "shape_nodes" => self.shape_nodes = parse_num(v, key)?,
            "wavenumbers" => self.wavenumbers = parse_wavenumbers(v)?,
            "delta" => self.delta = parse_num(v, key)?,
            "seed" => self.seed = parse_num(v, key)?,
            "truncation" => {
                self.truncation = match v {
                    "auto" | "" => None,
                    _ => Some(parse_num(v, key)?),
                }
            }
            "source_center" => self.source_center = parse_point(v, key)?,
            "source_radius" => self.source_radius = parse_num(v, key)?,
            "source_count" => self.source_count = parse_num(v, key)?,
            "receiver_radius" => {
                self.receiver_radius = parse_num(v, key)?;
            }
            "receiver_count" => self.receiver_count = parse_num(v, key)?,
            "grid_xmin" => self.grid_bounds[0] = parse_num(v, key)?,
            "grid_xmax" => self.grid_bounds[1] = parse_num(v, key)?,
            "grid_ymin" => self.grid_bounds[2] = parse_num(v, key)?,
            "grid_ymax" => self.grid_bounds[3] = parse_num(v, key)?,
            "grid_nx" => self.grid_nx = parse_num(v, key)?,
            "grid_ny" => self.grid_ny = parse_num(v, key)?,
            "exclusion_radius" => {
                self.exclusion_radius = match v {
                    "none" => None,
                    _ => Some(parse_num(v, key)?),
                }
            }
            "mode_guard" => self.mode_guard = parse_num(v, key)?,
            "rays" => self.rays = parse_num(v, key)?,
            "pgm_scale" => self.pgm_scale = v.parse()?,
            "output_dir" => self.output_dir = PathBuf::from(v),
            _ => return Err(Error::Config(format!("unknown key '{key}'"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.wavenumbers.is_empty() || self.wavenumbers.iter().any(|k| !(*k > 0.0) || !k.is_finite()) {
            return Err(Error::Config("wavenumbers must be a non-empty list of positive values".into()));
        }
        if !(0.0..1.0).contains(&self.delta) {
            return Err(Error::Config(format!("delta must lie in [0, 1), got {}", self.delta)));
        }
        if self.delta == 0.0 && self.truncation.is_none() {
            return Err(Error::Config("delta = 0 requires an explicit truncation".into()));
        }
        if self.source_count == 0 || self.receiver_count == 0 {
            return Err(Error::Config("source and receiver counts must be positive".into()));
        }
        if !(self.source_radius > 0.0) || !(self.receiver_radius > 0.0) {
            return Err(Error::Config("source and receiver radii must be positive".into()));
        }
        if self.rays == 0 {
            return Err(Error::Config("rays must be positive".into()));
        }
        if !(self.mode_guard >= 0.0) {
            return Err(Error::Config("mode_guard must be non-negative".into()));
        }
        if self.shape_nodes < 16 || self.shape_nodes % 2 != 0 {
            return Err(Error::Config(format!("shape_nodes must be even and >= 16, got {}", self.shape_nodes)));
        }
        self.grid()?;
        Ok(())
    }

    pub fn shape_spec(&self) -> ShapeSpec {
        ShapeSpec::new(self.shape.clone(), self.shape_nodes)
    }

    pub fn source_circle(&self) -> Circle {
        Circle::new(self.source_center, self.source_radius)
    }

    pub fn grid(&self) -> Result<ImagingGrid> {
        let [xmin, xmax, ymin, ymax] = self.grid_bounds;
        imaging_grid(
            xmin,
            xmax,
            ymin,
            ymax,
            self.grid_nx,
            self.grid_ny,
            self.exclusion_radius.map(Circle::centered),
        )
    }

    /// Canonical text form; parsing it yields an equal config.
    pub fn to_text(&self) -> String {
        let mut lines = vec![
            format!("side = {}", self.side.as_str()),
            format!("bc = {}", self.bc.as_str()),
            format!("shape = {}", self.shape.name()),
        ];
        match &self.shape {
            ShapeKind::Circle { center, radius } => {
                lines.push(format!("circle_radius = {radius:?}"));
                lines.push(format!("circle_center = {:?},{:?}", center.x, center.y));
            }
            ShapeKind::Trig { x, y } => {
                lines.push(format!("trig_x = {}", x.to_text()));
                lines.push(format!("trig_y = {}", y.to_text()));
            }
            ShapeKind::Kite | ShapeKind::Starfish => {}
        }
        let ks: Vec<String> = self.wavenumbers.iter().map(|k| format!("{k:?}")).collect();
        lines.extend([
            format!("shape_nodes = {}", self.shape_nodes),
            format!("wavenumbers = {}", ks.join(",")),
            format!("delta = {:?}", self.delta),
            format!("seed = {}", self.seed),
            format!(
                "truncation = {}",
                self.truncation.map_or("auto".to_string(), |n| n.to_string())
            ),
            format!("source_center = {:?},{:?}", self.source_center.x, self.source_center.y),
            format!("source_radius = {:?}", self.source_radius),
            format!("source_count = {}", self.source_count),
            format!("receiver_radius = {:?}", self.receiver_radius),
            format!("receiver_count = {}", self.receiver_count),
            format!("grid_xmin = {:?}", self.grid_bounds[0]),
            format!("grid_xmax = {:?}", self.grid_bounds[1]),
            format!("grid_ymin = {:?}", self.grid_bounds[2]),
            format!("grid_ymax = {:?}", self.grid_bounds[3]),
            format!("grid_nx = {}", self.grid_nx),
            format!("grid_ny = {}", self.grid_ny),
            format!(
                "exclusion_radius = {}",
                self.exclusion_radius.map_or("none".to_string(), |r| format!("{r:?}"))
            ),
            format!("mode_guard = {:?}", self.mode_guard),
            format!("rays = {}", self.rays),
            format!("pgm_scale = {}", self.pgm_scale),
            format!("output_dir = {}", self.output_dir.display()),
        ]);
        lines.join("\n") + "\n"
    }
}

/// Splits config text into `(key, value)` pairs; `#` starts a comment.
pub fn parse_pairs(text: &str, origin: &Path) -> Result<Vec<(String, String)>> {
    let mut pairs = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
            path: origin.display().to_string(),
            line: i + 1,
            message: format!("expected 'key = value', got '{line}'"),
        })?;
        pairs.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(pairs)
}

/// `key=value` override as given on the command line.
pub fn parse_override(text: &str) -> Result<(String, String)> {
    let (k, v) = text
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override '{text}' is not key=value")))?;
    Ok((k.trim().to_string(), v.trim().to_string()))
}

pub fn load_config(path: &Path, overrides: &[(String, String)]) -> Result<ScenarioConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut pairs = parse_pairs(&text, path)?;
    pairs.extend(overrides.iter().cloned());
    ScenarioConfig::from_pairs(&pairs)
}

fn parse_num<T: std::str::FromStr>(v: &str, key: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    v.trim()
        .parse()
        .map_err(|e| Error::Config(format!("bad value '{v}' for '{key}': {e}")))
}

fn parse_point(v: &str, key: &str) -> Result<Point> {
    let parts: Vec<&str> = v.split(',').collect();
    if parts.len() != 2 {
        return Err(Error::Config(format!("'{key}' expects x,y, got '{v}'")));
    }
    Ok(Point::new(parse_num(parts[0], key)?, parse_num(parts[1], key)?))
}

/// `3,4.5,6` or `start:stop:step` (inclusive).
fn parse_wavenumbers(v: &str) -> Result<Vec<f64>> {
    if v.contains(':') {
        let parts: Vec<f64> = v
            .split(':')
            .map(|p| parse_num(p, "wavenumbers"))
            .collect::<Result<_>>()?;
        let [start, stop, step] = parts[..] else {
            return Err(Error::Config(format!("wavenumber range '{v}' is not start:stop:step")));
        };
        if !(step > 0.0) || stop < start {
            return Err(Error::Config(format!("empty wavenumber range '{v}'")));
        }
        let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
        return Ok((0..count).map(|i| start + step * i as f64).collect());
    }
    v.split(',').map(|p| parse_num(p, "wavenumbers")).collect()
}
