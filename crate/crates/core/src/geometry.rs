//! Parametric boundary curves, imaging grids and distance diagnostics.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Sub};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn from_polar(r: f64, theta: f64) -> Self {
        Self::new(r * theta.cos(), r * theta.sin())
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dot(self, other: Point) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn distance(self, other: Point) -> f64 {
        (self - other).norm()
    }

    /// Polar angle in `(-π, π]`.
    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, s: f64) -> Point {
        Point::new(self.x * s, self.y * s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Circle {
    pub center: Point,
    pub radius: f64,
}

impl Circle {
    pub fn new(center: Point, radius: f64) -> Self {
        Self { center, radius }
    }

    pub fn centered(radius: f64) -> Self {
        Self::new(Point::ORIGIN, radius)
    }

    /// `count` equispaced points starting at angle 0.
    pub fn points(&self, count: usize) -> Vec<Point> {
        (0..count)
            .map(|j| self.center + Point::from_polar(self.radius, 2.0 * PI * j as f64 / count as f64))
            .collect()
    }
}

/// One coordinate as `c0 + Σ_m (a_m cos mt + b_m sin mt)`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrigSeries {
    pub constant: f64,
    /// `(a_m, b_m)` for m = 1, 2, ...
    pub harmonics: Vec<(f64, f64)>,
}

impl TrigSeries {
    /// Parses `c0,a1,b1,a2,b2,...`.
    pub fn parse(text: &str) -> Result<Self> {
        let values = text
            .split(',')
            .map(|v| v.trim().parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| Error::InvalidShape(format!("bad trigonometric coefficient list '{text}': {e}")))?;
        if values.is_empty() || values.len() % 2 == 0 {
            return Err(Error::InvalidShape(format!(
                "trigonometric series needs c0 followed by (a_m, b_m) pairs, got {} values",
                values.len()
            )));
        }
        Ok(Self {
            constant: values[0],
            harmonics: values[1..].chunks(2).map(|c| (c[0], c[1])).collect(),
        })
    }

    pub fn to_text(&self) -> String {
        let mut parts = vec![format!("{}", self.constant)];
        for (a, b) in &self.harmonics {
            parts.push(format!("{a}"));
            parts.push(format!("{b}"));
        }
        parts.join(",")
    }

    /// Value, first and second derivative at `t`.
    fn eval(&self, t: f64) -> [f64; 3] {
        let mut out = [self.constant, 0.0, 0.0];
        for (i, &(a, b)) in self.harmonics.iter().enumerate() {
            let m = (i + 1) as f64;
            let (s, c) = (m * t).sin_cos();
            out[0] += a * c + b * s;
            out[1] += m * (-a * s + b * c);
            out[2] += -m * m * (a * c + b * s);
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ShapeKind {
    Circle { center: Point, radius: f64 },
    /// `(cos t + 0.6 cos 2t - 0.3, 1.3 sin t)`
    Kite,
    /// `(1 + 0.2 cos 5t)(cos t, sin t)`
    Starfish,
    Trig { x: TrigSeries, y: TrigSeries },
}

impl ShapeKind {
    pub fn name(&self) -> &'static str {
        match self {
            ShapeKind::Circle { .. } => "circle",
            ShapeKind::Kite => "kite",
            ShapeKind::Starfish => "starfish",
            ShapeKind::Trig { .. } => "trig",
        }
    }

    /// Every named shape is a finite trigonometric series, so derivatives are exact.
    fn series(&self) -> (TrigSeries, TrigSeries) {
        match self {
            ShapeKind::Circle { center, radius } => (
                TrigSeries {
                    constant: center.x,
                    harmonics: vec![(*radius, 0.0)],
                },
                TrigSeries {
                    constant: center.y,
                    harmonics: vec![(0.0, *radius)],
                },
            ),
            ShapeKind::Kite => (
                TrigSeries {
                    constant: -0.3,
                    harmonics: vec![(1.0, 0.0), (0.6, 0.0)],
                },
                TrigSeries {
                    constant: 0.0,
                    harmonics: vec![(0.0, 1.3)],
                },
            ),
            // (1 + 0.2 cos 5t) cos t = cos t + 0.1 cos 4t + 0.1 cos 6t
            // (1 + 0.2 cos 5t) sin t = sin t - 0.1 sin 4t + 0.1 sin 6t
            ShapeKind::Starfish => {
                let mut hx = vec![(0.0, 0.0); 6];
                let mut hy = vec![(0.0, 0.0); 6];
                hx[0] = (1.0, 0.0);
                hx[3] = (0.1, 0.0);
                hx[5] = (0.1, 0.0);
                hy[0] = (0.0, 1.0);
                hy[3] = (0.0, -0.1);
                hy[5] = (0.0, 0.1);
                (
                    TrigSeries {
                        constant: 0.0,
                        harmonics: hx,
                    },
                    TrigSeries {
                        constant: 0.0,
                        harmonics: hy,
                    },
                )
            }
            ShapeKind::Trig { x, y } => (x.clone(), y.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShapeSpec {
    pub kind: ShapeKind,
    /// Number of parameter nodes `M` (even, at least 16).
    pub nodes: usize,
}

impl ShapeSpec {
    pub fn new(kind: ShapeKind, nodes: usize) -> Self {
        Self { kind, nodes }
    }

    pub fn circle(center: Point, radius: f64, nodes: usize) -> Self {
        Self::new(ShapeKind::Circle { center, radius }, nodes)
    }

    pub fn with_nodes(&self, nodes: usize) -> Self {
        Self::new(self.kind.clone(), nodes)
    }

    fn validate(&self) -> Result<()> {
        if self.nodes < 16 || self.nodes % 2 != 0 {
            return Err(Error::InvalidShape(format!(
                "node count must be even and >= 16, got {}",
                self.nodes
            )));
        }
        if let ShapeKind::Circle { radius, center } = &self.kind {
            if !(*radius > 0.0) || !radius.is_finite() {
                return Err(Error::InvalidShape(format!("circle radius must be positive, got {radius}")));
            }
            if !center.x.is_finite() || !center.y.is_finite() {
                return Err(Error::InvalidShape("circle center must be finite".into()));
            }
        }
        if let ShapeKind::Trig { x, y } = &self.kind {
            if x.harmonics.is_empty() && y.harmonics.is_empty() {
                return Err(Error::InvalidShape("trigonometric curve has no harmonics".into()));
            }
        }
        Ok(())
    }
}

/// Position and derivatives of a curve at one parameter value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveSample {
    pub position: Point,
    pub tangent: Point,
    pub second: Point,
}

impl CurveSample {
    pub fn speed(&self) -> f64 {
        self.tangent.norm()
    }

    /// Outward unit normal for a counterclockwise curve: `(x2', -x1') / |x'|`.
    pub fn normal(&self) -> Point {
        Point::new(self.tangent.y, -self.tangent.x) * (1.0 / self.speed())
    }

    /// Signed curvature numerator `x1' x2'' - x2' x1''`.
    pub fn cross(&self) -> f64 {
        self.tangent.x * self.second.y - self.tangent.y * self.second.x
    }
}

/// A closed curve sampled at `t_j = 2πj/M`.
#[derive(Debug, Clone)]
pub struct BoundaryCurve {
    spec: ShapeSpec,
    series: (TrigSeries, TrigSeries),
    params: Vec<f64>,
    samples: Vec<CurveSample>,
}

impl BoundaryCurve {
    pub fn spec(&self) -> &ShapeSpec {
        &self.spec
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn samples(&self) -> &[CurveSample] {
        &self.samples
    }

    pub fn positions(&self) -> impl Iterator<Item = Point> + '_ {
        self.samples.iter().map(|s| s.position)
    }

    /// Exact evaluation at any parameter value.
    pub fn sample_at(&self, t: f64) -> CurveSample {
        let x = self.series.0.eval(t);
        let y = self.series.1.eval(t);
        CurveSample {
            position: Point::new(x[0], y[0]),
            tangent: Point::new(x[1], y[1]),
            second: Point::new(x[2], y[2]),
        }
    }

    /// Same shape with a different node count.
    pub fn resampled(&self, nodes: usize) -> Result<BoundaryCurve> {
        make_curve(&self.spec.with_nodes(nodes))
    }

    /// Shoelace area of the node polygon; positive for counterclockwise orientation.
    pub fn signed_area(&self) -> f64 {
        let n = self.samples.len();
        (0..n)
            .map(|j| {
                let a = self.samples[j].position;
                let b = self.samples[(j + 1) % n].position;
                a.x * b.y - b.x * a.y
            })
            .sum::<f64>()
            * 0.5
    }

    /// Trapezoidal arc length.
    pub fn length(&self) -> f64 {
        2.0 * PI / self.len() as f64 * self.samples.iter().map(CurveSample::speed).sum::<f64>()
    }

    /// Winding-number test against the node polygon.
    pub fn contains(&self, p: Point) -> bool {
        let n = self.samples.len();
        let mut inside = false;
        for j in 0..n {
            let a = self.samples[j].position;
            let b = self.samples[(j + 1) % n].position;
            if (a.y > p.y) != (b.y > p.y) {
                let x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
                if p.x < x {
                    inside = !inside;
                }
            }
        }
        inside
    }

    /// Minimum distance from `p` to the node set.
    pub fn node_distance(&self, p: Point) -> f64 {
        self.positions().map(|q| q.distance(p)).fold(f64::INFINITY, f64::min)
    }

    /// Radius where the ray from `center` at angle `theta` meets the curve.
    /// Assumes the curve is star-shaped with respect to `center`.
    pub fn ray_radius(&self, center: Point, theta: f64) -> f64 {
        let n = self.samples.len();
        let angle_at = |t: f64| (self.sample_at(t).position - center).angle();
        let wrap = |a: f64| (a + PI).rem_euclid(2.0 * PI) - PI;
        for j in 0..n {
            let t0 = self.params[j];
            let t1 = t0 + 2.0 * PI / n as f64;
            let d0 = wrap(angle_at(t0) - theta);
            let d1 = wrap(angle_at(t1) - theta);
            if d0 <= 0.0 && d1 > 0.0 && d1 - d0 < PI {
                let (mut lo, mut hi) = (t0, t1);
                for _ in 0..60 {
                    let mid = 0.5 * (lo + hi);
                    if wrap(angle_at(mid) - theta) <= 0.0 {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                return (self.sample_at(0.5 * (lo + hi)).position - center).norm();
            }
        }
        // fall back to the closest node direction
        self.positions()
            .min_by(|a, b| {
                let da = wrap((*a - center).angle() - theta).abs();
                let db = wrap((*b - center).angle() - theta).abs();
                da.total_cmp(&db)
            })
            .map(|p| (p - center).norm())
            .unwrap_or(f64::NAN)
    }
}

pub fn make_curve(spec: &ShapeSpec) -> Result<BoundaryCurve> {
    spec.validate()?;
    let series = spec.kind.series();
    let m = spec.nodes;
    let params: Vec<f64> = (0..m).map(|j| 2.0 * PI * j as f64 / m as f64).collect();
    let mut curve = BoundaryCurve {
        spec: spec.clone(),
        series,
        params,
        samples: Vec::with_capacity(m),
    };
    curve.samples = curve.params.iter().map(|&t| curve.sample_at(t)).collect();
    if curve.samples.iter().any(|s| !(s.speed() > 0.0)) {
        return Err(Error::InvalidShape("curve has a stationary point (x'(t) = 0)".into()));
    }
    if curve.signed_area() <= 0.0 {
        return Err(Error::InvalidShape(
            "curve must be parametrized counterclockwise".into(),
        ));
    }
    Ok(curve)
}

/// `min_j | |x(t_j) - c| - r |`, node-sampled.
pub fn min_distance(curve: &BoundaryCurve, circle: &Circle) -> f64 {
    curve
        .positions()
        .map(|p| ((p - circle.center).norm() - circle.radius).abs())
        .fold(f64::INFINITY, f64::min)
}

/// Rectangular imaging mesh, row-major with y decreasing down the rows.
#[derive(Debug, Clone, PartialEq)]
pub struct ImagingGrid {
    pub xmin: f64,
    pub xmax: f64,
    pub ymin: f64,
    pub ymax: f64,
    pub nx: usize,
    pub ny: usize,
    pub exclusion: Option<Circle>,
    points: Vec<Point>,
    mask: Vec<bool>,
}

impl ImagingGrid {
    pub fn spacing(&self) -> (f64, f64) {
        (
            (self.xmax - self.xmin) / (self.nx - 1) as f64,
            (self.ymax - self.ymin) / (self.ny - 1) as f64,
        )
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    /// `true` where the point lies inside the exclusion disk.
    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn masked_count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    pub fn index(&self, row: usize, col: usize) -> usize {
        row * self.nx + col
    }

    pub fn center(&self) -> Point {
        Point::new(0.5 * (self.xmin + self.xmax), 0.5 * (self.ymin + self.ymax))
    }

    /// Index of the grid node closest to `p`, if `p` is inside the bounds.
    pub fn nearest(&self, p: Point) -> Option<usize> {
        let (dx, dy) = self.spacing();
        let col = ((p.x - self.xmin) / dx).round();
        let row = ((self.ymax - p.y) / dy).round();
        if col < 0.0 || row < 0.0 || col >= self.nx as f64 || row >= self.ny as f64 {
            return None;
        }
        Some(self.index(row as usize, col as usize))
    }

    pub fn same_layout(&self, other: &ImagingGrid) -> bool {
        self.nx == other.nx
            && self.ny == other.ny
            && self.xmin == other.xmin
            && self.xmax == other.xmax
            && self.ymin == other.ymin
            && self.ymax == other.ymax
            && self.mask == other.mask
    }
}

pub fn imaging_grid(
    xmin: f64,
    xmax: f64,
    ymin: f64,
    ymax: f64,
    nx: usize,
    ny: usize,
    exclusion: Option<Circle>,
) -> Result<ImagingGrid> {
    if nx < 2 || ny < 2 {
        return Err(Error::Geometry(format!("grid needs nx, ny >= 2, got {nx} x {ny}")));
    }
    if !(xmax > xmin) || !(ymax > ymin) || ![xmin, xmax, ymin, ymax].iter().all(|v| v.is_finite()) {
        return Err(Error::Geometry(format!(
            "degenerate grid bounds [{xmin}, {xmax}] x [{ymin}, {ymax}]"
        )));
    }
    let dx = (xmax - xmin) / (nx - 1) as f64;
    let dy = (ymax - ymin) / (ny - 1) as f64;
    let mut points = Vec::with_capacity(nx * ny);
    for row in 0..ny {
        let y = if row == ny - 1 { ymin } else { ymax - row as f64 * dy };
        for col in 0..nx {
            let x = if col == nx - 1 { xmax } else { xmin + col as f64 * dx };
            points.push(Point::new(x, y));
        }
    }
    let mask = points
        .iter()
        .map(|p| exclusion.is_some_and(|c| p.distance(c.center) <= c.radius))
        .collect();
    Ok(ImagingGrid {
        xmin,
        xmax,
        ymin,
        ymax,
        nx,
        ny,
        exclusion,
        points,
        mask,
    })
}
