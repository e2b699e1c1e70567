//! Synthetic near-field data: point-source incident fields, a Nyström
//! boundary-integral solver and a series solution for circles.

mod linalg;
mod nystrom;
mod oracle;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::cylfun::CylinderTable;
use crate::geometry::{BoundaryCurve, Circle, Point};
use crate::{BoundaryCondition, Error, Result, Side};

pub use linalg::{DenseMatrix, LuFactor};
pub use nystrom::{BoundarySolver, DensitySolution, Representation, RESONANCE_CONDITION};
pub use oracle::{analytic_circle, analytic_circle_with_gradient};

const SINGULAR_DISTANCE: f64 = 1e-12;

/// Equispaced point sources on a circle, starting at angle 0.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceSet {
    pub circle: Circle,
    pub side: Side,
    locations: Vec<Point>,
}

impl SourceSet {
    pub fn new(circle: Circle, count: usize, side: Side) -> Result<Self> {
        if count == 0 {
            return Err(Error::Config("source count must be at least 1".into()));
        }
        if !(circle.radius > 0.0) {
            return Err(Error::Config("source radius must be positive".into()));
        }
        Ok(Self {
            circle,
            side,
            locations: circle.points(count),
        })
    }

    pub fn len(&self) -> usize {
        self.locations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.locations.is_empty()
    }

    pub fn locations(&self) -> &[Point] {
        &self.locations
    }

    /// Same sources listed in `order`, which must be a permutation.
    pub fn reordered(&self, order: &[usize]) -> Result<Self> {
        let mut seen = vec![false; self.len()];
        for &i in order {
            if i >= self.len() || std::mem::replace(&mut seen[i], true) {
                return Err(Error::Mismatch("source order is not a permutation".into()));
            }
        }
        if order.len() != self.len() {
            return Err(Error::Mismatch("source order is not a permutation".into()));
        }
        Ok(Self {
            circle: self.circle,
            side: self.side,
            locations: order.iter().map(|&i| self.locations[i]).collect(),
        })
    }

    /// Every source strictly on the correct side of the curve.
    pub fn check_against(&self, curve: &BoundaryCurve) -> Result<()> {
        check_side(curve, self.side, &self.locations, "source")
    }
}

/// Whether ring samples hold the scattered or the total field.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldKind {
    Scattered,
    Total,
}

impl FieldKind {
    pub fn as_str(self) -> &'static str {
        match self {
            FieldKind::Scattered => "scattered",
            FieldKind::Total => "total",
        }
    }
}

impl std::str::FromStr for FieldKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "scattered" => Ok(FieldKind::Scattered),
            "total" => Ok(FieldKind::Total),
            other => Err(Error::Config(format!("unknown field kind '{other}'"))),
        }
    }
}

/// Samples on the measurement ring, one row per source.
#[derive(Debug, Clone, PartialEq)]
pub struct RingMeasurement {
    pub radius: f64,
    pub wavenumber: f64,
    pub sources: SourceSet,
    pub field: FieldKind,
    pub delta: f64,
    /// `samples[source][receiver]`
    pub samples: Vec<Vec<Complex64>>,
}

impl RingMeasurement {
    pub fn receiver_count(&self) -> usize {
        self.samples.first().map_or(0, Vec::len)
    }

    pub fn receiver_angle(&self, m: usize) -> f64 {
        2.0 * std::f64::consts::PI * m as f64 / self.receiver_count() as f64
    }

    pub fn receivers(&self) -> Vec<Point> {
        Circle::centered(self.radius).points(self.receiver_count())
    }

    /// Shape and finiteness checks.
    pub fn validate(&self) -> Result<()> {
        if self.samples.len() != self.sources.len() {
            return Err(Error::Mismatch(format!(
                "{} sample rows for {} sources",
                self.samples.len(),
                self.sources.len()
            )));
        }
        let m = self.receiver_count();
        if m == 0 || self.samples.iter().any(|row| row.len() != m) {
            return Err(Error::Mismatch("ragged or empty receiver rows".into()));
        }
        if self
            .samples
            .iter()
            .flatten()
            .any(|c| !c.re.is_finite() || !c.im.is_finite())
        {
            return Err(Error::Mismatch("non-finite ring sample".into()));
        }
        Ok(())
    }
}

/// Scattered field at evaluation points for every source.
#[derive(Debug, Clone)]
pub struct ForwardField {
    /// `values[source][point]`
    pub values: Vec<Vec<Complex64>>,
    /// Points closer than 0.05 wavelengths to the boundary nodes.
    pub near_boundary: Vec<bool>,
    pub condition: f64,
}

/// `(i/4) H_0(k|x - z|)`.
pub fn incident_field(x: Point, z: Point, k: f64) -> Result<Complex64> {
    let r = checked_distance(x, z)?;
    let table = CylinderTable::new(1, k * r)?;
    Ok(Complex64::new(0.0, 0.25) * table.h(0))
}

/// `-(ik/4) H_1(k|x - z|) (x - z)/|x - z|`.
pub fn incident_gradient(x: Point, z: Point, k: f64) -> Result<[Complex64; 2]> {
    let r = checked_distance(x, z)?;
    let table = CylinderTable::new(1, k * r)?;
    let scale = Complex64::new(0.0, -0.25 * k) * table.h(1) / r;
    let d = x - z;
    Ok([scale * d.x, scale * d.y])
}

fn checked_distance(x: Point, z: Point) -> Result<f64> {
    let r = x.distance(z);
    if r < SINGULAR_DISTANCE {
        return Err(Error::Singularity { distance: r });
    }
    Ok(r)
}

fn check_side(curve: &BoundaryCurve, side: Side, points: &[Point], what: &str) -> Result<()> {
    for &p in points {
        let inside = curve.contains(p);
        let wrong = match side {
            Side::Exterior => inside,
            Side::Interior => !inside,
        };
        if wrong || curve.node_distance(p) < SINGULAR_DISTANCE {
            return Err(Error::Geometry(format!(
                "{what} ({:.6}, {:.6}) is not strictly {} the boundary",
                p.x,
                p.y,
                if side == Side::Exterior { "outside" } else { "inside" }
            )));
        }
    }
    Ok(())
}

/// Scattered field of every source at `eval_points`.
///
/// One factorisation per call; sources are solved in parallel.
pub fn solve_forward(
    curve: &BoundaryCurve,
    bc: BoundaryCondition,
    side: Side,
    k: f64,
    sources: &SourceSet,
    eval_points: &[Point],
) -> Result<ForwardField> {
    if sources.side != side {
        return Err(Error::Mismatch("source set side differs from problem side".into()));
    }
    sources.check_against(curve)?;
    check_side(curve, side, eval_points, "evaluation point")?;
    let solver = BoundarySolver::new(curve, bc, side, k)?;
    let values = sources
        .locations()
        .par_iter()
        .map(|&z| {
            let density = solver.solve(z)?;
            solver.field(&density, eval_points)
        })
        .collect::<Result<Vec<_>>>()?;
    let near = 0.05 * 2.0 * std::f64::consts::PI / k;
    let near_boundary = eval_points
        .iter()
        .map(|&p| curve.node_distance(p) < near)
        .collect();
    Ok(ForwardField {
        values,
        near_boundary,
        condition: solver.condition(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn incident_field_unit_distance() {
        let u = incident_field(Point::new(1.0, 0.0), Point::ORIGIN, 1.0).unwrap();
        assert!((u.re + 0.022_064_241_1).abs() < 1e-10);
        assert!((u.im - 0.191_299_421_6).abs() < 1e-10);
    }

    #[test]
    fn incident_field_rejects_coincident_points() {
        let p = Point::new(0.3, 0.4);
        assert!(matches!(incident_field(p, p, 2.0), Err(Error::Singularity { .. })));
        assert!(matches!(incident_gradient(p, p, 2.0), Err(Error::Singularity { .. })));
    }

    #[test]
    fn source_set_rejects_zero_count() {
        assert!(SourceSet::new(Circle::centered(2.0), 0, Side::Exterior).is_err());
    }
}
