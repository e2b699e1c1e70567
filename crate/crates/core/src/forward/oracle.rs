//! Separation-of-variables solution for a centred circular scatterer.

use num_complex::Complex64;

use crate::cylfun::CylinderTable;
use crate::geometry::Point;
use crate::{BoundaryCondition, Error, Result, Side};

const MAX_MODES: usize = 200;
const TERM_TOL: f64 = 1e-14;
const QUIET_TERMS: usize = 8;
const DEGENERACY: f64 = 1e-12;
/// Relative slack that lets evaluation points sit on the circle itself.
const ON_CIRCLE: f64 = 1e-12;

/// Scattered field of the point source at `z` for the circle `|x| = radius`.
pub fn analytic_circle(
    radius: f64,
    bc: BoundaryCondition,
    side: Side,
    k: f64,
    z: Point,
    eval_points: &[Point],
) -> Result<Vec<Complex64>> {
    let series = Series::new(radius, bc, side, k, z)?;
    eval_points.iter().map(|&x| series.eval(x, false).map(|(u, _)| u)).collect()
}

/// Scattered field and its Cartesian gradient; points must be off the origin.
pub fn analytic_circle_with_gradient(
    radius: f64,
    bc: BoundaryCondition,
    side: Side,
    k: f64,
    z: Point,
    eval_points: &[Point],
) -> Result<Vec<(Complex64, [Complex64; 2])>> {
    let series = Series::new(radius, bc, side, k, z)?;
    eval_points.iter().map(|&x| series.eval(x, true)).collect()
}

struct Series {
    radius: f64,
    side: Side,
    k: f64,
    z: Point,
    /// `c_n · C_n(k|z|)` for n = 0..MAX_MODES
    weights: Vec<Complex64>,
    /// First order whose mode ratio could not be formed (interior degeneracy).
    degenerate_from: Option<(i32, &'static str, f64)>,
}

impl Series {
    fn new(radius: f64, bc: BoundaryCondition, side: Side, k: f64, z: Point) -> Result<Self> {
        if !(radius > 0.0) || !(k > 0.0) {
            return Err(Error::Domain("radius and wavenumber must be positive".into()));
        }
        let rz = z.norm();
        match side {
            Side::Exterior if rz <= radius => {
                return Err(Error::Geometry("source must lie outside the circle".into()))
            }
            Side::Interior if rz >= radius => {
                return Err(Error::Geometry("source must lie inside the circle".into()))
            }
            _ => {}
        }
        let boundary = CylinderTable::new(MAX_MODES + 1, k * radius)?;
        let source = if rz > 0.0 {
            Some(CylinderTable::new(MAX_MODES + 1, k * rz)?)
        } else {
            None
        };
        let mut weights = Vec::with_capacity(MAX_MODES + 1);
        let mut degenerate_from = None;
        // J_n and J_n' have no zeros below t = n; small values there are decay.
        let oscillatory = |n: i32| (n as f64) <= k * radius;
        for n in 0..=MAX_MODES as i32 {
            let ratio = match (side, bc) {
                (Side::Exterior, BoundaryCondition::Soft) => boundary.j(n) / boundary.h(n),
                (Side::Exterior, BoundaryCondition::Hard) => boundary.j_deriv(n) / boundary.h_deriv(n),
                (Side::Interior, BoundaryCondition::Soft) => {
                    let jn = boundary.j(n);
                    if oscillatory(n) && jn.abs() < DEGENERACY && degenerate_from.is_none() {
                        degenerate_from = Some((n, "J_n(ka)", jn.abs()));
                    }
                    boundary.h(n) / jn
                }
                (Side::Interior, BoundaryCondition::Hard) => {
                    let jd = boundary.j_deriv(n);
                    if oscillatory(n) && jd.abs() < DEGENERACY && degenerate_from.is_none() {
                        degenerate_from = Some((n, "J_n'(ka)", jd.abs()));
                    }
                    boundary.h_deriv(n) / jd
                }
            };
            let at_source = match (side, &source) {
                (Side::Exterior, Some(t)) => t.h(n),
                (Side::Interior, Some(t)) => Complex64::new(t.j(n), 0.0),
                (_, None) => Complex64::new(if n == 0 { 1.0 } else { 0.0 }, 0.0),
            };
            weights.push(ratio * at_source);
        }
        Ok(Self {
            radius,
            side,
            k,
            z,
            weights,
            degenerate_from,
        })
    }

    fn eval(&self, x: Point, gradient: bool) -> Result<(Complex64, [Complex64; 2])> {
        let r = x.norm();
        let wrong_side = match self.side {
            Side::Exterior => r < self.radius * (1.0 - ON_CIRCLE),
            Side::Interior => r > self.radius * (1.0 + ON_CIRCLE),
        };
        if wrong_side {
            return Err(Error::Geometry("evaluation point on the wrong side of the circle".into()));
        }
        if gradient && r < 1e-12 {
            return Err(Error::Domain("gradient requested at the origin".into()));
        }
        let table = if r > 0.0 {
            Some(CylinderTable::new(MAX_MODES + 1, self.k * r)?)
        } else {
            None
        };
        let dtheta = x.angle() - self.z.angle();
        let theta = x.angle();
        let prefactor = Complex64::new(0.0, -0.25);
        let mut value = Complex64::new(0.0, 0.0);
        let mut d_radial = Complex64::new(0.0, 0.0);
        let mut d_angular = Complex64::new(0.0, 0.0);
        let mut quiet = 0;
        for n in 0..=MAX_MODES as i32 {
            let (c, c_deriv) = match (self.side, &table) {
                (Side::Exterior, Some(t)) => (t.h(n), t.h_deriv(n)),
                (Side::Interior, Some(t)) => (
                    Complex64::new(t.j(n), 0.0),
                    Complex64::new(t.j_deriv(n), 0.0),
                ),
                (_, None) => (Complex64::new(if n == 0 { 1.0 } else { 0.0 }, 0.0), Complex64::new(0.0, 0.0)),
            };
            if let Some(t) = &table {
                if self.side == Side::Exterior && t.is_saturated(n + 1) {
                    return Err(Error::NoConvergence(n as usize));
                }
            }
            let mult = if n == 0 { 1.0 } else { 2.0 };
            let w = self.weights[n as usize] * mult;
            let cos = (n as f64 * dtheta).cos();
            let sin = (n as f64 * dtheta).sin();
            let term = w * c * cos;
            if let Some((order, quantity, v)) = self.degenerate_from {
                if order == n {
                    return Err(Error::ModeDegeneracy {
                        order,
                        quantity,
                        value: v,
                    });
                }
            }
            value += term;
            if gradient {
                d_radial += w * c_deriv * (self.k * cos);
                d_angular += w * c * (-(n as f64) * sin / r);
            }
            let size = (w * c).norm().max((w * c_deriv).norm() * if gradient { self.k } else { 0.0 });
            if size < TERM_TOL * value.norm() {
                quiet += 1;
                if quiet >= QUIET_TERMS {
                    let grad = [
                        prefactor * (d_radial * theta.cos() - d_angular * theta.sin()),
                        prefactor * (d_radial * theta.sin() + d_angular * theta.cos()),
                    ];
                    return Ok((prefactor * value, grad));
                }
            } else {
                quiet = 0;
            }
        }
        Err(Error::NoConvergence(MAX_MODES))
    }
}
