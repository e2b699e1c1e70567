//! Trigonometric Nyström discretisation with logarithmic kernel splitting.
//!
//! Boundary operators carry a factor 2 (`S = 2∫Φφ ds` and so on), so the
//! jump relations read `u± = ½Kφ ± ½φ` for the double layer and
//! `∂νu± = ½K'φ ∓ ½φ` for the single layer.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::linalg::{DenseMatrix, LuFactor};
use super::{incident_field, incident_gradient};
use crate::cylfun::CylinderTable;
use crate::geometry::{BoundaryCurve, CurveSample, Point};
use crate::{BoundaryCondition, Error, Result, Side};

/// Condition estimates above this abort the solve.
pub const RESONANCE_CONDITION: f64 = 1e12;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const COINCIDENT_PARAM: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Representation {
    /// `u = Dφ - iηSφ`
    CombinedLayer,
    SingleLayer,
    DoubleLayer,
}

impl Representation {
    pub fn as_str(self) -> &'static str {
        match self {
            Representation::CombinedLayer => "combined-layer",
            Representation::SingleLayer => "single-layer",
            Representation::DoubleLayer => "double-layer",
        }
    }
}

#[derive(Debug, Clone)]
pub struct DensitySolution {
    pub density: Vec<Complex64>,
    pub representation: Representation,
    pub condition: f64,
    /// `||Aφ - b|| / ||b||`
    pub residual: f64,
}

#[derive(Debug, Clone, Copy)]
enum Operator {
    Single,
    Double,
    AdjointDouble,
}

/// Log-part and smooth-part kernel values for one (target, source) pair.
fn kernel(
    op: Operator,
    k: f64,
    target: &CurveSample,
    t: f64,
    source: &CurveSample,
    s: f64,
) -> (Complex64, Complex64) {
    let i = Complex64::new(0.0, 1.0);
    let diff = t - s;
    let wrapped = (diff + PI).rem_euclid(2.0 * PI) - PI;
    if wrapped.abs() < COINCIDENT_PARAM {
        let speed = source.speed();
        return match op {
            Operator::Single => {
                let log_part = Complex64::new(-speed / (2.0 * PI), 0.0);
                let smooth = (i * 0.5
                    - EULER_GAMMA / PI
                    - (1.0 / PI) * (0.5 * k * speed).ln())
                    * speed;
                (log_part, smooth)
            }
            Operator::Double | Operator::AdjointDouble => {
                let v = -source.cross() / (2.0 * PI * speed * speed);
                (Complex64::new(0.0, 0.0), Complex64::new(v, 0.0))
            }
        };
    }
    let d = target.position - source.position;
    let r = d.norm();
    let table = CylinderTable::new(1, k * r).expect("positive argument off the diagonal");
    let log = (4.0 * (0.5 * diff).sin().powi(2)).ln();
    let (full, log_part) = match op {
        Operator::Single => {
            let speed = source.speed();
            (
                i * 0.5 * table.h(0) * speed,
                Complex64::new(-table.j(0) * speed / (2.0 * PI), 0.0),
            )
        }
        Operator::Double => {
            let nd = Point::new(source.tangent.y, -source.tangent.x).dot(d);
            (
                i * (0.5 * k) * table.h(1) / r * nd,
                Complex64::new(-k / (2.0 * PI) * table.j(1) / r * nd, 0.0),
            )
        }
        Operator::AdjointDouble => {
            let nd = -Point::new(target.tangent.y, -target.tangent.x).dot(d);
            let scale = source.speed() / target.speed();
            (
                i * (0.5 * k) * table.h(1) / r * nd * scale,
                Complex64::new(-k / (2.0 * PI) * table.j(1) / r * nd * scale, 0.0),
            )
        }
    };
    (log_part, full - log_part * log)
}

/// `R_j(t)` for `n = M/2`, as a function of `t - t_j`.
fn log_weight(n: usize, tau: f64) -> f64 {
    let nf = n as f64;
    let sum: f64 = (1..n).map(|m| (m as f64 * tau).cos() / m as f64).sum();
    -2.0 * PI / nf * sum - PI / (nf * nf) * (nf * tau).cos()
}

/// Trigonometric interpolation of nodal values at parameter `t`.
fn interpolate(values: &[Complex64], params: &[f64], t: f64) -> Complex64 {
    let m = values.len();
    let n = m / 2;
    values
        .iter()
        .zip(params)
        .map(|(v, &tj)| {
            let tau = t - tj;
            let basis = 1.0
                + 2.0 * (1..n).map(|p| (p as f64 * tau).cos()).sum::<f64>()
                + (n as f64 * tau).cos();
            v * (basis / m as f64)
        })
        .sum()
}

/// Factorised boundary system for one (curve, condition, side, k).
#[derive(Debug, Clone)]
pub struct BoundarySolver {
    curve: BoundaryCurve,
    bc: BoundaryCondition,
    side: Side,
    k: f64,
    coupling: f64,
    representation: Representation,
    matrix: DenseMatrix,
    lu: LuFactor,
    condition: f64,
}

impl BoundarySolver {
    pub fn new(curve: &BoundaryCurve, bc: BoundaryCondition, side: Side, k: f64) -> Result<Self> {
        if !(k > 0.0) || !k.is_finite() {
            return Err(Error::Domain(format!("wavenumber must be positive, got {k}")));
        }
        let m = curve.len();
        if m < 4 || m % 2 != 0 {
            return Err(Error::InvalidShape(format!("node count {m} must be even")));
        }
        let n = m / 2;
        let representation = match (side, bc) {
            (Side::Exterior, BoundaryCondition::Soft) => Representation::CombinedLayer,
            (Side::Interior, BoundaryCondition::Soft) => Representation::DoubleLayer,
            (_, BoundaryCondition::Hard) => Representation::SingleLayer,
        };
        let identity = match (side, bc) {
            (Side::Exterior, BoundaryCondition::Soft) => 1.0,
            (Side::Interior, BoundaryCondition::Hard) => 1.0,
            _ => -1.0,
        };
        let coupling = k;
        let lag_weights: Vec<f64> = (0..m).map(|l| log_weight(n, PI * l as f64 / n as f64)).collect();
        let samples = curve.samples();
        let params = curve.params();
        let h = PI / n as f64;
        let i = Complex64::new(0.0, 1.0);
        let matrix = DenseMatrix::from_fn(m, |row, col| {
            let (ts, t) = (&samples[row], params[row]);
            let (ss, s) = (&samples[col], params[col]);
            let rw = lag_weights[(row + m - col) % m];
            let entry = |op| {
                let (l, sm) = kernel(op, k, ts, t, ss, s);
                l * rw + sm * h
            };
            let mut v = match representation {
                Representation::CombinedLayer => {
                    entry(Operator::Double) - i * coupling * entry(Operator::Single)
                }
                Representation::DoubleLayer => entry(Operator::Double),
                Representation::SingleLayer => entry(Operator::AdjointDouble),
            };
            if row == col {
                v += identity;
            }
            v
        });
        let lu = LuFactor::new(matrix.clone());
        let condition = matrix.norm_one() * lu.inverse_norm_one_estimate();
        if !(condition <= RESONANCE_CONDITION) {
            return Err(Error::Resonance {
                condition,
                wavenumber: k,
            });
        }
        Ok(Self {
            curve: curve.clone(),
            bc,
            side,
            k,
            coupling,
            representation,
            matrix,
            lu,
            condition,
        })
    }

    pub fn condition(&self) -> f64 {
        self.condition
    }

    pub fn representation(&self) -> Representation {
        self.representation
    }

    pub fn curve(&self) -> &BoundaryCurve {
        &self.curve
    }

    /// Boundary data `B u^i` at the nodes.
    fn incident_trace(&self, z: Point) -> Result<Vec<Complex64>> {
        self.curve
            .samples()
            .iter()
            .map(|s| self.incident_condition(s, z))
            .collect()
    }

    fn incident_condition(&self, s: &CurveSample, z: Point) -> Result<Complex64> {
        match self.bc {
            BoundaryCondition::Soft => incident_field(s.position, z, self.k),
            BoundaryCondition::Hard => {
                let g = incident_gradient(s.position, z, self.k)?;
                let nu = s.normal();
                Ok(g[0] * nu.x + g[1] * nu.y)
            }
        }
    }

    /// Density for the point source at `z`.
    pub fn solve(&self, z: Point) -> Result<DensitySolution> {
        let rhs: Vec<Complex64> = self.incident_trace(z)?.into_iter().map(|v| -2.0 * v).collect();
        let density = self.lu.solve(&rhs);
        let applied = self.matrix.mul_vec(&density);
        let num: f64 = applied
            .iter()
            .zip(&rhs)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        let den: f64 = rhs.iter().map(|b| b.norm_sqr()).sum::<f64>().sqrt();
        Ok(DensitySolution {
            density,
            representation: self.representation,
            condition: self.condition,
            residual: if den > 0.0 { num / den } else { num },
        })
    }

    /// Scattered field at points off the boundary (trapezoid rule).
    pub fn field(&self, density: &DensitySolution, points: &[Point]) -> Result<Vec<Complex64>> {
        let weight = 2.0 * PI / self.curve.len() as f64;
        let i = Complex64::new(0.0, 1.0);
        let k = self.k;
        points
            .iter()
            .map(|&x| {
                let mut acc = Complex64::new(0.0, 0.0);
                for (s, phi) in self.curve.samples().iter().zip(&density.density) {
                    let d = x - s.position;
                    let r = d.norm();
                    if r < super::SINGULAR_DISTANCE {
                        return Err(Error::Singularity { distance: r });
                    }
                    let table = CylinderTable::new(1, k * r)?;
                    let single = i * 0.25 * table.h(0) * s.speed();
                    let double = || {
                        let nd = Point::new(s.tangent.y, -s.tangent.x).dot(d);
                        i * (0.25 * k) * table.h(1) / r * nd
                    };
                    let kernel = match self.representation {
                        Representation::SingleLayer => single,
                        Representation::DoubleLayer => double(),
                        Representation::CombinedLayer => double() - i * self.coupling * single,
                    };
                    acc += kernel * phi;
                }
                Ok(acc * weight)
            })
            .collect()
    }

    /// `B(u^i + u^s)` at boundary parameters `ts`, using the Nyström
    /// interpolant of the density; small values mean the condition holds.
    pub fn bc_residual(&self, density: &DensitySolution, z: Point, ts: &[f64]) -> Result<Vec<Complex64>> {
        let m = self.curve.len();
        let n = m / 2;
        let h = PI / n as f64;
        let samples = self.curve.samples();
        let params = self.curve.params();
        let i = Complex64::new(0.0, 1.0);
        ts.iter()
            .map(|&t| {
                let target = self.curve.sample_at(t);
                let apply = |op| -> Complex64 {
                    samples
                        .iter()
                        .zip(params)
                        .zip(&density.density)
                        .map(|((src, &s), phi)| {
                            let (l, sm) = kernel(op, self.k, &target, t, src, s);
                            (l * log_weight(n, t - s) + sm * h) * phi
                        })
                        .sum()
                };
                let phi_t = interpolate(&density.density, params, t);
                let jump = match self.side {
                    Side::Exterior => 0.5,
                    Side::Interior => -0.5,
                };
                let trace = match self.representation {
                    Representation::CombinedLayer => {
                        0.5 * apply(Operator::Double) + jump * phi_t
                            - i * self.coupling * 0.5 * apply(Operator::Single)
                    }
                    Representation::DoubleLayer => 0.5 * apply(Operator::Double) + jump * phi_t,
                    Representation::SingleLayer => {
                        0.5 * apply(Operator::AdjointDouble) - jump * phi_t
                    }
                };
                Ok(self.incident_condition(&target, z)? + trace)
            })
            .collect()
    }
}
