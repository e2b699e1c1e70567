//! Fourier coefficients of ring data and their continuation off the ring
//! with Hankel (obstacle) or Bessel (cavity) radial factors.

use std::f64::consts::PI;
use std::io::Write;
use std::path::Path;

use num_complex::Complex64;

use crate::cylfun::CylinderTable;
use crate::forward::{FieldKind, RingMeasurement};
use crate::geometry::Point;
use crate::{Error, Result, Side};

/// Default `|J_n(kR)|` below which a cavity mode is dropped.
pub const DEFAULT_MODE_GUARD: f64 = 1e-8;

/// `⌊|ln δ|⌋ + 1` for obstacles, `⌊1.5 |ln δ|⌋ + 1` for cavities.
pub fn truncation_order(delta: f64, side: Side) -> Result<usize> {
    if delta == 0.0 {
        return Err(Error::Config(
            "clean data (delta = 0) needs an explicit truncation order".into(),
        ));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Domain(format!("noise level must lie in (0, 1), got {delta}")));
    }
    let scale = match side {
        Side::Exterior => 1.0,
        Side::Interior => 1.5,
    };
    Ok((scale * delta.ln().abs()).floor() as usize + 1)
}

/// Coefficients `û_n`, `n = -N..=N`, of one source's ring data.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeCoefficients {
    pub side: Side,
    pub wavenumber: f64,
    pub anchor_radius: f64,
    pub truncation: usize,
    values: Vec<Complex64>,
    excluded: Vec<bool>,
    /// `C_n(k r_anchor)` for `n = 0..=N`.
    anchor_values: Vec<Complex64>,
}

impl ModeCoefficients {
    /// Builds coefficients from explicit values ordered `-N..=N`.
    pub fn from_values(
        side: Side,
        wavenumber: f64,
        anchor_radius: f64,
        values: Vec<Complex64>,
    ) -> Result<Self> {
        if values.len() % 2 != 1 {
            return Err(Error::Mismatch("coefficient count must be odd".into()));
        }
        let truncation = values.len() / 2;
        let table = CylinderTable::new(truncation + 1, wavenumber * anchor_radius)?;
        let anchor_values = (0..=truncation as i32)
            .map(|n| match side {
                Side::Exterior => table.h(n),
                Side::Interior => Complex64::new(table.j(n), 0.0),
            })
            .collect();
        Ok(Self {
            side,
            wavenumber,
            anchor_radius,
            truncation,
            excluded: vec![false; values.len()],
            values,
            anchor_values,
        })
    }

    pub fn coefficient(&self, n: i32) -> Complex64 {
        self.values[(n + self.truncation as i32) as usize]
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn is_excluded(&self, n: i32) -> bool {
        self.excluded[(n + self.truncation as i32) as usize]
    }

    pub fn excluded_modes(&self) -> Vec<i32> {
        self.orders().filter(|&n| self.is_excluded(n)).collect()
    }

    pub fn orders(&self) -> impl Iterator<Item = i32> {
        let n = self.truncation as i32;
        -n..=n
    }

    /// True when `r` lies on the side of the anchor ring where the
    /// continuation is not backed by the stability estimates.
    pub fn is_extrapolated(&self, r: f64) -> bool {
        match self.side {
            Side::Exterior => r > self.anchor_radius,
            Side::Interior => r < self.anchor_radius,
        }
    }

    pub fn eval_field(&self, x: Point) -> Result<Complex64> {
        Ok(ModeBasis::new(self, x, false)?.field(self))
    }

    pub fn eval_gradient(&self, x: Point) -> Result<[Complex64; 2]> {
        ModeBasis::new(self, x, true)?.gradient(self)
    }
}

/// DFT coefficients of every source row; the ring must hold the scattered field.
pub fn compute_coefficients(ring: &RingMeasurement, truncation: usize) -> Result<Vec<ModeCoefficients>> {
    if ring.field != FieldKind::Scattered {
        return Err(Error::WrongFieldKind(ring.field.as_str()));
    }
    ring.validate()?;
    let m = ring.receiver_count();
    if 2 * truncation + 1 > m {
        return Err(Error::Nyquist {
            needed: 2 * truncation + 1,
            receivers: m,
        });
    }
    let n = truncation as i32;
    ring.samples
        .iter()
        .map(|row| {
            let values = (-n..=n)
                .map(|p| {
                    row.iter()
                        .enumerate()
                        .map(|(j, u)| {
                            let phase = -2.0 * PI * ((p as i64 * j as i64).rem_euclid(m as i64)) as f64 / m as f64;
                            u * Complex64::from_polar(1.0, phase)
                        })
                        .sum::<Complex64>()
                        / m as f64
                })
                .collect();
            ModeCoefficients::from_values(ring.sources.side, ring.wavenumber, ring.radius, values)
        })
        .collect()
}

/// Cavity modes with `|J_n(kR)| < threshold` are zeroed and flagged.
pub fn guard_interior_modes(coeffs: &ModeCoefficients, threshold: f64) -> Result<ModeCoefficients> {
    if coeffs.side != Side::Interior {
        return Err(Error::Mismatch("mode guard applies to the cavity problem only".into()));
    }
    let mut out = coeffs.clone();
    for n in coeffs.orders() {
        if coeffs.anchor_values[n.unsigned_abs() as usize].norm() < threshold {
            let idx = (n + coeffs.truncation as i32) as usize;
            out.excluded[idx] = true;
            out.values[idx] = Complex64::new(0.0, 0.0);
        }
    }
    Ok(out)
}

/// Radial factors at one point, shared by every source with the same
/// wavenumber, side, anchor and truncation.
#[derive(Debug, Clone)]
pub struct ModeBasis {
    radius: f64,
    theta: f64,
    /// `C_n(kr) / C_n(k r_anchor)`, `n = 0..=N`; negative orders share it.
    ratio: Vec<Complex64>,
    /// `k C_n'(kr) / C_n(k r_anchor)`
    radial: Vec<Complex64>,
}

impl ModeBasis {
    pub fn new(coeffs: &ModeCoefficients, x: Point, with_gradient: bool) -> Result<Self> {
        let r = x.norm();
        if with_gradient && r < 1e-12 {
            return Err(Error::Domain("gradient of the continued field at r = 0".into()));
        }
        let n = coeffs.truncation;
        let k = coeffs.wavenumber;
        let mut ratio = Vec::with_capacity(n + 1);
        let mut radial = Vec::with_capacity(if with_gradient { n + 1 } else { 0 });
        if r == 0.0 {
            // only J_0(0) = 1 survives; Hankel modes blow up
            if coeffs.side == Side::Exterior {
                return Err(Error::Domain("Hankel continuation at the origin".into()));
            }
            ratio.push(Complex64::new(1.0, 0.0) / coeffs.anchor_values[0]);
            ratio.extend(std::iter::repeat(Complex64::new(0.0, 0.0)).take(n));
        } else {
            let table = CylinderTable::new(n + 1, k * r)?;
            if coeffs.side == Side::Exterior && table.is_saturated(n as i32 + 1) {
                return Err(Error::Overflow(format!("Hankel modes at r = {r:e} exceed range")));
            }
            for p in 0..=n as i32 {
                let anchor = coeffs.anchor_values[p as usize];
                let (c, dc) = match coeffs.side {
                    Side::Exterior => (table.h(p), table.h_deriv(p)),
                    Side::Interior => (
                        Complex64::new(table.j(p), 0.0),
                        Complex64::new(table.j_deriv(p), 0.0),
                    ),
                };
                ratio.push(c / anchor);
                if with_gradient {
                    radial.push(dc * k / anchor);
                }
            }
        }
        Ok(Self {
            radius: r,
            theta: x.angle(),
            ratio,
            radial,
        })
    }

    /// `Σ û_n C_n(kr)/C_n(k r_a) e^{inθ}` over included modes.
    pub fn field(&self, coeffs: &ModeCoefficients) -> Complex64 {
        coeffs
            .orders()
            .filter(|&n| !coeffs.is_excluded(n))
            .map(|n| {
                coeffs.coefficient(n)
                    * self.ratio[n.unsigned_abs() as usize]
                    * Complex64::from_polar(1.0, n as f64 * self.theta)
            })
            .sum()
    }

    /// Cartesian gradient of [`ModeBasis::field`].
    pub fn gradient(&self, coeffs: &ModeCoefficients) -> Result<[Complex64; 2]> {
        if self.radial.len() != self.ratio.len() {
            return Err(Error::Mismatch("mode basis built without gradient factors".into()));
        }
        let i = Complex64::new(0.0, 1.0);
        let mut d_r = Complex64::new(0.0, 0.0);
        let mut d_theta = Complex64::new(0.0, 0.0);
        for n in coeffs.orders().filter(|&n| !coeffs.is_excluded(n)) {
            let a = n.unsigned_abs() as usize;
            let c = coeffs.coefficient(n) * Complex64::from_polar(1.0, n as f64 * self.theta);
            d_r += c * self.radial[a];
            d_theta += c * self.ratio[a] * i * (n as f64 / self.radius);
        }
        let (s, co) = self.theta.sin_cos();
        Ok([d_r * co - d_theta * s, d_r * s + d_theta * co])
    }
}

/// Debug dump with columns `source,n,re,im,excluded`.
pub fn write_coefficients_csv(path: &Path, coeffs: &[ModeCoefficients]) -> Result<()> {
    let mut out = String::from("source,n,re,im,excluded\n");
    for (j, c) in coeffs.iter().enumerate() {
        for n in c.orders() {
            let v = c.coefficient(n);
            out.push_str(&format!(
                "{j},{n},{:.16e},{:.16e},{}\n",
                v.re,
                v.im,
                u8::from(c.is_excluded(n))
            ));
        }
    }
    let mut file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(out.as_bytes()).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn truncation_rule() {
        assert_eq!(truncation_order(0.05, Side::Exterior).unwrap(), 3);
        assert_eq!(truncation_order(0.02, Side::Interior).unwrap(), 6);
        assert_eq!(truncation_order(0.02, Side::Exterior).unwrap(), 4);
        assert!(matches!(truncation_order(0.0, Side::Exterior), Err(Error::Config(_))));
        assert!(matches!(truncation_order(1.0, Side::Exterior), Err(Error::Domain(_))));
        assert!(matches!(truncation_order(-0.1, Side::Interior), Err(Error::Domain(_))));
    }

    #[test]
    fn guard_examples() {
        let kr0 = 2.404_825_557_695_773;
        let c = ModeCoefficients::from_values(Side::Interior, kr0 / 0.5, 0.5, vec![Complex64::new(1.0, 0.0); 5]).unwrap();
        let g = guard_interior_modes(&c, DEFAULT_MODE_GUARD).unwrap();
        assert_eq!(g.excluded_modes(), vec![0]);
        assert_eq!(g.coefficient(0), Complex64::new(0.0, 0.0));
        assert!(guard_interior_modes(&c, 0.0).unwrap().excluded_modes().is_empty());

        let c = ModeCoefficients::from_values(Side::Interior, 3.0, 0.5, vec![Complex64::new(1.0, 0.0); 13]).unwrap();
        assert!(guard_interior_modes(&c, DEFAULT_MODE_GUARD).unwrap().excluded_modes().is_empty());
    }

    #[test]
    fn radial_only_gradient_for_zero_mode() {
        let mut v = vec![Complex64::new(0.0, 0.0); 5];
        v[2] = Complex64::new(0.7, -0.2);
        let c = ModeCoefficients::from_values(Side::Exterior, 3.0, 2.2, v).unwrap();
        let x = Point::from_polar(1.3, 0.7);
        let g = c.eval_gradient(x).unwrap();
        // tangential component vanishes
        let t = Point::new(-x.y, x.x);
        assert!((g[0] * t.x + g[1] * t.y).norm() < 1e-15);
    }
}
