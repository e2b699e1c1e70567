//! Multiplicative random perturbation of ring data.
//!
//! Each sample becomes `u + δ r1 |u| e^{iπ r2}` with `r1, r2` uniform on
//! `[-1, 1)`. Source `j` draws from ChaCha20 stream `j` of the seeded key,
//! receivers in order, `r1` before `r2`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};

use crate::forward::{FieldKind, RingMeasurement};
use crate::{Error, Result};

pub const GENERATOR_ID: &str = "chacha20-stream-v1";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub delta: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn new(delta: f64, seed: u64) -> Result<Self> {
        if !(0.0..1.0).contains(&delta) {
            return Err(Error::Domain(format!("noise level must lie in [0, 1), got {delta}")));
        }
        Ok(Self { delta, seed })
    }

    pub fn generator(&self) -> &'static str {
        GENERATOR_ID
    }
}

/// Uniform draws on `[-1, 1)` for one source.
pub struct UnitStream(ChaCha20Rng);

impl UnitStream {
    pub fn new(seed: u64, source: u64) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        rng.set_stream(source);
        Self(rng)
    }

    pub fn next(&mut self) -> f64 {
        let unit = (self.0.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
        2.0 * unit - 1.0
    }
}

pub fn add_noise(ring: &RingMeasurement, spec: &NoiseSpec) -> Result<RingMeasurement> {
    NoiseSpec::new(spec.delta, spec.seed)?;
    if ring.field != FieldKind::Scattered {
        return Err(Error::WrongFieldKind(ring.field.as_str()));
    }
    let mut out = ring.clone();
    out.delta = spec.delta;
    if spec.delta == 0.0 {
        return Ok(out);
    }
    for (j, row) in out.samples.iter_mut().enumerate() {
        let mut stream = UnitStream::new(spec.seed, j as u64);
        for u in row.iter_mut() {
            let r1 = stream.next();
            let r2 = stream.next();
            *u += Complex64::from_polar(spec.delta * r1 * u.norm(), PI * r2);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn draws_are_in_range_and_centred() {
        let mut s = UnitStream::new(7, 0);
        let n = 200_000;
        let mut sum = 0.0;
        for _ in 0..n {
            let r = s.next();
            assert!((-1.0..1.0).contains(&r));
            sum += r;
        }
        assert!((sum / n as f64).abs() < 0.02);
    }

    #[test]
    fn streams_differ_per_source() {
        let a = UnitStream::new(1, 0).next();
        let b = UnitStream::new(1, 1).next();
        assert_ne!(a, b);
        assert_eq!(a, UnitStream::new(1, 0).next());
    }

    #[test]
    fn rejects_bad_levels() {
        assert!(NoiseSpec::new(-0.1, 0).is_err());
        assert!(NoiseSpec::new(1.0, 0).is_err());
        assert!(NoiseSpec::new(0.0, 0).is_ok());
    }
}
