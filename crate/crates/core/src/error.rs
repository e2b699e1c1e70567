use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("overflow guard: {0}")]
    Overflow(String),

    #[error("invalid shape: {0}")]
    InvalidShape(String),

    #[error("point source singularity: |x - z| = {distance:e}")]
    Singularity { distance: f64 },

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("boundary system ill-conditioned (condition estimate {condition:e}), k = {wavenumber} may be near a resonance")]
    Resonance { condition: f64, wavenumber: f64 },

    #[error("mode degeneracy at order {order}: |{quantity}| = {value:e} (k^2 near an eigenvalue)")]
    ModeDegeneracy {
        order: i32,
        quantity: &'static str,
        value: f64,
    },

    #[error("series did not converge within {0} modes")]
    NoConvergence(usize),

    #[error("Nyquist violation: 2N+1 = {needed} exceeds {receivers} receivers")]
    Nyquist { needed: usize, receivers: usize },

    #[error("receivers are not equispaced on the ring")]
    NonEquispaced,

    #[error("field samples are {0}, expected scattered field")]
    WrongFieldKind(&'static str),

    #[error("mismatched inputs: {0}")]
    Mismatch(String),

    #[error("all-zero indicator image cannot be normalized")]
    AllZero,

    #[error("configuration error: {0}")]
    Config(String),

    #[error("parse error in {path}: line {line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("configuration is not concentric circles: {0}")]
    NonCircular(String),

    #[error("ray at angle {angle:.6} has no unmasked samples in its search annulus")]
    EmptyRay { angle: f64 },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
