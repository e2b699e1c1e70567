//! Direct imaging of impenetrable scatterers from point-source near-field data.
//!
//! The scattered field measured on a circle is continued towards the unknown
//! boundary with a truncated Fourier–Hankel (obstacle) or Fourier–Bessel
//! (cavity) expansion. The boundary is then located as the zero set of an
//! indicator built from the boundary condition: the total field for a
//! sound-soft scatterer, the total field gradient along a rotated reference
//! direction for a sound-hard one.
//!
//! Synthetic data come from a Nyström boundary-integral solver
//! ([`forward`]) that is checked against a separation-of-variables series
//! for circular scatterers.

pub mod continuation;
pub mod cylfun;
pub mod error;
pub mod forward;
pub mod geometry;
pub mod indicator;
pub mod noise;
pub mod pipeline;

pub use error::{Error, Result};
pub use geometry::Point;

/// Which side of the scatterer carries sources and receivers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    /// Obstacle problem: everything happens outside the scatterer.
    Exterior,
    /// Cavity problem: sources and receivers sit inside the hollow.
    Interior,
}

/// Boundary condition of the scatterer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundaryCondition {
    /// Dirichlet, u = 0.
    Soft,
    /// Neumann, du/dnu = 0.
    Hard,
}

impl Side {
    pub fn as_str(self) -> &'static str {
        match self {
            Side::Exterior => "exterior",
            Side::Interior => "interior",
        }
    }
}

impl std::str::FromStr for Side {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "exterior" | "obstacle" => Ok(Side::Exterior),
            "interior" | "cavity" => Ok(Side::Interior),
            other => Err(Error::Config(format!("unknown side '{other}'"))),
        }
    }
}

impl BoundaryCondition {
    pub fn as_str(self) -> &'static str {
        match self {
            BoundaryCondition::Soft => "soft",
            BoundaryCondition::Hard => "hard",
        }
    }
}

impl std::str::FromStr for BoundaryCondition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "soft" | "dirichlet" => Ok(BoundaryCondition::Soft),
            "hard" | "neumann" => Ok(BoundaryCondition::Hard),
            other => Err(Error::Config(format!("unknown boundary condition '{other}'"))),
        }
    }
}
