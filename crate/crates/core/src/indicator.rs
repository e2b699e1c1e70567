//! Soft and hard indicator functions on the imaging grid.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::continuation::{ModeBasis, ModeCoefficients};
use crate::forward::{incident_field, incident_gradient, SourceSet};
use crate::geometry::{ImagingGrid, Point};
use crate::{BoundaryCondition, Error, Result, Side};

/// Gradients below this norm make the hard indicator undefined at a point.
pub const DEGENERATE_GRADIENT: f64 = 1e-14;
/// Floor used before taking reciprocals.
pub const RECIPROCAL_FLOOR: f64 = 1e-12;
const SOURCE_CLEARANCE: f64 = 1e-9;
/// Radius below which Hankel modes and polar gradients are undefined.
const CENTER_GUARD: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Normalization {
    Raw,
    Normalized,
    Reciprocal,
}

impl Normalization {
    pub fn as_str(self) -> &'static str {
        match self {
            Normalization::Raw => "raw",
            Normalization::Normalized => "normalized",
            Normalization::Reciprocal => "reciprocal",
        }
    }
}

impl std::str::FromStr for Normalization {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "raw" => Ok(Normalization::Raw),
            "normalized" => Ok(Normalization::Normalized),
            "reciprocal" => Ok(Normalization::Reciprocal),
            other => Err(Error::Config(format!("unknown normalization '{other}'"))),
        }
    }
}

/// Values on an imaging grid; masked points hold 0 and are ignored.
#[derive(Debug, Clone, PartialEq)]
pub struct IndicatorImage {
    pub grid: ImagingGrid,
    pub kind: BoundaryCondition,
    pub wavenumbers: Vec<f64>,
    pub normalization: Normalization,
    pub values: Vec<f64>,
    /// Degenerate points (all source gradients vanish).
    pub flags: Vec<bool>,
}

impl IndicatorImage {
    /// Unmasked `(index, value)` pairs.
    pub fn active(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.grid
            .mask()
            .iter()
            .zip(&self.values)
            .enumerate()
            .filter(|(_, (m, _))| !**m)
            .map(|(i, (_, v))| (i, *v))
    }

    pub fn max_active(&self) -> f64 {
        self.active().map(|(_, v)| v).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn flagged_count(&self) -> usize {
        self.flags.iter().filter(|f| **f).count()
    }
}

/// Per-point detail of the hard indicator.
#[derive(Debug, Clone, PartialEq)]
pub struct HardPoint {
    /// Reference source and its total-field gradient; `None` when degenerate.
    pub reference: Option<(usize, [Complex64; 2])>,
    /// `|∇u_j · ν|` per source, before quadrature weighting.
    pub terms: Vec<f64>,
}

fn check_inputs(coeffs: &[ModeCoefficients], sources: &SourceSet) -> Result<()> {
    let first = coeffs
        .first()
        .ok_or_else(|| Error::Mismatch("no coefficient sets".into()))?;
    if coeffs.len() != sources.len() {
        return Err(Error::Mismatch(format!(
            "{} coefficient sets for {} sources",
            coeffs.len(),
            sources.len()
        )));
    }
    for c in coeffs {
        if c.wavenumber != first.wavenumber {
            return Err(Error::Mismatch(format!(
                "wavenumbers differ across sources ({} vs {})",
                c.wavenumber, first.wavenumber
            )));
        }
        if c.side != first.side || c.anchor_radius != first.anchor_radius || c.truncation != first.truncation {
            return Err(Error::Mismatch("coefficient sets disagree on side, anchor or truncation".into()));
        }
    }
    if first.side != sources.side {
        return Err(Error::Mismatch("coefficients and sources are on different sides".into()));
    }
    Ok(())
}

fn check_clearance(x: Point, sources: &SourceSet) -> Result<()> {
    for &z in sources.locations() {
        let d = x.distance(z);
        if d < SOURCE_CLEARANCE {
            return Err(Error::Singularity { distance: d });
        }
    }
    Ok(())
}

fn quadrature_weight(sources: &SourceSet) -> f64 {
    2.0 * PI * sources.circle.radius / sources.len() as f64
}

/// Continued total-field gradients of every source at `x`.
fn total_gradients(coeffs: &[ModeCoefficients], sources: &SourceSet, x: Point) -> Result<Vec<[Complex64; 2]>> {
    let basis = ModeBasis::new(&coeffs[0], x, true)?;
    let k = coeffs[0].wavenumber;
    coeffs
        .iter()
        .zip(sources.locations())
        .map(|(c, &z)| {
            let g = basis.gradient(c)?;
            let gi = incident_gradient(x, z, k)?;
            Ok([g[0] + gi[0], g[1] + gi[1]])
        })
        .collect()
}

fn complex_norm(v: &[Complex64; 2]) -> f64 {
    (v[0].norm_sqr() + v[1].norm_sqr()).sqrt()
}

/// Source with the largest total-field gradient at `x` (lowest index on ties).
pub fn select_reference_source(
    coeffs: &[ModeCoefficients],
    sources: &SourceSet,
    x: Point,
) -> Result<Option<(usize, [Complex64; 2])>> {
    check_inputs(coeffs, sources)?;
    check_clearance(x, sources)?;
    Ok(strongest_gradient(&total_gradients(coeffs, sources, x)?))
}

/// Index and value of the largest gradient (lowest index on ties); `None`
/// when every norm is below [`DEGENERATE_GRADIENT`].
pub fn strongest_gradient(grads: &[[Complex64; 2]]) -> Option<(usize, [Complex64; 2])> {
    let mut best: Option<(usize, f64)> = None;
    for (j, g) in grads.iter().enumerate() {
        let n = complex_norm(g);
        if best.map_or(true, |(_, b)| n > b) {
            best = Some((j, n));
        }
    }
    match best {
        Some((j, n)) if n >= DEGENERATE_GRADIENT => Some((j, grads[j])),
        _ => None,
    }
}

/// Hard-indicator terms at one point.
pub fn hard_point(coeffs: &[ModeCoefficients], sources: &SourceSet, x: Point) -> Result<HardPoint> {
    check_inputs(coeffs, sources)?;
    check_clearance(x, sources)?;
    hard_point_unchecked(coeffs, sources, x)
}

fn hard_point_unchecked(coeffs: &[ModeCoefficients], sources: &SourceSet, x: Point) -> Result<HardPoint> {
    let grads = total_gradients(coeffs, sources, x)?;
    let reference = strongest_gradient(&grads);
    let terms = match reference {
        None => vec![0.0; grads.len()],
        Some((_, xi)) => {
            // dividing after the dot product keeps the reference term exactly zero
            let norm = complex_norm(&xi);
            grads.iter().map(|g| (g[0] * -xi[1] + g[1] * xi[0]).norm() / norm).collect()
        }
    };
    Ok(HardPoint { reference, terms })
}

fn soft_sum(coeffs: &[ModeCoefficients], sources: &SourceSet, x: Point) -> Result<f64> {
    let k = coeffs[0].wavenumber;
    let basis = ModeBasis::new(&coeffs[0], x, false)?;
    let mut sum = 0.0;
    for (c, &z) in coeffs.iter().zip(sources.locations()) {
        sum += (basis.field(c) + incident_field(x, z, k)?).norm();
    }
    Ok(sum)
}

/// Raw soft indicator at one point.
pub fn soft_value(coeffs: &[ModeCoefficients], sources: &SourceSet, x: Point) -> Result<f64> {
    check_inputs(coeffs, sources)?;
    check_clearance(x, sources)?;
    Ok(quadrature_weight(sources) * soft_sum(coeffs, sources, x)?)
}

/// Raw hard indicator at one point and its degeneracy flag.
pub fn hard_value(coeffs: &[ModeCoefficients], sources: &SourceSet, x: Point) -> Result<(f64, bool)> {
    let p = hard_point(coeffs, sources, x)?;
    Ok((quadrature_weight(sources) * p.terms.iter().sum::<f64>(), p.reference.is_none()))
}

/// Points where the continuation cannot be evaluated; imaged as flagged zeros.
fn at_center(coeffs: &ModeCoefficients, x: Point, needs_gradient: bool) -> bool {
    x.norm() < CENTER_GUARD && (needs_gradient || coeffs.side == Side::Exterior)
}

fn evaluate(
    coeffs: &[ModeCoefficients],
    sources: &SourceSet,
    grid: &ImagingGrid,
    needs_gradient: bool,
    point_value: impl Fn(Point) -> Result<(f64, bool)> + Sync,
) -> Result<(Vec<f64>, Vec<bool>)> {
    check_inputs(coeffs, sources)?;
    let weight = quadrature_weight(sources);
    let results = grid
        .points()
        .par_iter()
        .zip(grid.mask().par_iter())
        .map(|(&x, &masked)| {
            if masked {
                return Ok((0.0, false));
            }
            check_clearance(x, sources)?;
            if at_center(&coeffs[0], x, needs_gradient) {
                return Ok((0.0, true));
            }
            let (v, flag) = point_value(x)?;
            Ok((weight * v, flag))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(results.into_iter().unzip())
}

/// `Σ_j w |u_N(x; z_j) + u^i(x; z_j)|`.
pub fn indicator_soft(coeffs: &[ModeCoefficients], sources: &SourceSet, grid: &ImagingGrid) -> Result<IndicatorImage> {
    let k = coeffs.first().map_or(0.0, |c| c.wavenumber);
    let (values, flags) = evaluate(coeffs, sources, grid, false, |x| Ok((soft_sum(coeffs, sources, x)?, false)))?;
    Ok(IndicatorImage {
        grid: grid.clone(),
        kind: BoundaryCondition::Soft,
        wavenumbers: vec![k],
        normalization: Normalization::Raw,
        values,
        flags,
    })
}

/// `Σ_j w |∇(u_N + u^i)(x; z_j) · ν|` with `ν` perpendicular to the
/// reference gradient under the unconjugated product.
pub fn indicator_hard(coeffs: &[ModeCoefficients], sources: &SourceSet, grid: &ImagingGrid) -> Result<IndicatorImage> {
    let k = coeffs.first().map_or(0.0, |c| c.wavenumber);
    let (values, flags) = evaluate(coeffs, sources, grid, true, |x| {
        let p = hard_point_unchecked(coeffs, sources, x)?;
        Ok((p.terms.iter().sum(), p.reference.is_none()))
    })?;
    Ok(IndicatorImage {
        grid: grid.clone(),
        kind: BoundaryCondition::Hard,
        wavenumbers: vec![k],
        normalization: Normalization::Raw,
        values,
        flags,
    })
}

/// Divides by the maximum over unmasked points.
pub fn normalize(image: &IndicatorImage) -> Result<IndicatorImage> {
    if image.normalization == Normalization::Reciprocal {
        return Err(Error::Mismatch("cannot normalize a reciprocal image".into()));
    }
    let max = image.max_active();
    if !(max > 0.0) || !max.is_finite() {
        return Err(Error::AllZero);
    }
    let mut out = image.clone();
    for (v, &m) in out.values.iter_mut().zip(image.grid.mask()) {
        *v = if m { 0.0 } else { *v / max };
    }
    out.normalization = Normalization::Normalized;
    Ok(out)
}

/// `1 / max(v, 1e-12)` of a normalized image.
pub fn reciprocal(image: &IndicatorImage) -> Result<IndicatorImage> {
    if image.normalization != Normalization::Normalized {
        return Err(Error::Mismatch("reciprocal expects a normalized image".into()));
    }
    let mut out = image.clone();
    for (v, &m) in out.values.iter_mut().zip(image.grid.mask()) {
        *v = if m { 0.0 } else { 1.0 / v.max(RECIPROCAL_FLOOR) };
    }
    out.normalization = Normalization::Reciprocal;
    Ok(out)
}

/// Pointwise sum of normalized single-frequency images, renormalized.
pub fn superpose_multifrequency(images: &[IndicatorImage]) -> Result<IndicatorImage> {
    let first = images
        .first()
        .ok_or_else(|| Error::Mismatch("no images to superpose".into()))?;
    let mut out = first.clone();
    out.wavenumbers.clear();
    out.values.iter_mut().for_each(|v| *v = 0.0);
    for img in images {
        if !img.grid.same_layout(&first.grid) || img.kind != first.kind {
            return Err(Error::Mismatch("images differ in grid or kind".into()));
        }
        if img.normalization != Normalization::Normalized {
            return Err(Error::Mismatch("superposition expects normalized images".into()));
        }
        for (o, v) in out.values.iter_mut().zip(&img.values) {
            *o += v;
        }
        for (o, f) in out.flags.iter_mut().zip(&img.flags) {
            *o |= *f;
        }
        out.wavenumbers.extend(&img.wavenumbers);
    }
    out.normalization = Normalization::Raw;
    normalize(&out)
}
