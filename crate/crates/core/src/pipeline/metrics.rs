//! Radial distance between indicator minima and the true boundary.

use std::f64::consts::PI;

use crate::geometry::{BoundaryCurve, Point};
use crate::indicator::IndicatorImage;
use crate::{Error, Result};

/// Relative spread below which a ray's samples count as constant.
const FLAT_RAY: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct RayError {
    pub angle: f64,
    pub truth_radius: f64,
    /// Radius of the grid point holding the minimum.
    pub found_radius: f64,
    pub distance: f64,
    /// Minimum not unique (flat ray); excluded from the summary.
    pub non_informative: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryError {
    pub rays: Vec<RayError>,
    pub median: f64,
    pub p90: f64,
    /// Summary in units of the smaller grid spacing.
    pub median_cells: f64,
    pub non_informative: usize,
}

/// Linear-interpolated quantile of a sample.
pub fn quantile(values: &[f64], q: f64) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let pos = q * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    v[lo] + (v[hi] - v[lo]) * (pos - lo as f64)
}

/// Along `n_rays` equiangular rays from the grid centre, finds the grid
/// minimum of the indicator in `[0.6 r, 1.4 r]` around the true radius `r`.
pub fn radial_boundary_error(image: &IndicatorImage, truth: &BoundaryCurve, n_rays: usize) -> Result<BoundaryError> {
    let grid = &image.grid;
    let center = grid.center();
    let (dx, dy) = grid.spacing();
    let h = dx.min(dy);
    let mut rays = Vec::with_capacity(n_rays);
    for i in 0..n_rays {
        let angle = 2.0 * PI * i as f64 / n_rays as f64;
        let truth_radius = truth.ray_radius(center, angle);
        let dir = Point::from_polar(1.0, angle);
        let (lo, hi) = (0.6 * truth_radius, 1.4 * truth_radius);
        let steps = ((hi - lo) / (0.25 * h)).ceil() as usize;
        let mut best: Option<(usize, f64)> = None;
        let mut worst = f64::NEG_INFINITY;
        let mut last = usize::MAX;
        for s in 0..=steps {
            let r = lo + (hi - lo) * s as f64 / steps.max(1) as f64;
            let Some(idx) = grid.nearest(center + dir * r) else { continue };
            if idx == last || grid.mask()[idx] {
                continue;
            }
            last = idx;
            let v = image.values[idx];
            worst = worst.max(v);
            if best.map_or(true, |(_, b)| v < b) {
                best = Some((idx, v));
            }
        }
        let (idx, min) = best.ok_or(Error::EmptyRay { angle })?;
        let found_radius = (grid.points()[idx] - center).norm();
        let flat = worst - min <= FLAT_RAY * worst.abs().max(f64::MIN_POSITIVE);
        rays.push(RayError {
            angle,
            truth_radius,
            found_radius,
            distance: (found_radius - truth_radius).abs(),
            non_informative: flat,
        });
    }
    let informative: Vec<f64> = rays.iter().filter(|r| !r.non_informative).map(|r| r.distance).collect();
    let median = quantile(&informative, 0.5);
    Ok(BoundaryError {
        p90: quantile(&informative, 0.9),
        median_cells: median / h,
        median,
        non_informative: rays.len() - informative.len(),
        rays,
    })
}
