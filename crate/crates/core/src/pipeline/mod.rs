//! End-to-end runs: simulate, perturb, truncate, continue, indicate, render.

pub mod config;
pub mod io;
pub mod metrics;
pub mod rates;
pub mod render;

use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::continuation::{compute_coefficients, guard_interior_modes, truncation_order};
use crate::forward::{solve_forward, FieldKind, RingMeasurement, SourceSet};
use crate::geometry::{make_curve, BoundaryCurve, Circle};
use crate::indicator::{indicator_hard, indicator_soft, normalize, reciprocal, superpose_multifrequency, IndicatorImage};
use crate::noise::{add_noise, NoiseSpec, GENERATOR_ID};
use crate::{BoundaryCondition, Error, Result, Side};

pub use config::{load_config, parse_override, parse_pairs, ScenarioConfig};
pub use metrics::{radial_boundary_error, BoundaryError};
pub use rates::{convergence_study, RateReport, StudyConfig};
pub use render::{render_pgm, render_pgm_file, PgmScale};

/// First zero of `J_0`.
const J0_FIRST_ZERO: f64 = 2.4048;

/// Images and diagnostics for one wavenumber.
#[derive(Debug, Clone)]
pub struct FrequencyResult {
    pub wavenumber: f64,
    pub truncation: usize,
    pub excluded_modes: Vec<i32>,
    pub condition: f64,
    /// Ring data after noise, as used for the reconstruction.
    pub ring: RingMeasurement,
    pub raw: IndicatorImage,
    pub normalized: IndicatorImage,
    pub boundary_error: BoundaryError,
}

#[derive(Debug, Clone)]
pub struct Reconstruction {
    pub curve: BoundaryCurve,
    pub frequencies: Vec<FrequencyResult>,
    /// Superposed image and its metric when more than one wavenumber ran.
    pub superposed: Option<(IndicatorImage, BoundaryError)>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub reconstruction: Reconstruction,
    pub files: Vec<PathBuf>,
    pub manifest: PathBuf,
}

/// Truncation order actually used at noise level `delta`.
pub fn resolve_truncation(cfg: &ScenarioConfig) -> Result<usize> {
    match cfg.truncation {
        Some(n) => Ok(n),
        None => truncation_order(cfg.delta, cfg.side),
    }
}

pub fn warnings(cfg: &ScenarioConfig) -> Vec<String> {
    let mut out = Vec::new();
    if cfg.side == Side::Interior {
        for &k in &cfg.wavenumbers {
            let kr = k * cfg.receiver_radius;
            if kr >= J0_FIRST_ZERO {
                out.push(format!(
                    "k*R = {kr:.4} >= {J0_FIRST_ZERO}: measurement disk exceeds the admissible radius 2.4048/k"
                ));
            }
        }
    }
    out
}

/// Clean scattered field on the receiver ring; returns the ring and the
/// boundary-system condition estimate.
pub fn simulate(cfg: &ScenarioConfig, k: f64, curve: &BoundaryCurve) -> Result<(RingMeasurement, f64)> {
    let sources = SourceSet::new(cfg.source_circle(), cfg.source_count, cfg.side)?;
    let receivers = Circle::centered(cfg.receiver_radius).points(cfg.receiver_count);
    let out = solve_forward(curve, cfg.bc, cfg.side, k, &sources, &receivers)?;
    Ok((
        RingMeasurement {
            radius: cfg.receiver_radius,
            wavenumber: k,
            sources,
            field: FieldKind::Scattered,
            delta: 0.0,
            samples: out.values,
        },
        out.condition,
    ))
}

/// Raw indicator from (possibly noisy) ring data.
pub fn image_from_ring(
    ring: &RingMeasurement,
    bc: BoundaryCondition,
    truncation: usize,
    mode_guard: f64,
    grid: &crate::geometry::ImagingGrid,
) -> Result<(IndicatorImage, Vec<i32>)> {
    let mut coeffs = compute_coefficients(ring, truncation)?;
    let mut excluded = Vec::new();
    if ring.sources.side == Side::Interior {
        coeffs = coeffs
            .iter()
            .map(|c| guard_interior_modes(c, mode_guard))
            .collect::<Result<_>>()?;
        excluded = coeffs.first().map(|c| c.excluded_modes()).unwrap_or_default();
    }
    let image = match bc {
        BoundaryCondition::Soft => indicator_soft(&coeffs, &ring.sources, grid)?,
        BoundaryCondition::Hard => indicator_hard(&coeffs, &ring.sources, grid)?,
    };
    Ok((image, excluded))
}

/// Runs the whole chain in memory.
pub fn reconstruct(cfg: &ScenarioConfig) -> Result<Reconstruction> {
    cfg.validate()?;
    let curve = make_curve(&cfg.shape_spec())?;
    let grid = cfg.grid()?;
    let truncation = resolve_truncation(cfg)?;
    if 2 * truncation + 1 > cfg.receiver_count {
        return Err(Error::Nyquist {
            needed: 2 * truncation + 1,
            receivers: cfg.receiver_count,
        });
    }
    let mut frequencies = Vec::with_capacity(cfg.wavenumbers.len());
    for (i, &k) in cfg.wavenumbers.iter().enumerate() {
        let (clean, condition) = simulate(cfg, k, &curve)?;
        let noise = NoiseSpec::new(cfg.delta, cfg.seed.wrapping_add(i as u64))?;
        let ring = add_noise(&clean, &noise)?;
        let (raw, excluded_modes) = image_from_ring(&ring, cfg.bc, truncation, cfg.mode_guard, &grid)?;
        let normalized = normalize(&raw)?;
        let boundary_error = radial_boundary_error(&raw, &curve, cfg.rays)?;
        frequencies.push(FrequencyResult {
            wavenumber: k,
            truncation,
            excluded_modes,
            condition,
            ring,
            raw,
            normalized,
            boundary_error,
        });
    }
    let superposed = if frequencies.len() > 1 {
        let images: Vec<IndicatorImage> = frequencies.iter().map(|f| f.normalized.clone()).collect();
        let sum = superpose_multifrequency(&images)?;
        let err = radial_boundary_error(&sum, &curve, cfg.rays)?;
        Some((sum, err))
    } else {
        None
    };
    Ok(Reconstruction {
        curve,
        frequencies,
        superposed,
        warnings: warnings(cfg),
    })
}

fn sha256_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn metric_line(label: &str, e: &BoundaryError) -> String {
    format!(
        "median={:.6e} p90={:.6e} median_cells={:.3} non_informative={} ({label})",
        e.median, e.p90, e.median_cells, e.non_informative
    )
}

/// File tag for one wavenumber: `k3`, `k3.5`, ...
pub fn frequency_tag(k: f64) -> String {
    format!("k{k}")
}

/// Writes `indicator_{tag}.csv`, `reciprocal_{tag}.csv` and
/// `reciprocal_{tag}.pgm` for a normalized image.
pub fn write_images(dir: &Path, tag: &str, normalized: &IndicatorImage, scale: PgmScale) -> Result<Vec<PathBuf>> {
    let norm_path = dir.join(format!("indicator_{tag}.csv"));
    io::write_image(&norm_path, normalized)?;
    let recip = reciprocal(normalized)?;
    let recip_path = dir.join(format!("reciprocal_{tag}.csv"));
    io::write_image(&recip_path, &recip)?;
    let pgm_path = dir.join(format!("reciprocal_{tag}.pgm"));
    write_file(&pgm_path, &render_pgm(&recip, scale)?)?;
    Ok(vec![norm_path, recip_path, pgm_path])
}

/// Runs the chain and writes ring data, grid CSVs, PGMs and a manifest
/// (last) into `cfg.output_dir`.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<RunSummary> {
    let rec = reconstruct(cfg)?;
    let dir = &cfg.output_dir;
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut files = Vec::new();
    let mut results = Vec::new();

    for f in &rec.frequencies {
        let tag = frequency_tag(f.wavenumber);
        let mut meta = io::Metadata::new();
        meta.insert("bc".into(), cfg.bc.as_str().into());
        meta.insert("shape".into(), cfg.shape.name().into());
        meta.insert("seed".into(), cfg.seed.to_string());
        meta.insert("noise".into(), GENERATOR_ID.into());
        let ring_path = dir.join(format!("ring_{tag}.csv"));
        io::write_ring(&ring_path, &f.ring, &meta)?;
        files.push(ring_path);
        files.extend(write_images(dir, &tag, &f.normalized, cfg.pgm_scale)?);
        let excluded: Vec<String> = f.excluded_modes.iter().map(|n| n.to_string()).collect();
        results.push(format!(
            "# result k={} truncation={} excluded_modes=[{}] condition={:.6e} flagged={} {}",
            f.wavenumber,
            f.truncation,
            excluded.join(","),
            f.condition,
            f.raw.flagged_count(),
            metric_line(&tag, &f.boundary_error)
        ));
    }
    if let Some((img, err)) = &rec.superposed {
        files.extend(write_images(dir, "multi", img, cfg.pgm_scale)?);
        results.push(format!("# result superposed {}", metric_line("multi", err)));
    }

    let mut manifest = String::from("# fbimg run manifest\n");
    manifest.push_str(&cfg.to_text());
    manifest.push_str(&format!("# noise_generator={GENERATOR_ID}\n"));
    for w in &rec.warnings {
        manifest.push_str(&format!("# warning: {w}\n"));
    }
    for r in &results {
        manifest.push_str(r);
        manifest.push('\n');
    }
    for f in &files {
        let name = f.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        manifest.push_str(&format!("# sha256 {}  {}\n", sha256_file(f)?, name));
    }
    let manifest_path = dir.join("manifest.txt");
    write_file(&manifest_path, &manifest)?;
    Ok(RunSummary {
        reconstruction: rec,
        files,
        manifest: manifest_path,
    })
}
