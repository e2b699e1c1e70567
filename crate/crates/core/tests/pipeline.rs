use std::path::Path;

use fbimg::forward::{FieldKind, RingMeasurement, SourceSet};
use fbimg::geometry::{imaging_grid, make_curve, Circle, Point, ShapeKind, ShapeSpec};
use fbimg::indicator::{IndicatorImage, Normalization};
use fbimg::pipeline::io::*;
use fbimg::pipeline::metrics::quantile;
use fbimg::pipeline::*;
use fbimg::{BoundaryCondition, Error, Side};
use num_complex::Complex64;

fn pairs(items: &[(&str, &str)]) -> Vec<(String, String)> {
    items.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
}

fn small(items: &[(&str, &str)], dir: &Path) -> ScenarioConfig {
    let mut p = pairs(&[("grid_nx", "60"), ("grid_ny", "60"), ("shape_nodes", "256")]);
    p.extend(pairs(items));
    p.push(("output_dir".into(), dir.display().to_string()));
    ScenarioConfig::from_pairs(&p).unwrap()
}

fn checksum_lines(manifest: &Path) -> Vec<String> {
    std::fs::read_to_string(manifest)
        .unwrap()
        .lines()
        .filter(|l| l.starts_with("# sha256"))
        .map(String::from)
        .collect()
}

#[test]
fn config_file_with_comments_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("scenario.conf");
    std::fs::write(
        &path,
        "# cavity run\nside = interior\nbc = hard   # Neumann wall\n\nshape = kite\nwavenumbers = 3:4:0.5\ndelta = 0.02\n",
    )
    .unwrap();
    let cfg = load_config(&path, &[parse_override("seed=7").unwrap(), parse_override("delta = 0.01").unwrap()]).unwrap();
    assert_eq!(cfg.side, Side::Interior);
    assert_eq!(cfg.bc, BoundaryCondition::Hard);
    assert_eq!(cfg.shape, ShapeKind::Kite);
    assert_eq!(cfg.wavenumbers, vec![3.0, 3.5, 4.0]);
    assert_eq!(cfg.delta, 0.01);
    assert_eq!(cfg.seed, 7);
    assert_eq!(cfg.receiver_radius, 0.5);
    assert_eq!(cfg.exclusion_radius, Some(0.5));

    let echoed = dir.path().join("echo.conf");
    std::fs::write(&echoed, cfg.to_text()).unwrap();
    assert_eq!(load_config(&echoed, &[]).unwrap(), cfg);
}

#[test]
fn config_errors() {
    assert!(matches!(
        ScenarioConfig::from_pairs(&pairs(&[("colour", "red")])),
        Err(Error::Config(_))
    ));
    assert!(parse_override("novalue").is_err());
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.conf");
    std::fs::write(&path, "side = exterior\njust words\n").unwrap();
    assert!(matches!(load_config(&path, &[]), Err(Error::Parse { line: 2, .. })));
    assert!(ScenarioConfig::from_pairs(&pairs(&[("shape_nodes", "33")])).is_err());
    assert!(ScenarioConfig::from_pairs(&pairs(&[("shape_nodes", "8")])).is_err());
}

#[test]
fn defaults_follow_the_experiment_setup() {
    let soft = ScenarioConfig::defaults(Side::Exterior, BoundaryCondition::Soft);
    assert_eq!((soft.source_count, soft.receiver_count), (12, 128));
    assert_eq!((soft.source_radius, soft.receiver_radius), (2.2, 2.2));
    assert_eq!((soft.grid_nx, soft.grid_ny), (150, 150));
    assert_eq!(soft.grid_bounds, [-1.5, 1.5, -1.5, 1.5]);
    assert_eq!(soft.delta, 0.05);
    let hard = ScenarioConfig::defaults(Side::Interior, BoundaryCondition::Hard);
    assert_eq!(hard.delta, 0.02);
    assert_eq!(hard.wavenumbers, vec![3.0, 3.5, 4.0, 4.5, 5.0, 5.5, 6.0]);
    assert_eq!(hard.receiver_radius, 0.5);
}

#[test]
fn clean_data_needs_truncation() {
    assert!(matches!(
        ScenarioConfig::from_pairs(&pairs(&[("delta", "0")])),
        Err(Error::Config(_))
    ));
    let mut cfg = ScenarioConfig::defaults(Side::Exterior, BoundaryCondition::Soft);
    cfg.delta = 0.0;
    assert!(matches!(reconstruct(&cfg), Err(Error::Config(_))));
}

#[test]
fn nyquist_fails_fast() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small(&[("truncation", "40"), ("receiver_count", "64")], dir.path());
    assert!(matches!(reconstruct(&cfg), Err(Error::Nyquist { needed: 81, receivers: 64 })));
}

#[test]
fn cavity_warning_for_large_ring() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small(&[("side", "interior"), ("wavenumbers", "3,6")], dir.path());
    let w = warnings(&cfg);
    assert_eq!(w.len(), 1);
    assert!(w[0].contains("3.0000"));
}

#[test]
fn ring_csv_round_trip_is_lossless() {
    let sources = SourceSet::new(Circle::new(Point::new(0.1, -0.2), 2.2), 3, Side::Exterior).unwrap();
    let samples: Vec<Vec<Complex64>> = (0..3)
        .map(|j| {
            (0..16)
                .map(|m| Complex64::new((0.1 + j as f64 * m as f64).sin() / 3.0, 1.0 / (1.0 + m as f64 * 7.0)))
                .collect()
        })
        .collect();
    let ring = RingMeasurement {
        radius: 2.2,
        wavenumber: 3.5,
        sources,
        field: FieldKind::Scattered,
        delta: 0.05,
        samples,
    };
    let mut extra = Metadata::new();
    extra.insert("seed".into(), "9".into());
    let text = ring_to_csv(&ring, &extra);
    assert!(text.contains("# seed=9\n"));
    assert!(text.contains("\nsource_index,receiver_index,theta,re,im\n"));
    let (back, meta) = ring_from_csv(&text, Path::new("mem")).unwrap();
    assert_eq!(back, ring);
    assert_eq!(meta["seed"], "9");

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ring.csv");
    write_ring(&path, &ring, &extra).unwrap();
    assert_eq!(read_ring(&path).unwrap().0, ring);
}

#[test]
fn ring_csv_rejects_bad_input() {
    let sources = SourceSet::new(Circle::centered(2.2), 1, Side::Exterior).unwrap();
    let ring = RingMeasurement {
        radius: 2.2,
        wavenumber: 3.0,
        sources,
        field: FieldKind::Scattered,
        delta: 0.0,
        samples: vec![vec![Complex64::new(1.0, 0.0); 8]],
    };
    let text = ring_to_csv(&ring, &Metadata::new());
    let shifted = text.replacen("0,1,7.8539816339744828e-1", "0,1,7.9e-1", 1);
    assert_ne!(shifted, text);
    assert!(matches!(ring_from_csv(&shifted, Path::new("x")), Err(Error::NonEquispaced)));
    let chopped: String = text.lines().take(text.lines().count() - 1).map(|l| format!("{l}\n")).collect();
    assert!(ring_from_csv(&chopped, Path::new("x")).is_err());
    assert!(matches!(
        ring_from_csv("no header here\n", Path::new("x")),
        Err(Error::Parse { .. })
    ));
}

fn image(values: Vec<f64>, nx: usize, ny: usize, exclusion: Option<Circle>) -> IndicatorImage {
    let grid = imaging_grid(-1.0, 1.0, -1.0, 1.0, nx, ny, exclusion).unwrap();
    let mut values = values;
    for (v, m) in values.iter_mut().zip(grid.mask()) {
        if *m {
            *v = 0.0;
        }
    }
    let flags = (0..values.len()).map(|i| i % 7 == 0 && !grid.mask()[i]).collect();
    IndicatorImage {
        flags,
        grid,
        kind: BoundaryCondition::Hard,
        wavenumbers: vec![3.0, 3.5],
        normalization: Normalization::Normalized,
        values,
    }
}

#[test]
fn grid_csv_round_trip_omits_masked_rows() {
    let img = image((0..121).map(|i| (i as f64 * 0.37).sin().abs()).collect(), 11, 11, Some(Circle::centered(0.5)));
    let text = image_to_csv(&img);
    let rows = text.lines().filter(|l| !l.starts_with('#')).count() - 1;
    assert_eq!(rows, 121 - img.grid.masked_count());
    let back = image_from_csv(&text, Path::new("mem")).unwrap();
    assert_eq!(back, img);
    assert!(image_from_csv(&text.replace("x,y,value,flag", "x,y,v"), Path::new("m")).is_err());
}

#[test]
fn pgm_rendering_of_files() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("g.csv");
    let out = dir.path().join("g.pgm");
    write_image(&csv, &image(vec![0.0, 1.0, 1.0, 0.0], 2, 2, None)).unwrap();
    render_pgm_file(&csv, &out, PgmScale::Linear).unwrap();
    assert_eq!(std::fs::read_to_string(&out).unwrap(), "P2\n2 2\n65535\n0 65535\n65535 0\n");

    write_image(&csv, &image(vec![0.25; 9], 3, 3, None)).unwrap();
    render_pgm_file(&csv, &out, PgmScale::Percentile(99.0)).unwrap();
    let text = std::fs::read_to_string(&out).unwrap();
    let px: Vec<&str> = text.lines().skip(3).flat_map(|l| l.split(' ')).collect();
    assert_eq!(px.len(), 9);
    assert!(px.iter().all(|p| *p == px[0]));

    write_image(&csv, &image((0..25).map(f64::from).collect(), 5, 5, Some(Circle::centered(0.1)))).unwrap();
    render_pgm_file(&csv, &out, PgmScale::Linear).unwrap();
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().nth(3 + 2).unwrap().split(' ').nth(2), Some("0"));

    std::fs::write(&csv, "garbage").unwrap();
    assert!(render_pgm_file(&csv, &out, PgmScale::Linear).is_err());
}

#[test]
fn radial_metric_examples() {
    let truth = make_curve(&ShapeSpec::circle(Point::ORIGIN, 1.0, 256)).unwrap();
    let grid = imaging_grid(-1.5, 1.5, -1.5, 1.5, 150, 150, None).unwrap();
    let (h, _) = grid.spacing();
    // zero within one cell of the unit circle, one elsewhere
    let values: Vec<f64> = grid
        .points()
        .iter()
        .map(|p| if (p.norm() - 1.0).abs() <= h { 0.0 } else { 1.0 })
        .collect();
    let img = IndicatorImage {
        flags: vec![false; grid.len()],
        grid: grid.clone(),
        kind: BoundaryCondition::Soft,
        wavenumbers: vec![3.0],
        normalization: Normalization::Raw,
        values,
    };
    let e = radial_boundary_error(&img, &truth, 64).unwrap();
    assert_eq!(e.rays.len(), 64);
    assert!(e.rays.iter().all(|r| r.distance <= h), "max {}", quantile(&e.rays.iter().map(|r| r.distance).collect::<Vec<_>>(), 1.0));

    let mut flat = img.clone();
    flat.values = vec![0.5; grid.len()];
    let e = radial_boundary_error(&flat, &truth, 16).unwrap();
    assert_eq!(e.non_informative, 16);
    assert!(e.median.is_nan());

    let masked = imaging_grid(-1.5, 1.5, -1.5, 1.5, 40, 40, Some(Circle::centered(1.45))).unwrap();
    let mut m = img.clone();
    m.values = vec![1.0; masked.len()];
    m.flags = vec![false; masked.len()];
    m.grid = masked;
    assert!(matches!(radial_boundary_error(&m, &truth, 8), Err(Error::EmptyRay { .. })));
}

#[test]
fn run_writes_files_and_manifest_last() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small(&[("bc", "hard"), ("wavenumbers", "3,4")], dir.path());
    let out = run_scenario(&cfg).unwrap();
    for name in [
        "ring_k3.csv",
        "ring_k4.csv",
        "indicator_k3.csv",
        "reciprocal_k4.csv",
        "reciprocal_k4.pgm",
        "indicator_multi.csv",
        "reciprocal_multi.pgm",
        "manifest.txt",
    ] {
        assert!(dir.path().join(name).exists(), "{name}");
    }
    let manifest = std::fs::read_to_string(&out.manifest).unwrap();
    assert!(manifest.contains("# result k=3 truncation=4"));
    assert!(manifest.contains("# result superposed"));
    assert!(manifest.contains("seed = 1"));
    assert_eq!(checksum_lines(&out.manifest).len(), out.files.len());
    let (ring, meta) = read_ring(&dir.path().join("ring_k3.csv")).unwrap();
    assert_eq!(ring.delta, 0.02);
    assert_eq!(meta["bc"], "hard");
    let img = read_image(&dir.path().join("indicator_multi.csv")).unwrap();
    assert_eq!(img.wavenumbers, vec![3.0, 4.0]);
    assert_eq!(img.normalization, Normalization::Normalized);
}

#[test]
fn runs_are_deterministic_and_manifest_replays() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let c = tempfile::tempdir().unwrap();
    let first = run_scenario(&small(&[("shape", "kite")], a.path())).unwrap();
    let second = run_scenario(&small(&[("shape", "kite")], b.path())).unwrap();
    assert_eq!(checksum_lines(&first.manifest), checksum_lines(&second.manifest));
    let replay = load_config(&first.manifest, &[("output_dir".into(), c.path().display().to_string())]).unwrap();
    let third = run_scenario(&replay).unwrap();
    assert_eq!(checksum_lines(&first.manifest), checksum_lines(&third.manifest));
    let other = run_scenario(&small(&[("shape", "kite"), ("seed", "2")], c.path())).unwrap();
    assert_ne!(checksum_lines(&first.manifest), checksum_lines(&other.manifest));
}

#[test]
fn clean_run_with_override_shows_boundary_dip() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small(&[("delta", "0"), ("truncation", "10")], dir.path());
    let rec = reconstruct(&cfg).unwrap();
    let f = &rec.frequencies[0];
    assert_eq!(f.truncation, 10);
    assert_eq!(f.ring.delta, 0.0);
    let (h, _) = cfg.grid().unwrap().spacing();
    assert!(f.boundary_error.median <= h, "median {}", f.boundary_error.median);
}

#[test]
fn default_soft_run_renders_a_bright_ring() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = ScenarioConfig::defaults(Side::Exterior, BoundaryCondition::Soft);
    cfg.output_dir = dir.path().to_path_buf();
    cfg.pgm_scale = PgmScale::Linear;
    run_scenario(&cfg).unwrap();
    let text = std::fs::read_to_string(dir.path().join("reciprocal_k3.pgm")).unwrap();
    let row: Vec<u32> = text.lines().nth(3 + 74).unwrap().split(' ').map(|p| p.parse().unwrap()).collect();
    let grid = cfg.grid().unwrap();
    let x = |col: usize| grid.points()[grid.index(74, col)].x;
    let (h, _) = grid.spacing();
    let argmax = |range: std::ops::Range<usize>| range.max_by_key(|&c| (row[c], std::cmp::Reverse(c))).unwrap();
    assert!((x(argmax(0..75)) + 1.0).abs() <= 2.0 * h);
    assert!((x(argmax(75..150)) - 1.0).abs() <= 2.0 * h);
}

#[test]
fn lower_noise_localizes_at_least_as_well() {
    let mut better = 0;
    for seed in 1..=5u64 {
        let mut cfg = ScenarioConfig::defaults(Side::Exterior, BoundaryCondition::Soft);
        cfg.seed = seed;
        cfg.delta = 0.01;
        let low = reconstruct(&cfg).unwrap().frequencies[0].boundary_error.median;
        cfg.delta = 0.05;
        let high = reconstruct(&cfg).unwrap().frequencies[0].boundary_error.median;
        if low <= high {
            better += 1;
        }
    }
    assert!(better >= 3, "{better} of 5 seeds");
}

#[test]
fn rate_report_ratios() {
    let ext = convergence_study(&StudyConfig::exterior()).unwrap();
    assert!((ext.ratios[0] - 4.4).abs() < 1e-12);
    assert!((ext.ratios[1] - 2.0).abs() < 1e-12);
    assert!((ext.ratios[2] - 2.2).abs() < 1e-12);
    assert!((ext.gap - 0.5).abs() < 1e-12);
    assert!((ext.predicted_exponent - 2f64.ln() / 4.4f64.ln()).abs() < 1e-12);
    assert!(ext.fitted_ratio > 1.0);
    let int = convergence_study(&StudyConfig::interior()).unwrap();
    assert!((int.ratios[0] - 2.4).abs() < 1e-12);
    assert!((int.ratios[1] - 1.2).abs() < 1e-12);
    assert!((int.gap - 0.2).abs() < 1e-12);
    assert!((int.predicted_exponent - 0.2082).abs() < 1e-4);
    assert!(int.to_text().contains("sigma2 = 1.200000"));

    let mut bad = StudyConfig::exterior();
    bad.shape = ShapeKind::Kite;
    assert!(matches!(convergence_study(&bad), Err(Error::NonCircular(_))));
}
