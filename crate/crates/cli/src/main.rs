use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use fbimg::continuation::truncation_order;
use fbimg::forward::{analytic_circle, solve_forward, SourceSet};
use fbimg::geometry::{make_curve, Circle, Point, ShapeKind, ShapeSpec};
use fbimg::indicator::{normalize, superpose_multifrequency};
use fbimg::noise::{add_noise, NoiseSpec, GENERATOR_ID};
use fbimg::pipeline::io::{read_ring, write_ring, Metadata};
use fbimg::pipeline::*;
use fbimg::BoundaryCondition;

/// Boundary imaging from point-source near-field data.
#[derive(Parser)]
#[command(name = "fbimg", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArgs {
    /// Scenario file of `key = value` lines
    #[arg(long, short = 'c')]
    config: Option<PathBuf>,
    /// Override one key; repeatable, applied after the file
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl ConfigArgs {
    fn load(&self) -> Result<ScenarioConfig> {
        let overrides = self
            .set
            .iter()
            .map(|s| parse_override(s))
            .collect::<fbimg::Result<Vec<_>>>()?;
        let cfg = match &self.config {
            Some(path) => load_config(path, &overrides)?,
            None => ScenarioConfig::from_pairs(&overrides)?,
        };
        Ok(cfg)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum StudySide {
    Exterior,
    Interior,
    Both,
}

#[derive(Subcommand)]
enum Command {
    /// Clean scattered ring data for every configured wavenumber
    Simulate {
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// Perturb a ring CSV with the multiplicative noise model
    Noise {
        #[arg(long, short)]
        input: PathBuf,
        #[arg(long, short)]
        output: PathBuf,
        /// Defaults to the config `delta`
        #[arg(long)]
        delta: Option<f64>,
        /// Defaults to the config `seed`
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// Indicator images from one or more ring CSVs
    Reconstruct {
        /// Ring CSV; repeat for multi-frequency superposition
        #[arg(long, short, required = true)]
        input: Vec<PathBuf>,
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// Simulate, perturb, image, score and write a manifest
    Pipeline {
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// Concentric-circle convergence study
    Rates {
        #[arg(long, value_enum, default_value = "both")]
        side: StudySide,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Grid CSV to ASCII PGM
    Render {
        #[arg(long, short)]
        input: PathBuf,
        #[arg(long, short)]
        output: PathBuf,
        /// `linear`, `percentile` or `percentile:P`
        #[arg(long, default_value = "percentile:99")]
        scale: PgmScale,
    },
    /// Boundary-integral solver against the circle series
    OracleCheck {
        #[arg(long, default_value_t = 1e-6)]
        tolerance: f64,
        #[arg(long, default_value_t = 512)]
        nodes: usize,
        #[command(flatten)]
        cfg: ConfigArgs,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Simulate { cfg } => simulate_cmd(&cfg.load()?),
        Command::Noise {
            input,
            output,
            delta,
            seed,
            cfg,
        } => noise_cmd(&input, &output, delta, seed, &cfg),
        Command::Reconstruct { input, cfg } => reconstruct_cmd(&input, &cfg.load()?),
        Command::Pipeline { cfg } => pipeline_cmd(&cfg.load()?),
        Command::Rates { side, output } => rates_cmd(side, output.as_deref()),
        Command::Render { input, output, scale } => {
            render_pgm_file(&input, &output, scale)?;
            println!("{}", output.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::OracleCheck { tolerance, nodes, cfg } => oracle_cmd(&cfg.load()?, tolerance, nodes),
    }
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn simulate_cmd(cfg: &ScenarioConfig) -> Result<ExitCode> {
    cfg.validate()?;
    for w in warnings(cfg) {
        eprintln!("warning: {w}");
    }
    let curve = make_curve(&cfg.shape_spec())?;
    ensure_dir(&cfg.output_dir)?;
    for &k in &cfg.wavenumbers {
        let (ring, condition) = simulate(cfg, k, &curve)?;
        let mut meta = Metadata::new();
        meta.insert("bc".into(), cfg.bc.as_str().into());
        meta.insert("shape".into(), cfg.shape.name().into());
        let path = cfg.output_dir.join(format!("ring_{}.csv", frequency_tag(k)));
        write_ring(&path, &ring, &meta)?;
        println!("{} condition={condition:.3e}", path.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn noise_cmd(input: &Path, output: &Path, delta: Option<f64>, seed: Option<u64>, args: &ConfigArgs) -> Result<ExitCode> {
    let cfg = args.load()?;
    let (ring, mut meta) = read_ring(input)?;
    let spec = NoiseSpec::new(delta.unwrap_or(cfg.delta), seed.unwrap_or(cfg.seed))?;
    let noisy = add_noise(&ring, &spec)?;
    meta.insert("seed".into(), spec.seed.to_string());
    meta.insert("noise".into(), GENERATOR_ID.into());
    write_ring(output, &noisy, &meta)?;
    println!("{} delta={} seed={}", output.display(), spec.delta, spec.seed);
    Ok(ExitCode::SUCCESS)
}

fn reconstruct_cmd(inputs: &[PathBuf], cfg: &ScenarioConfig) -> Result<ExitCode> {
    let grid = cfg.grid()?;
    let curve = make_curve(&cfg.shape_spec())?;
    ensure_dir(&cfg.output_dir)?;
    let mut images = Vec::new();
    for path in inputs {
        let (ring, meta) = read_ring(path)?;
        let bc: BoundaryCondition = match meta.get("bc") {
            Some(v) => v.parse()?,
            None => cfg.bc,
        };
        let truncation = match cfg.truncation {
            Some(n) => n,
            None => truncation_order(ring.delta, ring.sources.side)
                .with_context(|| format!("{}: set `truncation` for clean data", path.display()))?,
        };
        let (raw, excluded) = image_from_ring(&ring, bc, truncation, cfg.mode_guard, &grid)?;
        let err = radial_boundary_error(&raw, &curve, cfg.rays)?;
        let normalized = normalize(&raw)?;
        let tag = frequency_tag(ring.wavenumber);
        for f in write_images(&cfg.output_dir, &tag, &normalized, cfg.pgm_scale)? {
            println!("{}", f.display());
        }
        println!(
            "k={} bc={} truncation={truncation} excluded_modes={excluded:?} median={:.4e} ({:.2} cells vs shape {})",
            ring.wavenumber,
            bc.as_str(),
            err.median,
            err.median_cells,
            cfg.shape.name()
        );
        images.push(normalized);
    }
    if images.len() > 1 {
        let sum = superpose_multifrequency(&images)?;
        let err = radial_boundary_error(&sum, &curve, cfg.rays)?;
        for f in write_images(&cfg.output_dir, "multi", &sum, cfg.pgm_scale)? {
            println!("{}", f.display());
        }
        println!("superposed median={:.4e} ({:.2} cells)", err.median, err.median_cells);
    }
    Ok(ExitCode::SUCCESS)
}

fn pipeline_cmd(cfg: &ScenarioConfig) -> Result<ExitCode> {
    let run = run_scenario(cfg)?;
    for w in &run.reconstruction.warnings {
        eprintln!("warning: {w}");
    }
    let manifest = std::fs::read_to_string(&run.manifest)?;
    for line in manifest.lines().filter(|l| l.starts_with("# result")) {
        println!("{}", &line[2..]);
    }
    println!("manifest {}", run.manifest.display());
    Ok(ExitCode::SUCCESS)
}

fn rates_cmd(side: StudySide, output: Option<&Path>) -> Result<ExitCode> {
    let studies = match side {
        StudySide::Exterior => vec![StudyConfig::exterior()],
        StudySide::Interior => vec![StudyConfig::interior()],
        StudySide::Both => vec![StudyConfig::exterior(), StudyConfig::interior()],
    };
    let mut text = String::new();
    for s in &studies {
        text.push_str(&convergence_study(s)?.to_text());
        text.push('\n');
    }
    print!("{text}");
    if let Some(path) = output {
        std::fs::write(path, &text).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(ExitCode::SUCCESS)
}

fn oracle_cmd(cfg: &ScenarioConfig, tolerance: f64, nodes: usize) -> Result<ExitCode> {
    let ShapeKind::Circle { center, radius } = cfg.shape else {
        bail!("oracle-check needs shape = circle");
    };
    if center != Point::ORIGIN {
        bail!("oracle-check needs a circle centred at the origin");
    }
    let curve = make_curve(&ShapeSpec::circle(center, radius, nodes))?;
    let sources = SourceSet::new(cfg.source_circle(), cfg.source_count, cfg.side)?;
    let receivers = Circle::centered(cfg.receiver_radius).points(cfg.receiver_count);
    let mut worst: f64 = 0.0;
    for &k in &cfg.wavenumbers {
        let out = solve_forward(&curve, cfg.bc, cfg.side, k, &sources, &receivers)?;
        let mut err: f64 = 0.0;
        for (z, got) in sources.locations().iter().zip(&out.values) {
            let want = analytic_circle(radius, cfg.bc, cfg.side, k, *z, &receivers)?;
            let scale = want.iter().map(|w| w.norm()).fold(0.0, f64::max);
            for (g, w) in got.iter().zip(&want) {
                err = err.max((g - w).norm() / scale);
            }
        }
        println!(
            "k={k} side={} bc={} max_rel_error={err:.3e} condition={:.3e}",
            cfg.side.as_str(),
            cfg.bc.as_str(),
            out.condition
        );
        worst = worst.max(err);
    }
    if worst <= tolerance {
        println!("PASS max_rel_error={worst:.3e} <= {tolerance:e}");
        Ok(ExitCode::SUCCESS)
    } else {
        println!("FAIL max_rel_error={worst:.3e} > {tolerance:e}");
        Ok(ExitCode::FAILURE)
    }
}
