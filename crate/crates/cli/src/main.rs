use clap::Parser;
use rcar_cli::config::{load_config, parse_override};
use rcar_cli::error::PipelineError;
use rcar_cli::pipeline::{PipelineRegistry, RunContext};
use std::path::PathBuf;

const PIPELINES_HELP: &str = "Pipelines:
  simulate      Generate one driven trajectory (CSV and/or binary frame)
  regen-stats   Cycle decomposition at rho = 0 and Geometric(alpha) diagnostics
  harris-check  Hitting probabilities, minorization mass, theta/n_x table
  estimate-cdf  Binned transition-CDF estimate over a y-grid
  recover-cf    Noise and coefficient characteristic functions from one path
  joint-cf      Joint coefficient CF at one point, with MC cross-check
  diagnose      Structural-hypothesis report with atom and convergence checks";

/// Simulation and nonparametric estimation for random-coefficient AR(1)
/// sequences, driven by JSON configs.
#[derive(Parser)]
#[command(name = "rcar", version, after_help = PIPELINES_HELP)]
struct Cli {
    /// Pipeline name (see the list under --help).
    pipeline: String,
    /// Path to the JSON config.
    config: PathBuf,
    /// Directory the artifacts are written into (created if missing).
    #[arg(long)]
    out: PathBuf,
    /// Replaces the config's root seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for parallel sections (default: all cores). The
    /// artifact bytes never depend on this.
    #[arg(long)]
    workers: Option<usize>,
    /// Dotted-path config override, e.g. --override params.n=100000.
    /// Values parse as JSON first, then as plain strings. Repeatable.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

fn run(cli: Cli) -> Result<(), PipelineError> {
    let mut overrides = Vec::new();
    for s in &cli.overrides {
        overrides.push(parse_override(s)?);
    }
    if let Some(seed) = cli.seed {
        overrides.push(("seed".to_string(), serde_json::json!(seed)));
    }
    let config = load_config(&cli.config, &overrides)?;
    if let Some(w) = cli.workers {
        if w == 0 {
            return Err(PipelineError::Config("workers must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build_global()
            .map_err(|e| PipelineError::Runtime(format!("thread pool: {e}")))?;
    }
    let ctx = RunContext::new(config, cli.out, cli.workers)?;
    PipelineRegistry::standard().run(&cli.pipeline, &ctx)
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("rcar: {e}");
        std::process::exit(e.exit_code());
    }
}
