use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use perilame::io::run::{summary_text, EXIT_VALIDATION};
use perilame::io::{execute, parse_config, parse_config_str, Mode, RunConfig};

/// Robin traction problems of periodic planar elasticity.
#[derive(Debug, Parser)]
#[command(name = "perilame", version)]
struct Cli {
    /// TOML run configuration. Without it the built-in default problem is used.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the mode of the configuration.
    #[arg(long, value_parser = ["solve-linear", "solve-nonlinear", "green-eval", "verify"])]
    mode: Option<String>,
    /// Boundary nodes (in verify mode: the only node count of the suite).
    #[arg(long)]
    nodes: Option<usize>,
    /// Lattice-sum tolerance (in verify mode: the suite's tolerance).
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Seed of the randomized test points in verify mode.
    #[arg(long)]
    seed: Option<u64>,
}

fn load(cli: &Cli) -> perilame::Result<RunConfig> {
    let mut config = match &cli.config {
        Some(path) => parse_config(path)?,
        None => RunConfig::default(),
    };
    if let Some(mode) = &cli.mode {
        config.mode = mode.parse::<Mode>()?;
    }
    if let Some(n) = cli.nodes {
        config.nodes = n;
        config.verify.nodes = vec![n];
    }
    if let Some(tol) = cli.tol {
        if config.mode == Mode::Verify {
            config.verify.tol = tol;
        } else {
            config.tol = tol;
        }
    }
    if let Some(dir) = &cli.out_dir {
        config.out_dir = dir.clone();
    }
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    // overrides go through the same checks as the file
    parse_config_str(&config.echo())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = match load(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_VALIDATION as u8);
        }
    };
    let outcome = execute(&config);
    if let Some(bundle) = &outcome.bundle {
        print!("{}", summary_text(bundle));
        for r in bundle.reports.iter().filter(|r| !r.pass) {
            eprintln!("FAIL {} {:e} > {:e} [{}]", r.property, r.max_error, r.tolerance, r.config);
        }
    }
    if let Some(e) = &outcome.error {
        eprintln!("error: {e}");
    }
    ExitCode::from(outcome.exit_code as u8)
}
