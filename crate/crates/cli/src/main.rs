use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use epct::commands::{self, Outcome, EXIT_ERROR};
use epct::config::{Format, Overrides, RunConfig};
use epct::error::{CliError, CliResult};

/// Global existence versus finite-time breakdown for radial
/// Euler-Poisson flows.
#[derive(Parser)]
#[command(name = "epct", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Scan launch radii and classify the initial data.
    Classify(Common),
    /// Integrate a fan of characteristics and report events.
    Simulate(Common),
    /// Cross-check the classification against simulation.
    Validate(Common),
}

#[derive(Args)]
struct Common {
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    n: Option<u32>,
    #[arg(long, allow_negative_numbers = true)]
    lambda: Option<f64>,
    #[arg(long)]
    rmin: Option<f64>,
    #[arg(long)]
    rmax: Option<f64>,
    #[arg(long)]
    points: Option<usize>,
    #[arg(long)]
    horizon: Option<f64>,
    /// Relative integrator tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

impl Common {
    fn load(&self) -> CliResult<RunConfig> {
        let mut cfg = RunConfig::load(&self.config)?;
        cfg.apply(&Overrides {
            n: self.n,
            lambda: self.lambda,
            r_min: self.rmin,
            r_max: self.rmax,
            points: self.points,
            horizon: self.horizon,
            tol: self.tol,
            out: self.out.clone(),
            format: self.format,
        })?;
        Ok(cfg)
    }
}

fn init_threads() -> CliResult<()> {
    let Ok(v) = std::env::var("EP_THREADS") else { return Ok(()) };
    let n: usize = v.trim().parse().map_err(|_| CliError::Config(format!("EP_THREADS must be a positive integer, got {v:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(e.to_string()))
}

fn run(cli: Cli) -> CliResult<i32> {
    init_threads()?;
    let (common, f): (&Common, fn(&RunConfig) -> CliResult<Outcome>) = match &cli.command {
        Command::Classify(c) => (c, commands::classify),
        Command::Simulate(c) => (c, commands::simulate_cmd),
        Command::Validate(c) => (c, commands::validate),
    };
    let cfg = common.load()?;
    let outcome = f(&cfg)?;
    commands::write_outputs(&outcome, &cfg)?;
    println!("{}", outcome.summary());
    Ok(outcome.code())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("epct: {e}");
            ExitCode::from(EXIT_ERROR as u8)
        }
    }
}
