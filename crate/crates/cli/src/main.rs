//! `stein-decomp`: reproducible experiments around the bounded-decomposition
//! normal approximation bounds.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{Partial, Settings};

#[derive(Debug)]
pub enum CliError {
    /// Bad flags or config: exit code 2.
    Usage(String),
    /// Numeric or check failure at run time: exit code 1.
    Run(stein_decomp::Error),
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }
}

impl From<stein_decomp::Error> for CliError {
    fn from(e: stein_decomp::Error) -> Self {
        // bad user input surfaces as usage, everything else as runtime
        match &e {
            stein_decomp::Error::InvalidArgument(_)
            | stein_decomp::Error::Parse { .. }
            | stein_decomp::Error::DimensionMismatch { .. } => {
                CliError::Usage(e.to_string())
            }
            _ => CliError::Run(e),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "stein-decomp",
    version,
    about = "Normal-approximation bounds, simulation, and verification for decomposable sums"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Flat key = value config file; flags override file values
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Base seed for all random streams
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (0 = library default); env STEIN_DECOMP_THREADS
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Monte Carlo replicate count
    #[arg(long, global = true)]
    samples: Option<usize>,
    /// Circulant model: n=<vertices>,m=<degree>,d=<colors>
    #[arg(long, global = true)]
    graph: Option<String>,
    /// Comma-separated color probabilities
    #[arg(long, global = true)]
    pi: Option<String>,
    /// Edge-list file (`u v` per line) instead of --graph
    #[arg(long, global = true)]
    edges: Option<PathBuf>,
    /// Convex-set family: `default` or a file of set lines
    #[arg(long, global = true)]
    family: Option<String>,
    /// Strictly increasing n values for rate sweeps
    #[arg(long, global = true)]
    sweep: Option<String>,
    /// Universal constant C in the bound functionals
    #[arg(long = "C", global = true)]
    c: Option<f64>,
    /// Dimension-dependent constant in the comparison bound
    #[arg(long, global = true)]
    cd: Option<f64>,
    /// Output file (stdout when absent)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Output format: csv | json
    #[arg(long, global = true)]
    format: Option<String>,
    /// Reduced grids for fast smoke runs
    #[arg(long, global = true)]
    quick: bool,
    /// Print the effective configuration and exit
    #[arg(long, global = true)]
    dump_config: bool,
    /// simulate: emit moment summary instead of sample rows
    #[arg(long, global = true)]
    summary: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the bound functionals for a model
    Bound,
    /// Draw standardized samples (rows or moment summary)
    Simulate,
    /// Convergence sweep: distance estimates, bounds, fitted rate
    Rate,
    /// Run the numerical verification suite
    Verify,
    /// Estimate the convex-set distance for one model
    Distance,
}

fn gather(cli: &Cli) -> Result<Settings, CliError> {
    let flags = Partial {
        seed: cli.seed,
        workers: cli.workers,
        samples: cli.samples,
        graph: cli.graph.clone(),
        pi: cli.pi.clone(),
        edges: cli.edges.clone(),
        family: cli.family.clone(),
        sweep: cli.sweep.clone(),
        c: cli.c,
        cd: cli.cd,
        out: cli.out.clone(),
        format: cli.format.clone(),
        quick: if cli.quick { Some(true) } else { None },
        summary: if cli.summary { Some(true) } else { None },
    };
    let from_file = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::usage(format!("--config {}: {e}", path.display())))?;
            Partial::from_config_text(&text)?
        }
        None => Partial::default(),
    };
    Settings::resolve(flags.or(from_file))
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let settings = gather(cli)?;
    if settings.workers > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(settings.workers)
            .build_global()
            .map_err(|e| CliError::usage(format!("--workers: {e}")))?;
    }
    if cli.dump_config {
        print!("{}", settings.dump());
        return Ok(());
    }
    match cli.command {
        Command::Bound => commands::cmd_bound(&settings),
        Command::Simulate => commands::cmd_simulate(&settings),
        Command::Rate => commands::cmd_rate(&settings),
        Command::Verify => commands::cmd_verify(&settings),
        Command::Distance => commands::cmd_distance(&settings),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Run(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            ExitCode::from(2)
        }
    }
}
