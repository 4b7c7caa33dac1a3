//! `opplab`: command-line driver for the small-values laboratory.
//!
//! Exit codes: 0 ok, 2 invalid input, 3 computational failure, 4 budget
//! exceeded.

mod commands;
mod config;

use clap::{Parser, Subcommand};
use commands::*;
use config::{load_config, parse_threads, write_timing, CliError, CliResult, Format, Output};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

#[derive(Parser, Debug)]
#[command(
    name = "opplab",
    version,
    about = "Small values of x1² + α2 x2² − α3 x3²"
)]
struct Cli {
    /// JSON file with the command's settings; flags override it. A previous
    /// JSON report is accepted and its `config` echo reused.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory for output files (otherwise stdout).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value = "auto")]
    format: Format,
    /// Thread budget: a positive integer or `auto`.
    #[arg(long, global = true, env = "OPPLAB_THREADS")]
    threads: Option<String>,
    /// Seed for seeded commands (sweep jitter, random coefficients).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// File for wall-clock timings (default: <out>/timing.json or stderr).
    #[arg(long, global = true)]
    timings: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Smallest |Q(x) − ξ| over nonzero x with |x| < N.
    Min(MinArgs),
    /// Number of x with |Q(x) − ξ| < δ, or a band count.
    Count(CountArgs),
    /// Worst min |Q(x) − ξ| over a δ-dense grid of ξ in [−A, A].
    Density(DensityArgs),
    /// Minimum and exceptionality over an α grid and a list of N.
    Sweep(SweepArgs),
    /// Log-log exponent of a sweep statistic against N.
    Fit(FitArgs),
    /// Smoothed count as a frequency integral, optionally against the direct sum.
    Spectral(SpectralArgs),
    /// Dirichlet-polynomial scans, level sets and mean squares.
    #[command(subcommand)]
    Dirichlet(DirichletCmd),
    /// ζ(½ + it) values, growth ratios and envelopes.
    Zeta(ZetaArgs),
    /// Window transform tables.
    #[command(subcommand)]
    Windows(WindowsCmd),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Min(_) => "min",
            Command::Count(_) => "count",
            Command::Density(_) => "density",
            Command::Sweep(_) => "sweep",
            Command::Fit(_) => "fit",
            Command::Spectral(_) => "spectral",
            Command::Dirichlet(_) => "dirichlet",
            Command::Zeta(_) => "zeta",
            Command::Windows(_) => "windows",
        }
    }
}

fn dispatch(cmd: &Command, ctx: &Ctx) -> CliResult<Output> {
    match cmd {
        Command::Min(a) => cmd_min(a, ctx),
        Command::Count(a) => cmd_count(a, ctx),
        Command::Density(a) => cmd_density(a, ctx),
        Command::Sweep(a) => cmd_sweep(a, ctx),
        Command::Fit(a) => cmd_fit(a, ctx),
        Command::Spectral(a) => cmd_spectral(a, ctx),
        Command::Dirichlet(c) => cmd_dirichlet(c, ctx),
        Command::Zeta(a) => cmd_zeta(a, ctx),
        Command::Windows(c) => cmd_windows(c, ctx),
    }
}

fn run(cli: &Cli) -> CliResult<()> {
    let threads = match cli.threads.as_deref() {
        Some(s) => parse_threads(s)?,
        None => 0,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Compute(format!("thread pool: {e}")))?;
    let file = load_config(cli.config.as_deref())?;
    let ctx = Ctx {
        file: file.as_ref(),
        seed: cli.seed,
    };
    let start = Instant::now();
    let output = pool.install(|| dispatch(&cli.command, &ctx))?;
    let elapsed = start.elapsed().as_secs_f64();
    output.emit(cli.format, cli.out.as_deref())?;
    write_timing(
        cli.timings.as_deref(),
        cli.out.as_deref(),
        cli.command.name(),
        pool.current_num_threads(),
        elapsed,
    )
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("opplab {}: {e}", cli.command.name());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
