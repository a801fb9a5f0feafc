//! `ballsde` — experiment runner for the unit-ball diffusion schemes.
//!
//! Subcommands: `validate`, `simulate`, `converge`, `moments`, `distance`.
//! Every run writes a `manifest.json` echoing the resolved parameters and the
//! crate version, so any output can be reproduced exactly from its manifest.
//! Results are independent of `--threads`.

mod commands;
mod output;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

/// Exit codes: 0 success, 2 config error, 3 regime violation, 4 IO error.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Regime(String),
    Io(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Regime(_) => 3,
            CliError::Io(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Regime(m) | CliError::Io(m) => m,
        }
    }
}

impl From<ballsde::Error> for CliError {
    fn from(e: ballsde::Error) -> Self {
        match e {
            ballsde::Error::RegimeViolation(_) => CliError::Regime(e.to_string()),
            other => CliError::Config(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;

#[derive(Parser)]
#[command(
    name = "ballsde",
    version,
    about = "Boundary-preserving schemes for mean-reverting diffusions on the unit ball"
)]
struct Cli {
    /// Size of the worker thread pool (results do not depend on it).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Model configuration file (TOML: d, m, kappa, nu, A0, A, x0, T).
    #[arg(long)]
    model: Option<String>,

    /// Master seed; per-path streams derive from it deterministically.
    #[arg(long, default_value_t = 42)]
    seed: u64,

    /// Output directory, created if missing.
    #[arg(long, default_value = "out")]
    out: String,

    /// Table format for commands that support both.
    #[arg(long, default_value = "csv")]
    format: output::TableFormat,
}

#[derive(Subcommand)]
enum Command {
    /// Check a model file and report which parameter regimes hold.
    Validate {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Simulate backward-scheme paths and their projections, one CSV pair per
    /// path.
    Simulate {
        #[command(flatten)]
        common: CommonArgs,
        /// Number of time steps.
        #[arg(long, default_value = "10000")]
        steps: String,
        /// Number of sample paths.
        #[arg(long, default_value_t = 1)]
        paths: usize,
    },
    /// Coupled strong-error study over an n-ladder, for both the transformed
    /// state and the projected scheme.
    Converge {
        #[command(flatten)]
        common: CommonArgs,
        /// Comma-separated ladder of step counts.
        #[arg(long, default_value = "8,16,32,64,128")]
        steps: String,
        /// Reference grid resolution (a common multiple of the ladder).
        #[arg(long, default_value_t = 8192)]
        ref_steps: usize,
        /// Monte Carlo paths.
        #[arg(long, default_value_t = 10_000)]
        paths: usize,
    },
    /// Moment table: closed-form, matrix-exponential and Monte Carlo radial
    /// moments on a time grid.
    Moments {
        #[command(flatten)]
        common: CommonArgs,
        /// Scheme resolution for the Monte Carlo column.
        #[arg(long, default_value = "2048")]
        steps: String,
        /// Monte Carlo paths.
        #[arg(long, default_value_t = 10_000)]
        paths: usize,
        /// Highest moment degree.
        #[arg(long, default_value_t = 3)]
        kmax: usize,
        /// Number of equally spaced sample times in [0, T].
        #[arg(long, default_value_t = 11)]
        t_points: usize,
    },
    /// Paired-path distance experiment in the monotone regime (nu = sqrt 2,
    /// no rotation terms, kappa >= 1).
    Distance {
        #[command(flatten)]
        common: CommonArgs,
        /// Mean-reversion rate used when no model file is given.
        #[arg(long, default_value_t = 1.0)]
        kappa: f64,
        /// First initial point, comma-separated.
        #[arg(long, default_value = "0,0")]
        x0_a: String,
        /// Second initial point, comma-separated.
        #[arg(long, default_value = "-0.7,0.2")]
        x0_b: String,
        /// Number of time steps.
        #[arg(long, default_value = "312500")]
        steps: String,
    },
}

fn run(cli: Cli) -> CliResult<()> {
    if let Some(threads) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    }
    match cli.command {
        Command::Validate { common } => commands::validate(&common),
        Command::Simulate { common, steps, paths } => {
            commands::simulate(&common, &steps, paths)
        }
        Command::Converge { common, steps, ref_steps, paths } => {
            commands::converge(&common, &steps, ref_steps, paths)
        }
        Command::Moments { common, steps, paths, kmax, t_points } => {
            commands::moments(&common, &steps, paths, kmax, t_points)
        }
        Command::Distance { common, kappa, x0_a, x0_b, steps } => {
            commands::distance(&common, kappa, &x0_a, &x0_b, &steps)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}
