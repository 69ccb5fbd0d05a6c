//! `locinfo` command-line driver.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

/// Local information operators and identifiability diagnostics for
/// structural inverse problems.
#[derive(Parser, Debug)]
#[command(name = "locinfo", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Flags shared by every subcommand.
#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Config file (TOML, or JSON when the extension is `.json`).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Random seed; overrides the config value.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Closed-form single-span moving-load kernel and diagonal density.
    BeamAnalytic {
        #[command(flatten)]
        common: Common,
        /// Sensor position as a fraction of the span.
        #[arg(long)]
        rho: Option<f64>,
        /// Number of grid cells.
        #[arg(long)]
        grid: Option<usize>,
        /// Number of Galerkin modes reported.
        #[arg(long)]
        k: Option<usize>,
    },
    /// Finite-element kernel of a continuous two-span beam.
    BeamTwoSpan {
        #[command(flatten)]
        common: Common,
        /// Sensor position as a fraction of the total length.
        #[arg(long)]
        rho: Option<f64>,
        /// Number of load positions in the sweep.
        #[arg(long)]
        grid: Option<usize>,
        #[arg(long)]
        k: Option<usize>,
    },
    /// Leading eigenpairs of an operator or kernel CSV.
    Modes {
        #[command(flatten)]
        common: Common,
        /// Operator (`# info_operator`) or kernel (`# kernel`) CSV.
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        k: Option<usize>,
        /// euclidean, mass or prior.
        #[arg(long)]
        metric: Option<String>,
    },
    /// Static/dynamic log-stiffness fusion benchmark.
    FuseBenchmark {
        #[command(flatten)]
        common: Common,
        /// static, dynamic or hybrid.
        #[arg(long, default_value = "hybrid")]
        blocks: String,
    },
    /// Plane-stress damage identification benchmark.
    Damage2d {
        #[command(flatten)]
        common: Common,
        /// Retained modes.
        #[arg(long)]
        k: Option<usize>,
        /// Damage grid as `NYxNX` cells.
        #[arg(long)]
        grid: Option<String>,
    },
    /// Weak-direction gain of candidate dynamic tests over the static design.
    WeakGain {
        #[command(flatten)]
        common: Common,
        /// Prior-relative eigenvalue threshold of the weak subspace.
        #[arg(long)]
        tau: Option<f64>,
    },
    /// Information lost to per-sensor offset nuisance parameters.
    Schur {
        #[command(flatten)]
        common: Common,
        /// Relative cutoff of the nuisance pseudoinverse.
        #[arg(long)]
        tau: Option<f64>,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::BeamAnalytic { common, rho, grid, k } => commands::beam_analytic::run(&common, rho, grid, k),
        Command::BeamTwoSpan { common, rho, grid, k } => commands::two_span::run(&common, rho, grid, k),
        Command::Modes { common, input, k, metric } => commands::modes::run(&common, &input, k, metric),
        Command::FuseBenchmark { common, blocks } => commands::fuse::run(&common, &blocks),
        Command::Damage2d { common, k, grid } => commands::damage::run(&common, k, grid),
        Command::WeakGain { common, tau } => commands::weak_gain::run(&common, tau),
        Command::Schur { common, tau } => commands::schur::run(&common, tau),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.exit_code())
        }
    }
}
