//! `censfit`: fit censored Rician RSS models, simulate datasets, and
//! tabulate the packet-success bias.
//!
//! Exit status: 0 on success, 2 for usage, config, or input errors, 3 when
//! the numerics fail. A fit that stops without converging still exits 0
//! and reports `converged: false`.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{BiasCurveArgs, FitArgs, ModeArg, SimulateArgs};

#[derive(Parser)]
#[command(name = "censfit", version, about = "Rician RSS fitting under receiver censoring")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a measurement CSV and write a JSON report.
    Fit {
        /// Measurement CSV (`distance_m,rss_db`).
        #[arg(long, short)]
        input: PathBuf,
        /// Run configuration JSON; defaults apply when omitted.
        #[arg(long, short)]
        config: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "both")]
        mode: ModeArg,
        /// JSON report path.
        #[arg(long, short)]
        output: PathBuf,
        /// Plot-ready CSV of ECDF and model curves.
        #[arg(long)]
        curves: Option<PathBuf>,
    },
    /// Draw a synthetic censored dataset from the config's truth block.
    Simulate {
        #[arg(long, short)]
        config: Option<PathBuf>,
        /// Accepted samples to produce.
        #[arg(long, default_value_t = 20_000)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, short)]
        output: PathBuf,
    },
    /// Tabulate the bias function w over an RSS range.
    BiasCurve {
        #[arg(long, short)]
        config: Option<PathBuf>,
        /// First RSS value [default: S - 20].
        #[arg(long, allow_hyphen_values = true)]
        from: Option<f64>,
        /// Last RSS value [default: S + 20].
        #[arg(long, allow_hyphen_values = true)]
        to: Option<f64>,
        #[arg(long, default_value_t = 0.5, allow_hyphen_values = true)]
        step: f64,
        #[arg(long, short)]
        output: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Fit {
            input,
            config,
            mode,
            output,
            curves,
        } => commands::fit(&FitArgs {
            input,
            config,
            mode,
            output,
            curves,
        }),
        Command::Simulate {
            config,
            n,
            seed,
            output,
        } => commands::simulate(&SimulateArgs {
            config,
            n,
            seed,
            output,
        }),
        Command::BiasCurve {
            config,
            from,
            to,
            step,
            output,
        } => commands::bias_curve(&BiasCurveArgs {
            config,
            from,
            to,
            step,
            output,
        }),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error());
            ExitCode::from(f.exit_code() as u8)
        }
    }
}
