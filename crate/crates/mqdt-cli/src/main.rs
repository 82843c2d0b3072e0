//! `mqdt`: scattering lengths, closed-channel parameters, trapped-pair
//! levels and collisional-shift fits from one TOML config plus flags.

mod commands;
mod config;
mod context;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::config::RunConfig;
use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "mqdt", version, about = "Frame-transformed MQDT for ultracold Rb87+Rb85 pairs")]
struct Cli {
    #[command(flatten)]
    common: CommonArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// TOML run configuration
    #[arg(short, long, global = true)]
    pub config: Option<PathBuf>,
    /// CSV destination (`-` for stdout instead of the text table)
    #[arg(short, long, global = true)]
    pub output: Option<PathBuf>,
    /// constants file replacing the bundled one
    #[arg(long, global = true)]
    pub dataset: Option<PathBuf>,
    /// C6 in atomic units
    #[arg(long, global = true)]
    pub c6: Option<f64>,
    /// phase offset of the long-range reference functions, rad
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub chi_phase_offset: Option<f64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Scattering length of the lowest channel of a projection-M space
    ScatteringLength(commands::scattering::ScatteringArgs),
    /// Collisional shift along a sweep of trap frequencies
    ShiftCurve(commands::shift::CurveArgs),
    /// Fit one unknown scattering length to measured shifts
    Fit(commands::shift::FitArgs),
    /// Closed-channel chi parameters of the -C6/R^6 tail
    Chi(commands::chi::ChiArgs),
    /// Trapped-pair energies for given scattering lengths
    TrapLevels(commands::trap::TrapArgs),
    /// Fragmentation channels, eigenchannels and U at one projection
    Channels(commands::channels::ChannelsArgs),
}

fn run(cli: Cli) -> Result<(), CliError> {
    let cfg = match &cli.common.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let ctx = context::Context::new(&cfg, &cli.common)?;
    let out = output::Sink::new(cli.common.output.clone().or(cfg.output.clone()));
    match cli.command {
        Command::ScatteringLength(a) => commands::scattering::run(&ctx, &cfg, &a, &out),
        Command::ShiftCurve(a) => commands::shift::run_curve(&ctx, &cfg, &a, &out),
        Command::Fit(a) => commands::shift::run_fit(&ctx, &cfg, &a, &out),
        Command::Chi(a) => commands::chi::run(&ctx, &cfg, &a, &out),
        Command::TrapLevels(a) => commands::trap::run(&ctx, &cfg, &a, &out),
        Command::Channels(a) => commands::channels::run(&ctx, &cfg, &a, &out),
    }
}

/// One line, `key=value` fields, the message last so it may contain spaces.
fn error_line(kind: &str, message: &str) -> String {
    let flat: Vec<&str> = message.lines().map(str::trim).filter(|l| !l.is_empty()).collect();
    format!("error kind={kind} message={}", flat.join(" | "))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            eprintln!("{}", error_line("usage", &e.to_string()));
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", error_line(e.kind(), &e.to_string()));
            ExitCode::FAILURE
        }
    }
}
