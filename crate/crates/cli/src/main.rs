//! `ltft`: WAV processing and verification front end.
//!
//! Exit codes: 0 success, 1 failed check or processing error, 2 usage or
//! input error.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod wav;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use config::{Overrides, RunConfig};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Input(String),
    Output(String),
    Compute(ltft::Error),
    /// Number of failed acceptance criteria.
    Failed(usize),
}

impl From<ltft::Error> for CliError {
    fn from(e: ltft::Error) -> Self {
        match e {
            ltft::Error::InvalidParameter(m) => CliError::Usage(m),
            e => CliError::Compute(e),
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Input(m) => write!(f, "input error: {m}"),
            CliError::Output(m) => write!(f, "output error: {m}"),
            CliError::Compute(e) => write!(f, "error: {e}"),
            CliError::Failed(n) => write!(f, "{n} criterion/criteria failed"),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Input(_) => 2,
            CliError::Output(_) | CliError::Compute(_) | CliError::Failed(_) => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "ltft", version, about = "LTFT phase-space processing and verification")]
struct Cli {
    #[command(flatten)]
    overrides: Overrides,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, clap::Args)]
struct Files {
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Integer time stretch with the stochastic phase vocoder
    Vocode {
        #[command(flatten)]
        files: Files,
        /// Dilation factor Δ ≥ 1
        #[arg(long)]
        stretch: u32,
    },
    /// Soft-threshold shrinkage of the LTFT coefficients
    Denoise {
        #[command(flatten)]
        files: Files,
        #[arg(long)]
        threshold: f64,
    },
    /// Phase-space multiplier from a CSV mask (header x,omega,value)
    Multiply {
        #[command(flatten)]
        files: Files,
        #[arg(long)]
        mask: Option<PathBuf>,
    },
    /// Frame validity, reconstruction, STFT Parseval and atom transform checks
    VerifyFrame,
    /// Monte Carlo convergence slope and work count
    BenchConvergence,
    /// Phase-space volume and truncation measurements
    BenchLvd,
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut cfg = RunConfig::resolve(&cli.overrides)?;
    let mut files = |f: Files| {
        cfg.io.input = f.input.or(cfg.io.input.take());
        cfg.io.output = f.output.or(cfg.io.output.take());
    };
    match cli.command {
        Command::Vocode { files: f, stretch } => {
            files(f);
            commands::log_config("vocode", &cfg, json!({ "stretch": stretch }));
            commands::vocode(&cfg, stretch)
        }
        Command::Denoise { files: f, threshold } => {
            files(f);
            commands::log_config("denoise", &cfg, json!({ "threshold": threshold }));
            commands::denoise_cmd(&cfg, threshold)
        }
        Command::Multiply { files: f, mask } => {
            files(f);
            cfg.io.mask = mask.or(cfg.io.mask.take());
            commands::log_config("multiply", &cfg, json!({}));
            commands::multiply_cmd(&cfg)
        }
        Command::VerifyFrame => {
            commands::log_config("verify-frame", &cfg, json!({}));
            commands::verify_frame(&cfg)
        }
        Command::BenchConvergence => {
            commands::log_config("bench-convergence", &cfg, json!({}));
            commands::bench_convergence(&cfg)
        }
        Command::BenchLvd => {
            commands::log_config("bench-lvd", &cfg, json!({}));
            commands::bench_lvd(&cfg)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("ltft: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
