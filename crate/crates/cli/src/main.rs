//! `catfilter`: deterministic CSV/JSON artifacts for the squeezed-light
//! photon-subtraction model, plus a `verify` subcommand running the
//! cross-module identity checks.
//!
//! Exit status: 0 all checks pass, 1 numeric or I/O failure, 2
//! configuration or usage error.

mod commands;
mod config;
mod table;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use config::Layer;

#[derive(Parser)]
#[command(name = "catfilter", version, about = "Squeezed-light photon subtraction artifacts")]
struct Cli {
    /// Source cavity half-bandwidth.
    #[arg(long, global = true)]
    gamma: Option<f64>,
    /// Pump amplitude; repeat the flag for several curves.
    #[arg(long, global = true)]
    epsilon: Vec<f64>,
    /// Herald-path filter bandwidth.
    #[arg(long, global = true)]
    big_gamma: Option<f64>,
    /// Sweep-axis lower end.
    #[arg(long, global = true)]
    gamma_rel_min: Option<f64>,
    /// Sweep-axis upper end.
    #[arg(long, global = true)]
    gamma_rel_max: Option<f64>,
    /// Sweep-axis point count.
    #[arg(long, global = true)]
    gamma_rel_points: Option<usize>,
    /// Log-space the sweep axis (true/false).
    #[arg(long, global = true)]
    gamma_rel_log: Option<bool>,
    /// Fock-space photon cutoff for the verify suite.
    #[arg(long, global = true)]
    cutoff: Option<usize>,
    /// Output directory; falls back to CATFILTER_OUT, then the working dir.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Artifact format.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Flat key = value config file (overridden by flags).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Squeezing spectra, one file per pump amplitude.
    Spectrum,
    /// Normalized two-photon correlation traces.
    Correlation,
    /// Equivalent-loss curves over the wavepacket-bandwidth axis.
    Equivloss,
    /// Heralded mode functions, bare and filtered, plus ladder coefficients.
    Modefuncs,
    /// Dual-route scan of the filtered mode-matching rate.
    Modematch,
    /// Run the cross-module identity checks and report each one.
    Verify {
        /// Append one synthetic failing check (exit-status test hook).
        #[arg(long, hide = true)]
        inject_failure: bool,
    },
}

fn usage_error(msg: &str) -> ExitCode {
    eprintln!("catfilter: {msg}");
    ExitCode::from(2)
}

fn main() -> ExitCode {
    let cli = Cli::parse();

    let file_layer = match &cli.config {
        Some(path) => match config::parse_file(path) {
            Ok(layer) => Some(layer),
            Err(msg) => return usage_error(&msg),
        },
        None => None,
    };
    let flags = Layer {
        gamma: cli.gamma,
        epsilon: if cli.epsilon.is_empty() { None } else { Some(cli.epsilon.clone()) },
        big_gamma: cli.big_gamma,
        rel_min: cli.gamma_rel_min,
        rel_max: cli.gamma_rel_max,
        rel_points: cli.gamma_rel_points,
        rel_log: cli.gamma_rel_log,
        cutoff: cli.cutoff,
        out: cli.out.clone(),
        json: cli.format.map(|f| matches!(f, Format::Json)),
    };
    let cfg = match config::resolve(flags, file_layer) {
        Ok(cfg) => cfg,
        Err(msg) => return usage_error(&msg),
    };

    let outcome = match cli.command {
        Command::Spectrum => commands::cmd_spectrum(&cfg),
        Command::Correlation => commands::cmd_correlation(&cfg),
        Command::Equivloss => commands::cmd_equivloss(&cfg),
        Command::Modefuncs => commands::cmd_modefuncs(&cfg),
        Command::Modematch => commands::cmd_modematch(&cfg),
        Command::Verify { inject_failure } => {
            return match commands::cmd_verify(&cfg, inject_failure) {
                Ok(true) => ExitCode::SUCCESS,
                Ok(false) => ExitCode::from(1),
                Err(err) => {
                    eprintln!("catfilter: {err:#}");
                    ExitCode::from(1)
                }
            }
        }
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("catfilter: {err:#}");
            ExitCode::from(1)
        }
    }
}
