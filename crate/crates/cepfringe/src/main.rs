use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use cepfringe::cli;
use cepfringe::config::RunConfig;
use cepfringe::run::RunError;
use cepfringe::spectrum::Model;

/// Carrier-envelope-phase-resolved photoelectron spectra of few-cycle
/// ionization: semiclassical release-time model, saddle-point strong-field
/// approximation and a 1D split-operator Schrödinger solver, with fringe
/// analysis.
#[derive(Parser)]
#[command(version, about)]
struct Args {
    /// Configuration file (flat key = value); defaults apply when omitted
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Override the model: semiclassical, saddle or tdse
    #[arg(long, global = true)]
    model: Option<Model>,

    /// Override the carrier-envelope phase (radians)
    #[arg(long, global = true, allow_hyphen_values = true)]
    cep: Option<f64>,

    /// Override the output directory
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads for scans (0 = all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Directional spectra for the configured CEP value(s)
    Spectrum,
    /// Full CEP scan: raw and normalized matrices plus PGM quick-looks
    Scan,
    /// Release times, weights and action phases for one |p|
    Slits {
        /// Drift momentum magnitude (a.u.)
        #[arg(long, allow_hyphen_values = true)]
        momentum: f64,
    },
    /// Fringe reports for tabular spectrum files
    Analyze {
        /// Analysis band as MIN_EV MAX_EV
        #[arg(long, num_args = 2, value_names = ["MIN_EV", "MAX_EV"])]
        band: Option<Vec<f64>>,
        /// Spectrum CSV files to analyze
        files: Vec<PathBuf>,
    },
    /// Ground state of the soft-core potential
    TdseGroundstate,
}

fn resolve_config(args: &Args) -> Result<RunConfig, RunError> {
    let mut config = match &args.config {
        Some(path) => RunConfig::from_file(path)?,
        None => RunConfig::default(),
    };
    if let Some(model) = args.model {
        config.model = model;
    }
    if let Some(cep) = args.cep {
        config.cep = cep;
    }
    if let Some(out) = &args.out {
        config.out_dir = out.clone();
    }
    if let Some(threads) = args.threads {
        config.threads = threads;
    }
    config.validate()?;
    Ok(config)
}

fn execute(args: &Args, config: &RunConfig) -> Result<Vec<PathBuf>, RunError> {
    if config.threads > 0 {
        // ignore the error if a pool was already installed
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(config.threads)
            .build_global();
    }
    match &args.command {
        Command::Spectrum => cli::cmd_spectrum(config),
        Command::Scan => cli::cmd_scan(config),
        Command::Slits { momentum } => cli::cmd_slits(config, *momentum),
        Command::Analyze { band, files } => {
            if files.is_empty() {
                return Err(RunError::Config(
                    cepfringe::config::ConfigError::Invalid("analyze needs input files".into()),
                ));
            }
            let band_ev = match band.as_ref() {
                Some(b) => (b[0], b[1]),
                None => (config.band_min_ev, config.band_max_ev),
            };
            cli::cmd_analyze(config, files, band_ev)
        }
        Command::TdseGroundstate => cli::cmd_tdse_groundstate(config),
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    let config = match resolve_config(&args) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    match execute(&args, &config) {
        Ok(paths) => {
            cli::print_written(&paths);
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
