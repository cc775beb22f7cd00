mod commands;
mod config;
mod table;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::commands::Outcome;
use crate::config::RunConfig;
use crate::table::Format;

const EXIT_ERROR: u8 = 1;
const EXIT_NOT_CONVERGED: u8 = 2;
const EXIT_USAGE: u8 = 64;

/// Cavity magnonics calculator: spectra, dispersive shifts, fits and synthetic data.
#[derive(Parser, Debug)]
#[command(name = "magnonics", version)]
struct Cli {
    /// INI configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Write output here (atomically) instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Output format. Data commands default to csv, summaries to text.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Seed for synthetic noise.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Built-in parameter set: transmission or qubit-magnon.
    #[arg(long, global = true)]
    preset: Option<String>,
    /// Override one config key, as section.key=value. Repeatable.
    #[arg(long = "set", global = true, value_name = "SECTION.KEY=VALUE")]
    set: Vec<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Spin-wave dispersion across the first Brillouin zone.
    Dispersion,
    /// Rectangular-cavity TE10p frequencies against the configured modes.
    Modes,
    /// Complex transmission of the cavity-magnon system.
    S21,
    /// Transmission maps while the coil current tunes the magnon.
    Anticross,
    /// Qubit spectroscopy across the qubit-magnon anticrossing.
    QubitSpec,
    /// Dispersive shifts, effective couplings and Purcell limit.
    Report,
    /// Magnon linewidth versus temperature.
    Linewidth,
    /// Fit a model to measured data.
    Fit {
        #[command(subcommand)]
        kind: FitKind,
    },
    /// Generate seeded synthetic data.
    Synth {
        #[command(subcommand)]
        kind: SynthKind,
    },
}

#[derive(Subcommand, Debug)]
enum FitKind {
    /// Complex transmission spectrum.
    S21 {
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Linewidth versus temperature.
    Linewidth {
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Peak positions versus coil current.
    Anticross {
        #[arg(long)]
        input: Option<PathBuf>,
    },
}

#[derive(Subcommand, Debug)]
enum SynthKind {
    /// Transmission spectrum with complex noise.
    S21,
    /// Linewidths versus temperature with relative noise.
    Linewidth {
        /// Number of temperatures.
        #[arg(long, default_value_t = 8)]
        points: usize,
    },
    /// Peak positions per coil current.
    Anticross,
}

fn run(cli: &Cli) -> anyhow::Result<(Outcome, Format)> {
    if let Some(path) = &cli.config {
        magnonics::io::ensure_exists(path)?;
    }
    let cfg = RunConfig::load(cli.config.as_deref(), &cli.set, cli.preset.as_deref(), cli.seed)?;
    let (outcome, default) = match &cli.command {
        Command::Dispersion => (commands::dispersion(&cfg)?, Format::Csv),
        Command::Modes => (commands::modes(&cfg)?, Format::Text),
        Command::S21 => (commands::s21(&cfg)?, Format::Csv),
        Command::Anticross => (commands::anticross(&cfg)?, Format::Csv),
        Command::QubitSpec => (commands::qubit_spec(&cfg)?, Format::Csv),
        Command::Report => (commands::report(&cfg)?, Format::Text),
        Command::Linewidth => (commands::linewidth(&cfg)?, Format::Csv),
        Command::Fit { kind } => {
            let out = match kind {
                FitKind::S21 { input } => commands::fit_s21(&cfg, input.as_deref())?,
                FitKind::Linewidth { input } => commands::fit_linewidth(&cfg, input.as_deref())?,
                FitKind::Anticross { input } => commands::fit_anticross(&cfg, input.as_deref())?,
            };
            (out, Format::Text)
        }
        Command::Synth { kind } => {
            let out = match kind {
                SynthKind::S21 => commands::synth_s21(&cfg)?,
                SynthKind::Linewidth { points } => commands::synth_linewidth(&cfg, *points)?,
                SynthKind::Anticross => commands::synth_anticross(&cfg)?,
            };
            (out, Format::Csv)
        }
    };
    Ok((outcome, cli.format.unwrap_or(default)))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    let result = run(&cli).and_then(|(outcome, format)| {
        outcome.table.emit(format, cli.out.as_deref())?;
        Ok(outcome.converged)
    });
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("error: fit did not converge");
            ExitCode::from(EXIT_NOT_CONVERGED)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
