//! `quadham`: spectra, ladder operators and oracle checks for quadratic Hamiltonians.

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use crate::config::{AnalysisConfig, Format};
use crate::error::CliError;

const TOL_SCALE_VAR: &str = "QUADHAM_TOL_SCALE";

#[derive(Parser, Debug)]
#[command(name = "quadham", version, about = "Spectral analysis of quadratic quantum Hamiltonians")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON config describing the model and options
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output format (spectrum defaults to csv, everything else to json)
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Write the report here instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for the random-pd preset
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Highest total quanta enumerated in the lattice
    #[arg(long, global = true)]
    max_quanta: Option<usize>,
    /// Per-mode cutoff of the number-basis oracle
    #[arg(long, global = true)]
    n_max: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Adjoint matrix, frequencies, ladder operators and classification
    Analyze,
    /// Energy lattice with degeneracies
    Spectrum,
    /// Classify along a range of b and locate transitions
    Scan {
        #[arg(long, allow_negative_numbers = true)]
        from: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        to: Option<f64>,
        #[arg(long)]
        steps: Option<usize>,
    },
    /// Compare the lattice with a truncated number-basis diagonalization
    Verify,
    /// Closed-form eigenfunction ψ_mn of the symmetric oscillator
    Wavefunction { m: u32, n: u32 },
}

fn tolerance_scale() -> Result<f64, CliError> {
    match std::env::var(TOL_SCALE_VAR) {
        Err(std::env::VarError::NotPresent) => Ok(1.0),
        Err(e) => Err(CliError::Config(format!("{TOL_SCALE_VAR}: {e}"))),
        Ok(text) => match text.trim().parse::<f64>() {
            Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
            _ => Err(CliError::Config(format!("{TOL_SCALE_VAR} must be a positive number, got {text:?}"))),
        },
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let path = cli.config.as_ref().ok_or_else(|| CliError::Config("--config is required".into()))?;
    let mut config = AnalysisConfig::load(path)?;
    if let Some(seed) = cli.seed {
        config.set_seed(seed)?;
    }
    let options = &mut config.options;
    if let Some(v) = cli.max_quanta {
        options.max_quanta = v;
    }
    if let Some(v) = cli.n_max {
        options.n_max = v;
    }
    if let Some(f) = cli.format {
        options.format = Some(f);
    }
    if let Command::Scan { from, to, steps } = &cli.command {
        options.from = from.unwrap_or(options.from);
        options.to = to.unwrap_or(options.to);
        options.steps = steps.unwrap_or(options.steps);
        if options.steps < 2 {
            return Err(CliError::Config("steps must be at least 2".into()));
        }
    }
    let scale = tolerance_scale()?;
    let tol = config.tolerances(scale);
    let model = config.model()?;
    let o = &config.options;

    let (name, outcome, default_format) = match cli.command {
        Command::Analyze => ("analyze", commands::analyze(&model, &tol)?, Format::Json),
        Command::Spectrum => ("spectrum", commands::spectrum(&model, &tol, o.max_quanta)?, Format::Csv),
        Command::Scan { .. } => ("scan", commands::scan(&model, &tol, o.from, o.to, o.steps)?, Format::Json),
        Command::Verify => ("verify", commands::verify(&model, &tol, o.n_max)?, Format::Json),
        Command::Wavefunction { m, n } => ("wavefunction", commands::wavefunction(&model, m, n)?, Format::Json),
    };

    let text = match o.format.unwrap_or(default_format) {
        Format::Csv => outcome.table.to_csv(),
        Format::Json => {
            let mut echo = serde_json::to_value(&config).map_err(|e| CliError::Config(e.to_string()))?;
            echo["tolerance_scale"] = json!(scale);
            let envelope = json!({
                "tool": "quadham",
                "version": env!("CARGO_PKG_VERSION"),
                "command": name,
                "timestamp": chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
                "config": echo,
                "results": outcome.results,
            });
            output::to_json(&envelope)
        }
    };
    match &cli.out {
        Some(path) => {
            std::fs::write(path, text).map_err(|e| CliError::Compute(format!("cannot write {}: {e}", path.display())))
        }
        None => {
            use std::io::Write;
            let mut stdout = std::io::stdout().lock();
            // a closed pipe is not worth a failure exit
            let _ = stdout.write_all(text.as_bytes());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match std::panic::catch_unwind(|| run(cli)) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(e)) => {
            eprintln!("quadham: {e}");
            e.exit_code()
        }
        Err(_) => {
            eprintln!("quadham: internal error");
            ExitCode::from(3)
        }
    }
}
