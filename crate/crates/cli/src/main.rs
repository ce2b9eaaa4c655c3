//! `iwasawa`: experiments on Iwasawa modules of `GL_2(Z_p)` with
//! deterministic, versioned reports.

mod commands;
mod config;

use std::io::Write;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use iwasawa_core::report::{Report, RunConfig};

#[derive(Parser, Debug)]
#[command(name = "iwasawa", version, about = "Iwasawa-module experiments for GL2(Z_p)")]
#[command(after_help = "The default config file is config.json in $IWASAWA_CONFIG_DIR \
(else $XDG_CONFIG_HOME/iwasawa, else ~/.config/iwasawa). Flags override it.")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    flags: config::Flags,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// c(chi) of a torus character, its classification and conductor.
    Cchi,
    /// Probe whether the orbit of a generator generates the unit ideal.
    Simplicity,
    /// Homomorphisms N_chi' -> N_chi via the torus functional equation.
    Intertwine,
    /// Coefficients of the finite-difference obstruction series.
    Obstruction,
    /// Nilpotency index of an augmentation ideal at finite level.
    Nilpotency,
    /// Rank of the coinvariants of the regular module.
    Nakayama,
    /// Exhaustive Bruhat/Iwahori decomposition of GL2(Z/p^n).
    Bruhat,
    /// Finite-level principal series: dimension, pairing and cell split.
    Induce,
    /// Duality and the exactness dictionary for an integer matrix.
    Duality,
    /// Run every acceptance check.
    Selftest,
}

impl Command {
    fn run(self, cfg: &RunConfig) -> Result<Report> {
        match self {
            Command::Cchi => commands::cchi(cfg),
            Command::Simplicity => commands::simplicity(cfg),
            Command::Intertwine => commands::intertwine(cfg),
            Command::Obstruction => commands::obstruction(cfg),
            Command::Nilpotency => commands::nilpotency(cfg),
            Command::Nakayama => commands::nakayama(cfg),
            Command::Bruhat => commands::bruhat(cfg),
            Command::Induce => commands::induce(cfg),
            Command::Duality => commands::duality(cfg),
            Command::Selftest => commands::selftest(cfg),
        }
    }
}

/// Writes to a stream, treating a closed pipe (e.g. `| head`) as success.
fn write_quietly(mut w: impl Write, text: &str) -> Result<()> {
    match w.write_all(text.as_bytes()).and_then(|_| w.flush()) {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        other => Ok(other?),
    }
}

fn emit(report: &Report, cli: &Cli) -> Result<()> {
    let json = report.to_json();
    let summary: String = report.summary.iter().map(|l| format!("{l}\n")).collect();
    match &cli.flags.out {
        Some(path) => {
            std::fs::write(path, &json).with_context(|| format!("writing report {}", path.display()))?;
            write_quietly(std::io::stdout(), &format!("{summary}report: {}\n", path.display()))
        }
        None => {
            write_quietly(std::io::stderr(), &summary)?;
            write_quietly(std::io::stdout(), &json)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = config::resolve(&cli.flags).and_then(|cfg| cli.command.run(&cfg)).and_then(|report| {
        emit(&report, &cli)?;
        Ok(report)
    });
    match outcome {
        Ok(report) if report.command == "selftest" && report.verdict != "pass" => ExitCode::from(1),
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
