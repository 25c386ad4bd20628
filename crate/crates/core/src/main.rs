use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use sharpfront::runner::{self, ExitStatus, RunError};

const AFTER_HELP: &str = "\
Exit status:
  0  clean finish
  1  configuration or I/O error
  2  blow-up (non-finite state or step-size collapse); last_state.cfs is written
  3  front collapse (the two tracked curves met)
  4  front breakdown (front lost, vertical tangent, or non-finite particle)

Environment:
  SHARPFRONT_OUTPUT_ROOT  prefix for relative output directories";

/// Pseudo-spectral solver for scalars convected by 2D incompressible flows,
/// with sharp-front and blow-up diagnostics.
#[derive(Debug, Parser)]
#[command(name = "sharpfront", version, after_help = AFTER_HELP)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a simulation described by a TOML config and write all artifacts.
    Simulate {
        /// Run configuration (TOML).
        config: PathBuf,
        /// Output directory; overrides `output.dir` from the config.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Recompute diagnostics from stored snapshots without re-simulating.
    Diagnose {
        /// Run directory holding `snapshots/*.cfs`, or a directory of `.cfs` files.
        dir: PathBuf,
        /// TOML file with `[[fronts]]` and optional `[diagnostics]` sections.
        frontspec: PathBuf,
        /// Output directory (default: `<dir>/diagnose`).
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// List the built-in initial data.
    Scenarios,
}

fn read(path: &PathBuf) -> Result<String, RunError> {
    fs::read_to_string(path).map_err(|e| RunError::Io { path: path.clone(), message: e.to_string() })
}

fn execute(cli: Cli) -> Result<ExitStatus, RunError> {
    match cli.command {
        Command::Simulate { config, output } => {
            let cfg = runner::parse_config(&read(&config)?)?;
            let report = runner::simulate(&cfg, output.as_deref())?;
            print!("{}", report.verdict);
            eprintln!("artifacts in {} after {} steps", report.out_dir.display(), report.steps);
            Ok(report.exit)
        }
        Command::Diagnose { dir, frontspec, output } => {
            let dcfg = runner::parse_diagnose_config(&read(&frontspec)?)?;
            let report = runner::diagnose(&dir, &dcfg, output.as_deref())?;
            print!("{}", report.verdict);
            eprintln!("diagnosed {} snapshot(s) into {}", report.snapshots, report.out_dir.display());
            Ok(ExitStatus::Clean)
        }
        Command::Scenarios => {
            print!("{}", runner::scenarios_listing());
            Ok(ExitStatus::Clean)
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(status) => ExitCode::from(status.code() as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(ExitStatus::ConfigOrIo.code() as u8)
        }
    }
}
