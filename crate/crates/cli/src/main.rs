//! `stable-extrap <command> --config run.json [--out result.json]`
//!
//! Exit status: 0 on success, 2 when the configuration or the inputs violate a
//! precondition, 3 when a solver fails to reach its accuracy.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use serde_json::json;
use stable_extrap::minimax::EigenMode;

use config::{Command, RunConfig};

pub const SCHEMA: &str = "stable-extrap/1";

#[derive(Debug)]
pub enum Failure {
    Input(String),
    Library(stable_extrap::Error),
}

impl From<stable_extrap::Error> for Failure {
    fn from(e: stable_extrap::Error) -> Self {
        Failure::Library(e)
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Input(_) => 2,
            Failure::Library(e) if e.is_precondition() => 2,
            Failure::Library(_) => 3,
        }
    }

    fn report(&self) {
        match self {
            Failure::Input(msg) => eprintln!("error: {msg}"),
            Failure::Library(e) => {
                eprintln!("error: {e}");
                if let stable_extrap::Error::Convergence { trace, .. } = e {
                    for line in trace {
                        eprintln!("  {line}");
                    }
                }
            }
        }
    }
}

#[derive(Clone, Copy, Debug, clap::ValueEnum)]
enum ModeArg {
    LowerTriangular,
    Symmetric,
}

#[derive(Parser, Debug)]
#[command(name = "stable-extrap", version, about = "Optimal and minimax-robust extrapolation of stable sequences")]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Result file; overrides `output` in the config. Defaults to standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Operator of the eigen route.
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// Also write a plot-ready CSV table.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Print warnings and solver traces to standard error.
    #[arg(long)]
    verbose: bool,
}

fn execute(cli: &Cli) -> Result<(), Failure> {
    let cfg = RunConfig::load(&cli.config)?;
    let mode = cli.mode.map(|m| match m {
        ModeArg::LowerTriangular => EigenMode::LowerTriangular,
        ModeArg::Symmetric => EigenMode::Symmetric,
    });
    let outcome = commands::run(cli.command, &cfg, mode)?;
    if cli.verbose {
        for line in &outcome.trace {
            eprintln!("{line}");
        }
    }
    for w in &outcome.warnings {
        eprintln!("warning: {w}");
    }

    let doc = json!({
        "schema": SCHEMA,
        "command": cli.command.name(),
        "parameters": outcome.parameters,
        "result": outcome.result,
    });
    let mut text = serde_json::to_string_pretty(&doc).expect("JSON values serialize");
    text.push('\n');
    match cli.out.as_ref().or(cfg.output.as_ref()) {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Failure::Input(format!("cannot write {}: {e}", path.display())))?,
        None => print!("{text}"),
    }
    if let Some(path) = &cli.csv {
        std::fs::write(path, outcome.table.render())
            .map_err(|e| Failure::Input(format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            e.report();
            ExitCode::from(e.exit_code())
        }
    }
}
