mod args;
mod commands;
mod config;
mod grid;
mod output;
mod verify;

use std::process::ExitCode;

use clap::{CommandFactory, FromArgMatches};

use args::{Cli, Command};

/// Failure classes, each with its own exit status.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags, files or parameters (exit 2).
    Usage(String),
    /// The numerics have no answer for valid inputs (exit 3).
    Infeasible(String),
    /// `verify` found a failing check (exit 4).
    Verify(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Infeasible(_) => 3,
            CliError::Verify(_) => 4,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Infeasible(m) | CliError::Verify(m) => f.write_str(m),
        }
    }
}

impl From<permchan::Error> for CliError {
    fn from(e: permchan::Error) -> Self {
        use permchan::Error as E;
        match e {
            E::Domain(_)
            | E::ResourceCap { .. }
            | E::EmptyMessageSet { .. }
            | E::Degenerate(_)
            | E::ZeroVariance
            | E::Infeasible(_) => CliError::Infeasible(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Usage(format!("i/o error: {e}"))
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Usage(format!("i/o error: {e}"))
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Pack(a) => commands::pack(a),
        Command::Bound(a) => commands::bound(a),
        Command::Curve(a) => commands::curve(a),
        Command::Approx(a) => commands::approx(a),
        Command::Simulate(a) => commands::simulate(a),
        Command::Verify(a) => {
            let checks = verify::run_all(a.seed);
            print!("{}", verify::print_table(&checks));
            let failed = checks.iter().filter(|c| !c.passed).count();
            if failed == 0 {
                Ok(())
            } else {
                Err(CliError::Verify(format!("{failed} verification checks failed")))
            }
        }
    }
}

fn main() -> ExitCode {
    let command = Cli::command();
    let argv = match config::merge(std::env::args_os().collect(), &command) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("permchan: {e}");
            return ExitCode::from(e.code());
        }
    };
    let cli = match command.try_get_matches_from(argv).and_then(|m| Cli::from_arg_matches(&m)) {
        Ok(c) => c,
        // Help and version exit 0; parse errors exit 2.
        Err(e) => e.exit(),
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("permchan: {e}");
            ExitCode::from(e.code())
        }
    }
}
