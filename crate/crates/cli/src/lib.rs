//! Command-line front end for the `qperc-core` experiments.
//!
//! Every subcommand writes its tables (CSV by default, or JSON) and a
//! `run.json` manifest into `--out`. Exit codes: 0 success, 1 internal or I/O
//! failure, 2 usage or invalid input, 3 violated theorem hypothesis, 4
//! resource guard.

mod args;
mod commands;
mod output;

use std::ffi::OsString;

use clap::error::ErrorKind;
use clap::Parser;

pub use args::{Cli, Command, Common, Format};
pub use output::Manifest;

/// Failure of a CLI run.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(qperc_core::Error),
    Io(String),
}

impl From<qperc_core::Error> for CliError {
    fn from(e: qperc_core::Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use qperc_core::Error as E;
        match self {
            CliError::Usage(_) => 2,
            CliError::Io(_) => 1,
            CliError::Core(e) => match e {
                E::InvalidInput(_) | E::Precondition(_) | E::SymmetryViolation { .. } => 2,
                E::Hypothesis(_) => 3,
                E::Resource { .. } => 4,
                E::Internal(_) => 1,
            },
        }
    }

    /// `kind: message` on a single line.
    pub fn line(&self) -> String {
        let (kind, msg) = match self {
            CliError::Usage(m) => ("usage", m.clone()),
            CliError::Io(m) => ("io", m.clone()),
            CliError::Core(e) => (e.kind(), e.to_string()),
        };
        format!("{kind}: {}", msg.replace(['\n', '\r'], " "))
    }
}

/// Parses `argv` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp
                | ErrorKind::DisplayVersion
                | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => {
                    let _ = e.print();
                    e.exit_code()
                }
                _ => {
                    let text = e.to_string();
                    let first = text.lines().next().unwrap_or("invalid arguments");
                    eprintln!("error: usage: {}", first.trim_start_matches("error: "));
                    2
                }
            };
        }
    };
    let args: Vec<String> = argv
        .iter()
        .skip(1)
        .map(|a| a.to_string_lossy().into_owned())
        .collect();
    match commands::execute(cli.command, args) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {}", e.line());
            e.exit_code()
        }
    }
}
