//! The `wbr` command line: metric tables, lambda sweeps, best responses,
//! game simulation and synthetic panels.
//!
//! Exit codes: 0 on success, 1 for invalid input or configuration, 2 for
//! runtime failures (I/O, solver non-convergence).

mod args;
mod commands;
pub mod settings;

use std::ffi::OsString;
use std::fmt;
use std::io::Write;
use std::path::Path;

use clap::error::ErrorKind;
use clap::Parser;

pub use args::Cli;
use args::Command;
use settings::ConfigFile;

#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(m) | CliError::Runtime(m) => f.write_str(m),
        }
    }
}

impl std::error::Error for CliError {}

impl From<wbr_core::Error> for CliError {
    fn from(e: wbr_core::Error) -> Self {
        if e.is_validation() {
            CliError::Validation(e.to_string())
        } else {
            CliError::Runtime(e.to_string())
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

fn load_config(path: &Path) -> Result<ConfigFile, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("cannot read config {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| CliError::Validation(format!("invalid config {}: {e}", path.display())))
}

fn dump(file: &ConfigFile, out: &mut dyn Write) -> Result<(), CliError> {
    let text = toml::to_string(file).map_err(|e| CliError::Runtime(e.to_string()))?;
    out.write_all(text.as_bytes())?;
    Ok(())
}

/// Parses `argv` (including the program name) and runs the command,
/// writing human-readable output to `out`.
pub fn run<I, T>(argv: I, out: &mut dyn Write) -> Result<(), CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            write!(out, "{}", e.render())?;
            return Ok(());
        }
        Err(e) => return Err(CliError::Validation(e.render().to_string())),
    };
    let file = match &cli.config {
        Some(path) => load_config(path)?,
        None => ConfigFile::default(),
    };

    match &cli.command {
        Command::Metrics(a) => {
            let mut s = file.metrics.unwrap_or_default();
            a.apply(&mut s);
            if cli.dump_config {
                let f = ConfigFile { metrics: Some(s.clone()), ..Default::default() };
                return dump(&f, out);
            }
            commands::metrics(&s, out)
        }
        Command::Sweep(a) => {
            let mut s = file.sweep.unwrap_or_default();
            a.apply(&mut s);
            if cli.dump_config {
                let f = ConfigFile { sweep: Some(s.clone()), ..Default::default() };
                return dump(&f, out);
            }
            commands::sweep(&s, out)
        }
        Command::Bestresponse(a) => {
            let mut s = file.bestresponse.unwrap_or_default();
            a.apply(&mut s);
            if cli.dump_config {
                let f = ConfigFile { bestresponse: Some(s.clone()), ..Default::default() };
                return dump(&f, out);
            }
            commands::bestresponse(&s, out)
        }
        Command::Simulate(a) => {
            let mut s = file.simulate.unwrap_or_default();
            a.apply(&mut s);
            if cli.dump_config {
                let f = ConfigFile { simulate: Some(s.clone()), ..Default::default() };
                return dump(&f, out);
            }
            commands::simulate(&s, out)
        }
        Command::Synth(a) => {
            let mut s = file.synth.unwrap_or_default();
            a.apply(&mut s);
            if cli.dump_config {
                let f = ConfigFile { synth: Some(s.clone()), ..Default::default() };
                return dump(&f, out);
            }
            commands::synth(&s, out)
        }
    }
}
