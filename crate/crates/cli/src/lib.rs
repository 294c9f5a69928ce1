//! Command-line front-end: `generate`, `analyze`, `identify`, `simulate` and
//! `report`.
//!
//! Exit codes are a stable contract: 0 success, 1 usage error, 2 data error,
//! 3 numerical failure.

use std::ffi::OsString;
use std::fmt;
use std::path::Path;

use clap::Parser;
use mycosig_core::spectral::{WelchConfig, Window};
use mycosig_core::{Error, ErrorClass};

pub mod args;
pub mod commands;
mod inputs;
mod logging;

pub use args::{Cli, Command, Shared};
pub use inputs::{expand_inputs, parse_frequency_list};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
    Core(Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Data(_) => EXIT_DATA,
            CliError::Core(e) => match e.class() {
                ErrorClass::Usage => EXIT_USAGE,
                ErrorClass::Data => EXIT_DATA,
                ErrorClass::Numerical => EXIT_NUMERICAL,
            },
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Data(m) => f.write_str(m),
            CliError::Core(e) => e.fmt(f),
        }
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Core(e.into())
    }
}

impl Shared {
    pub fn welch(&self) -> WelchConfig {
        WelchConfig {
            segment_length: self.welch_seg,
            overlap_fraction: self.welch_overlap,
            window: Window::Hann,
        }
    }

    fn validate(&self) -> Result<(), CliError> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(CliError::Usage(format!(
                "--alpha must lie in (0, 1), got {}",
                self.alpha
            )));
        }
        if self.welch_seg < 2 {
            return Err(CliError::Usage("--welch-seg must be at least 2".into()));
        }
        if !(0.0..1.0).contains(&self.welch_overlap) {
            return Err(CliError::Usage(format!(
                "--welch-overlap must lie in [0, 1), got {}",
                self.welch_overlap
            )));
        }
        Ok(())
    }

    /// Creates the output directory if needed.
    pub(crate) fn out_dir(&self) -> Result<&Path, CliError> {
        std::fs::create_dir_all(&self.out)
            .map_err(|e| CliError::Data(format!("cannot create {}: {e}", self.out.display())))?;
        Ok(&self.out)
    }
}

/// Runs a parsed command inside a worker pool of the requested size.
pub fn run(cli: &Cli) -> Result<(), CliError> {
    cli.shared.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.shared.workers)
        .build()
        .map_err(|e| {
            CliError::Usage(format!("cannot start {} workers: {e}", cli.shared.workers))
        })?;
    pool.install(|| match &cli.command {
        Command::Generate(a) => commands::generate::run(&cli.shared, a).map(drop),
        Command::Analyze(a) => commands::analyze::run(&cli.shared, a).map(drop),
        Command::Identify(a) => commands::identify::run(&cli.shared, a).map(drop),
        Command::Simulate(a) => commands::simulate::run(&cli.shared, a).map(drop),
        Command::Report(a) => commands::report::run(&cli.shared, a).map(drop),
    })
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    logging::init(cli.shared.verbose, cli.shared.quiet);
    match run(&cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            log::error!("{e}");
            e.exit_code()
        }
    }
}
