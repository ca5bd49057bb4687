//! `cotlab`: command-line driver for the cotangent-sum laboratory.
//!
//! Data goes to stdout (or `--out`), status to stderr. Exit codes: 0 success,
//! 2 usage, 3 domain error, 4 precision error, 1 I/O failure.

mod cache;
mod commands;
mod config;
mod output;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::process::ExitCode;

use clap::Parser;
use cotlab::LabError;

use crate::commands::Command;
use crate::config::{CommonArgs, Settings, CACHE_ENV};

#[derive(Debug, Parser)]
#[command(name = "cotlab", version, about = "Cotangent sums, the series g, continued fractions and moments")]
struct Cli {
    #[command(flatten)]
    common: CommonArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Lab(LabError),
    Io(io::Error),
}

impl From<LabError> for CliError {
    fn from(e: LabError) -> Self {
        CliError::Lab(e)
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Lab(LabError::Domain(_)) => 3,
            CliError::Lab(LabError::Precision(_)) => 4,
            CliError::Io(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Lab(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    let settings = Settings::resolve(&cli.common, std::env::var(CACHE_ENV).ok())?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(w) = settings.workers {
        pool = pool.num_threads(w);
    }
    let pool = pool.build().map_err(|e| CliError::Usage(format!("cannot start {:?} workers: {e}", settings.workers)))?;
    let table = pool.install(|| commands::run(&cli.command, &settings))?;
    let mut out: Box<dyn Write> = match &settings.out {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    match table.write(settings.format, &mut out).and_then(|_| out.flush()) {
        // a closed downstream pipe (`| head`) is not a failure of the run
        Err(e) if e.kind() == io::ErrorKind::BrokenPipe => Ok(()),
        other => Ok(other?),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("cotlab: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
