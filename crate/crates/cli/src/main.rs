mod args;
mod commands;
mod output;
mod scenario;
mod validate;

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use crate::args::{Cli, Command};

#[derive(Debug)]
pub enum CliError {
    /// bad flags or config, exit 2
    Usage(String),
    Compute(fbl_rmt::Error),
    Io(std::io::Error),
    /// validation ran but some checks failed
    ChecksFailed(usize),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Compute(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "{e}"),
            CliError::ChecksFailed(k) => write!(f, "{k} check(s) failed"),
        }
    }
}

impl From<fbl_rmt::Error> for CliError {
    fn from(e: fbl_rmt::Error) -> Self {
        match e {
            fbl_rmt::Error::InvalidParameter(m) => CliError::Usage(m),
            other => CliError::Compute(other),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }
}

/// Worker count from `FBL_RMT_THREADS`, if set.
fn threads_from_env() -> Result<Option<usize>, CliError> {
    match std::env::var("FBL_RMT_THREADS") {
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(k) if k >= 1 => Ok(Some(k)),
            _ => Err(CliError::Usage(format!(
                "FBL_RMT_THREADS must be a positive integer, got '{s}'"
            ))),
        },
        Err(_) => Ok(None),
    }
}

pub fn run(cli: &Cli, threads: Option<usize>, stdout: &mut dyn Write) -> Result<(), CliError> {
    let (table, format, out, failed) = match &cli.command {
        Command::Moments(a) => (commands::moments(a)?, a.format, &a.out, 0),
        Command::Bounds(a) => (commands::bounds(a)?, a.format, &a.out, 0),
        Command::Simulate(a) => (commands::simulate(a, threads)?, a.format, &a.out, 0),
        Command::ResolventCheck(a) => (commands::resolvent_check(a, threads)?, a.format, &a.out, 0),
        Command::Validate(a) => {
            let report = validate::run_checks(&validate::Library, a.fast, a.seed, threads);
            let failed = report.iter().filter(|c| !c.pass).count();
            (validate::to_table(&report), a.format, &a.out, failed)
        }
    };
    match out {
        Some(p) => {
            let mut f = std::io::BufWriter::new(std::fs::File::create(p)?);
            table.write(format, &mut f)?;
            f.flush()?;
        }
        None => table.write(format, stdout)?,
    }
    if failed > 0 {
        return Err(CliError::ChecksFailed(failed));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    let result = threads_from_env().and_then(|t| run(&cli, t, &mut lock));
    let _ = lock.flush();
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("fbl-rmt: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
