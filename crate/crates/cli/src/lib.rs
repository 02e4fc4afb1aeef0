//! Command-line front end for `wavecrit-core`.
//!
//! Exit codes: 0 success, 1 numerical or I/O failure, 2 domain or validation error,
//! 3 resource limit, 64 usage error.

use std::ffi::OsString;

use clap::{CommandFactory, Parser};

pub mod commands;
pub mod config;
pub mod output;

pub use config::{Command, CutoffSel, Format, RunConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("invalid argument: {0}")]
    Validation(String),
    #[error("{0}")]
    Resource(String),
    #[error("{0}")]
    Numerical(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 64,
            CliError::Validation(_) => 2,
            CliError::Resource(_) => 3,
            CliError::Numerical(_) | CliError::Io(_) => 1,
        }
    }
}

impl From<wavecrit_core::Error> for CliError {
    fn from(e: wavecrit_core::Error) -> Self {
        use wavecrit_core::Error as E;
        match e {
            E::Domain(_) | E::Degenerate(_) => CliError::Validation(e.to_string()),
            E::Resource { .. } => CliError::Resource(e.to_string()),
            E::Numerical(_) => CliError::Numerical(e.to_string()),
        }
    }
}

/// Runs a validated configuration inside a pool of `cfg.threads` workers (rayon's default
/// when unset) and emits the results.
pub fn run(cfg: &RunConfig) -> Result<(), CliError> {
    let work = || {
        let out = commands::dispatch(cfg)?;
        output::emit(cfg, &out.table, out.details)
    };
    match cfg.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Resource(format!("thread pool: {e}")))?
            .install(work),
        None => work(),
    }
}

/// Parses `args` (program name first), runs, reports errors on stderr and returns the exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    if args.len() <= 1 {
        eprintln!("{}", config::Flags::command().render_help());
        return 64;
    }
    let flags = match config::Flags::try_parse_from(args) {
        Ok(f) => f,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 64,
            };
            let _ = e.print();
            return code;
        }
    };
    match config::resolve(&flags, std::env::var("WAVECRIT_THREADS").ok()).and_then(|cfg| run(&cfg)) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("wavecrit: {e}");
            e.exit_code()
        }
    }
}
