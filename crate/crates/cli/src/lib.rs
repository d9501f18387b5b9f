//! Command-line front end for `ncl-core`.
//!
//! Exit codes: 0 on success, 2 for malformed input or usage, 3 when the
//! requested configuration cannot be realized.

// `!(x > 0.0)` and friends reject NaN on purpose
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::ffi::OsString;

use thiserror::Error;

mod commands;
pub mod config;
pub mod output;

pub use commands::Cli;
pub use config::{parse_instance, parse_instance_str, InstanceConfig, Params};
pub use output::{OutputFormat, Units};

/// Environment variable that makes `--seed` mandatory for randomized commands.
pub const REQUIRE_SEED_VAR: &str = "NCL_REQUIRE_SEED";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("{field}: {message}")]
    Schema { field: String, message: String },
    #[error("{field}: {message}")]
    Validation { field: String, message: String },
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("{0}")]
    Usage(String),
    #[error("--seed is required when {REQUIRE_SEED_VAR}=1")]
    MissingSeed,
    #[error("{0}")]
    VerifyFailed(String),
    #[error(transparent)]
    Core(#[from] ncl_core::Error),
}

impl CliError {
    pub fn code(&self) -> &'static str {
        match self {
            CliError::Parse { .. } => "PARSE_ERROR",
            CliError::Schema { .. } => "SCHEMA_ERROR",
            CliError::Validation { .. } => "VALIDATION_ERROR",
            CliError::Io { .. } => "IO_ERROR",
            CliError::Usage(_) => "USAGE_ERROR",
            CliError::MissingSeed => "MISSING_SEED",
            CliError::VerifyFailed(_) => "VERIFY_FAILED",
            CliError::Core(e) => e.code(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if e.is_infeasible() => 3,
            CliError::VerifyFailed(_) => 3,
            _ => 2,
        }
    }
}

/// Parses `args` (program name first) and runs the command. Returns the
/// process exit code; results go to stdout or `--out`, diagnostics to stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    use clap::Parser;
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match cli.execute() {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.code());
            e.exit_code()
        }
    }
}
