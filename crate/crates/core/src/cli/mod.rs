//! Configuration, run orchestration and file emission for the `wigner-mra` binary.

mod commands;
mod config;
mod io;

pub use commands::{run, selftest, RunSummary, SelftestLine};
pub use config::{apply_document, parse_config, InitialState, RunConfig, Subcommand, KEYS};
pub use io::{decomposition_csv, field_csv, field_pgm, parse_field_csv, sha256_hex, OutputDir, PGM_MID_GRAY};

use std::path::PathBuf;

use crate::connection::ConnectionError;
use crate::gdr::GdrError;
use crate::moyal::MoyalError;
use crate::scales::ScalesError;
use crate::transform::TransformError;
use crate::wavelets::WaveletError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CliError {
    #[error("config error: `{key}`{}: {message}", line.map(|l| format!(" (line {l})")).unwrap_or_default())]
    Config {
        key: String,
        line: Option<usize>,
        message: String,
    },
    #[error("{module} error: {message}")]
    Numerical { module: &'static str, message: String },
    #[error("self-test failed: {0} of the checked properties did not hold")]
    SelftestFailed(usize),
    #[error("i/o error at {}: {message}", path.display())]
    Io { path: PathBuf, message: String },
}

impl CliError {
    /// 2 for configuration, 3 for numerical failures, 4 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } => 2,
            CliError::Numerical { .. } | CliError::SelftestFailed(_) => 3,
            CliError::Io { .. } => 4,
        }
    }
}

macro_rules! numerical_from {
    ($($ty:ty => $module:literal),* $(,)?) => {
        $(impl From<$ty> for CliError {
            fn from(e: $ty) -> Self {
                CliError::Numerical { module: $module, message: e.to_string() }
            }
        })*
    };
}

numerical_from!(
    GdrError => "gdr",
    MoyalError => "moyal",
    ScalesError => "scales",
    TransformError => "transform",
    ConnectionError => "connection",
    WaveletError => "wavelets",
);
