//! Batch front end: one subcommand per verification campaign, each reading
//! a key = value config and writing CSV and JSON reports.

pub mod commands;
pub mod config;

use std::fmt;
use std::io::IsTerminal;

use gevrey_bbm::Error;
use serde::Serialize;

pub use commands::{
    cmd_calibrate, cmd_conservation, cmd_radius, cmd_schedule, cmd_simulate, cmd_sweep,
    cmd_verify_identities,
};
pub use config::RunConfig;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const CONFIG: i32 = 2;
    pub const SIMULATION: i32 = 3;
    pub const IDENTITY: i32 = 4;
    pub const DATA: i32 = 5;
    pub const CROSS_CHECK: i32 = 6;
}

#[derive(Debug, Clone, Serialize)]
pub struct CliError {
    pub code: i32,
    pub kind: &'static str,
    pub message: String,
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        Self {
            code: exit::CONFIG,
            kind: "config",
            message: message.into(),
        }
    }

    pub fn io(context: &str, e: std::io::Error) -> Self {
        Self::config(format!("{context}: {e}"))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let (code, kind) = match &e {
            Error::InvalidInput(_) | Error::Calibration(_) => (exit::CONFIG, "config"),
            Error::SymmetryViolation { .. }
            | Error::OverflowRisk { .. }
            | Error::BlowupDetected { .. }
            | Error::NoConvergence { .. }
            | Error::SeriesDivergence { .. } => (exit::SIMULATION, "simulation"),
            Error::IdentityViolation { .. } => (exit::IDENTITY, "identity"),
            Error::InsufficientData(_) | Error::SpectrumTooThin { .. } | Error::NoFit => {
                (exit::DATA, "data")
            }
            Error::CrossCheckFailure { .. } => (exit::CROSS_CHECK, "cross_check"),
        };
        Self {
            code,
            kind,
            message: e.to_string(),
        }
    }
}

/// Print an error to standard error, in red when allowed.
pub fn report_error(e: &CliError) {
    let stderr = std::io::stderr();
    let color = stderr.is_terminal() && std::env::var_os("NO_COLOR").is_none();
    if color {
        eprintln!("\x1b[31merror\x1b[0m: {}", e.message);
    } else {
        eprintln!("error: {}", e.message);
    }
}
