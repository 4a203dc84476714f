//! Driver for the `lebesgue-lab` binary: configuration, artifact writers and subcommands.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod output;

use std::path::PathBuf;

use lebesgue_core::Error;
use serde_json::json;

pub use commands::{run, RunSummary};
pub use config::{Command, ConfigError, RunConfig};

/// Process exit status for a failed run.
pub fn exit_code(e: &Error) -> i32 {
    if e.is_validation() {
        1
    } else {
        2
    }
}

pub fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::Domain(_) => "domain",
        Error::Input(_) => "input",
        Error::Range(_) => "range",
        Error::Accuracy { .. } => "accuracy",
        Error::Mesh(_) => "mesh",
        Error::Assembly(_) => "assembly",
        Error::Convergence { .. } => "convergence",
        Error::Reliability { .. } => "reliability",
    }
}

/// `{"error": {kind, message, pointer}}` as printed on stderr.
pub fn error_json(kind: &str, message: &str, pointer: Option<&str>) -> String {
    json!({ "error": { "kind": kind, "message": message, "pointer": pointer } }).to_string()
}

/// Loads (or defaults) the config and fills in the command-line overrides.
pub fn prepare(
    command: Command,
    config: Option<&PathBuf>,
    out: Option<PathBuf>,
    seed: Option<u64>,
) -> Result<RunConfig, (i32, String)> {
    let cfg = match config {
        Some(p) => RunConfig::load(p).map_err(|e| (1, error_json("config", &e.message, Some(&e.pointer))))?,
        None => RunConfig::default(),
    };
    cfg.resolve(command, out, seed).map_err(|e| (exit_code(&e), error_json(error_kind(&e), &e.to_string(), None)))
}
