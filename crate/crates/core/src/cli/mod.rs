//! Command-line layer: config loading, bundled scenarios and report emission.
//! Reports are deterministic for a given config and seed.

mod commands;
mod config;
pub mod scenarios;

pub use commands::{linear_alpha, random_trig_form, run, Command, RunOptions};
pub use config::{load, merge, parse, AnalyzeConfig, Arith, BoxConfig, Config, HomogeneousCase, Loaded, ReduceConfig, SolveConfig, WitnessConfig};

use crate::error::Error;

/// Process exit code for an error: 2 config, 3 compatibility, 4 no witness,
/// 5 closedness, 1 anything else.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::Parse(_) | Error::Json(_) | Error::Domain(_) | Error::NotExact(_) => 2,
        Error::Compatibility { .. } => 3,
        Error::NoWitness(_) => 4,
        Error::Closedness { .. } => 5,
        _ => 1,
    }
}
