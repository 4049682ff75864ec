//! Batch front end for `pingpong-core`: reads a TOML run configuration,
//! runs one subcommand and produces a versioned JSON record.

pub mod config;
mod record;
mod run;

pub use config::RunConfig;
pub use record::{Outcome, Status, FORMAT};
pub use run::{run, run_with_workers, Command};
