//! Configuration files, output formats and run orchestration.

pub mod config;
pub mod csv;
pub mod manifest;
pub mod run;
pub mod svg;

pub use config::RunConfig;
pub use manifest::RunManifest;
pub use run::{exit_code, run, RunOptions, RunOutcome};
