//! Library surface of the experiment runner, kept separate from the binary so
//! integration tests can drive the commands directly.

pub mod artifacts;
pub mod commands;
pub mod config;
pub mod error;

pub use artifacts::ArtifactsFile;
pub use commands::{compare, run, sweep_threshold, OUTPUT_ROOT_ENV};
pub use config::RunConfig;
pub use error::{CliError, CliResult};
