//! Config parsing and command implementations behind the `lawruk` binary.

pub mod commands;
pub mod config;

pub use config::{parse_config, serialize_config, ConfigError, ProblemConfig};

/// Version of the JSON report layout.
pub const SCHEMA_VERSION: u32 = 1;
