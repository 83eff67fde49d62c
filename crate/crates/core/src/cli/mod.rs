//! Batch front end: JSON configs in, deterministic reports out.

mod config;
mod run;

pub use config::{name, parse_config, Command, Format, GeomSpec, Preset, RunConfig, DEFAULT_SAMPLES, DEFAULT_SEED};
pub use run::{execute, exact, Exact, Header, Report, BUNDLED_MEASURE, TOOL, VERSION};

/// Environment variable overriding the worker count.
pub const WORKERS_ENV: &str = "BESOV_WORKERS";
