//! Seeded Monte Carlo runner, configuration and result files.

mod config;
mod output;
mod runner;

pub use config::{load_config, parse_config, Method, ScenarioConfig};
pub use output::{metric_cdf, read_trials_csv, write_cdf_csv, write_results, CdfMetric, CdfRow, ResultFiles};
pub use runner::{run_scenario, run_trial, RunOutput, Scenario};

/// Service label of exhaustive-search records, which use no localization.
pub const EXHAUSTIVE_SERVICE: &str = "none";

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("{origin}:{line}:{column}: {message}")]
    Parse {
        origin: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid value for `{field}`: {message}")]
    InvalidField { field: String, message: String },
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error(transparent)]
    Core(#[from] crate::Error),
}
