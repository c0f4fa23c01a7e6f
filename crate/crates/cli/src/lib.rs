//! Batch experiments over `stlab-core`: configuration files, seeded runs and
//! CSV/JSON/plot-data outputs with a digest manifest.

pub mod config;
pub mod experiment;
pub mod output;

pub use config::{config_from_pairs, parse_config, render_config, ConfigError, ExperimentConfig, Kind};
pub use experiment::{build_graph, run, RunManifest, MANIFEST_FILE};
pub use output::emit_plotdata;

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("config error: {0}")]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Core(#[from] stlab_core::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("refusing to write an empty plot series")]
    EmptySeries,
}

impl RunError {
    pub fn config(message: impl Into<String>) -> Self {
        RunError::Config(ConfigError { line: None, message: message.into() })
    }

    /// Process exit code: 1 for configuration problems, 2 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 1,
            _ => 2,
        }
    }
}
