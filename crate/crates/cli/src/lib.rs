//! Experiment driver for `toflab`: run configuration, scenario runners, CSV
//! and SVG output, and the property-check registry behind `toflab check`.

pub mod checks;
pub mod config;
pub mod output;
pub mod run;

use thiserror::Error;

pub use config::{RunConfig, Scenario};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),

    #[error("check failed: {0}")]
    Check(String),

    #[error(transparent)]
    Core(#[from] toflab::TofError),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Caps the global rayon pool at `TOF_LAB_THREADS` when it is set.
pub fn init_threads() -> Result<(), CliError> {
    if let Ok(v) = std::env::var("TOF_LAB_THREADS") {
        let n: usize = v.trim().parse().map_err(|_| CliError::Config(format!("TOF_LAB_THREADS = `{v}`")))?;
        // a second call (or a pool built elsewhere) is not an error worth failing on
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
    Ok(())
}
