//! Command-line front end: JSON run configurations in, reports and CSV data out.

pub mod config;
pub mod output;
pub mod run;

pub use config::{parse_config, parse_config_for, ConfigError, Mode, RunConfig};
pub use run::{run, RunSummary, Status};

use std::path::{Path, PathBuf};

/// Load a config file for `mode`, apply the command-line overrides, and run it.
/// Returns the process exit code.
pub fn execute(mode: Mode, config: &Path, out: Option<PathBuf>, lambda: Option<f64>) -> anyhow::Result<i32> {
    let text = std::fs::read_to_string(config)
        .map_err(|e| anyhow::anyhow!("cannot read {}: {e}", config.display()))?;
    let mut cfg = parse_config_for(&text, Some(mode))?;
    if let Some(l) = lambda {
        cfg.override_lambda(l)?;
    }
    let out = out
        .or_else(|| cfg.output.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("csvortex-out"));
    let normalized = cfg.to_value();
    let summary = run(&cfg, &normalized, &out)?;
    Ok(summary.exit_code())
}
