//! Command-line front end: strict TOML run configs, report bundles and
//! static renders.

pub mod config;
pub mod error;
pub mod render;
pub mod run;

pub use config::{Analysis, Params, RunConfig};
pub use error::CliError;
pub use run::{run, RunOptions, RunOutcome};

use std::path::{Path, PathBuf};

/// Environment variable naming the default root for report bundles.
pub const OUT_ENV: &str = "TORUSMIX_OUT";

/// Output directory precedence: explicit flag, the config's `output_dir`,
/// `$TORUSMIX_OUT/<name>`, then `torusmix-out/<name>`.
pub fn resolve_out_dir(flag: Option<&Path>, config: &RunConfig, env_root: Option<&Path>) -> PathBuf {
    if let Some(p) = flag {
        return p.to_path_buf();
    }
    if let Some(p) = &config.output_dir {
        return p.clone();
    }
    env_root.map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("torusmix-out")).join(&config.name)
}
