//! Run configuration, mode pipelines and output files.

pub mod config;
pub mod run;

use std::path::Path;

pub use config::{parse_config, parse_config_str, Mode, RunConfig};
pub use run::{execute, exit_code, run, write_bundle, ResultBundle, RunOutcome};

/// Writes through a temporary file in the same directory and renames it
/// into place, so readers never see a partial file.
pub fn write_atomic(path: &Path, contents: &str) -> std::io::Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(format!(".tmp{}", std::process::id()));
    std::fs::write(&tmp, contents)?;
    std::fs::rename(&tmp, path)
}
