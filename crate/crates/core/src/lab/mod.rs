//! Experiment driver behind the `ddlab` binary.

pub mod commands;
pub mod config;

use std::fs;
use std::path::{Path, PathBuf};

pub use commands::{run_command, CommandOutput};
pub use config::{parse_config, parse_config_with, Command, ConfigError, ExperimentSpec, Params};

use crate::profile::ProfileError;
use crate::spectral::SpectralError;

#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Profile(#[from] ProfileError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0}")]
    Runtime(String),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> LabError + '_ {
    move |source| LabError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Writes `output` into a fresh `<root>/<command>-<UTC timestamp>` directory
/// together with the resolved configuration and the summary.
pub fn write_outputs(
    root: &Path,
    spec: &ExperimentSpec,
    output: &CommandOutput,
) -> Result<PathBuf, LabError> {
    fs::create_dir_all(root).map_err(io_err(root))?;
    let stamp = chrono::Utc::now().format("%Y%m%dT%H%M%S%.3fZ");
    let base = format!("{}-{stamp}", spec.command);
    let mut dir = root.join(&base);
    let mut k = 1;
    while dir.exists() {
        dir = root.join(format!("{base}-{k}"));
        k += 1;
    }
    fs::create_dir(&dir).map_err(io_err(&dir))?;
    let write = |name: &str, text: &str| {
        let path = dir.join(name);
        fs::write(&path, text).map_err(io_err(&path))
    };
    write("resolved_config.txt", &spec.to_config_text())?;
    write("summary.txt", &output.summary)?;
    if !output.failures.is_empty() {
        write("failures.txt", &(output.failures.join("\n") + "\n"))?;
    }
    for (name, text) in &output.files {
        write(name, text)?;
    }
    Ok(dir)
}
