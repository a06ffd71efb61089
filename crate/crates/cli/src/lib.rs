//! Driver behind the `spheropt` binary: configuration, input parsing, the
//! four commands and JSON run reports.

pub mod commands;
pub mod config;
pub mod input;
pub mod report;

use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

pub use commands::{cmd_certify, cmd_generic, cmd_rank1, cmd_solve};
pub use config::{Command, GenericConfig, RunConfig};
pub use report::{RunReport, RunStatus};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("input: {0}")]
    Input(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] spheropt::Error),
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_config(path: &Path) -> Result<RunConfig, CliError> {
    RunConfig::from_json(&read(path)?)
}

/// Run the command named in `config`.
pub fn run(config: &RunConfig) -> Result<RunReport, CliError> {
    config.validate()?;
    let command = config
        .command
        .ok_or_else(|| CliError::Config("no command given".into()))?;
    let input = || {
        config
            .input
            .as_deref()
            .ok_or_else(|| CliError::Config("no input file given".into()))
            .and_then(read)
    };
    match command {
        Command::Solve => cmd_solve(config, &input::parse_problem(&input()?)?),
        Command::Rank1 => cmd_rank1(config, &input::parse_tensor(&input()?)?),
        Command::Certify => cmd_certify(config, &input::parse_problem(&input()?)?, &config.points),
        Command::Generic => cmd_generic(config),
    }
}

/// First 16 hex digits of the SHA-256 of the canonical config JSON.
pub fn config_hash(config: &RunConfig) -> String {
    let digest = Sha256::digest(config.canonical_json().as_bytes());
    hex::encode(digest)[..16].to_string()
}

/// Directories (existing, or spelled with a trailing slash) receive a file
/// named by the config hash; anything else is used as the file path.
pub fn report_path(out: &Path, config: &RunConfig) -> PathBuf {
    let is_dir = out.is_dir() || out.as_os_str().to_string_lossy().ends_with('/');
    if is_dir {
        out.join(format!("{}.json", config_hash(config)))
    } else {
        out.to_path_buf()
    }
}

pub fn write_report(report: &RunReport, out: &Path) -> Result<PathBuf, CliError> {
    let path = report_path(out, &report.config);
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|source| CliError::Io {
            path: parent.to_path_buf(),
            source,
        })?;
    }
    fs::write(&path, report.to_json()).map_err(|source| CliError::Io {
        path: path.clone(),
        source,
    })?;
    Ok(path)
}
