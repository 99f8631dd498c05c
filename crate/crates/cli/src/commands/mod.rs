//! Subcommand implementations. Each runner takes a validated config and an
//! output directory, writes its artifacts, prints a short summary, and
//! returns a process exit code: 0 success, 2 configuration error, 3
//! statistical sanity failure, 4 numerical validity failure.

pub mod correlations;
pub mod optimize;
pub mod oracle;
pub mod sample;
pub mod unravel;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::config::{ConfigError, ScenarioConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_STATISTICAL: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;

#[derive(Debug, thiserror::Error)]
pub enum CmdError {
    #[error("{0}")]
    Config(String),
    #[error("statistical sanity failure: {0}")]
    Statistical(String),
    #[error("numerical validity failure: {0}")]
    Numerical(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl CmdError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => EXIT_CONFIG,
            Self::Statistical(_) => EXIT_STATISTICAL,
            Self::Numerical(_) => EXIT_NUMERICAL,
            Self::Io(_) => 1,
        }
    }
}

impl From<ConfigError> for CmdError {
    fn from(e: ConfigError) -> Self {
        Self::Config(e.to_string())
    }
}

impl From<unravel_core::Error> for CmdError {
    fn from(e: unravel_core::Error) -> Self {
        use unravel_core::Error as E;
        match &e {
            E::IndefiniteCovariance { .. } | E::ProjectionOverflow { .. } | E::Integration(_) => {
                Self::Numerical(e.to_string())
            }
            _ => Self::Config(e.to_string()),
        }
    }
}

pub(crate) fn create(out_dir: &Path, name: &str) -> Result<BufWriter<File>, CmdError> {
    std::fs::create_dir_all(out_dir)?;
    Ok(BufWriter::new(File::create(out_dir.join(name))?))
}

pub(crate) fn write_resolved_config(
    cfg: &ScenarioConfig,
    out_dir: &Path,
) -> Result<PathBuf, CmdError> {
    let path = out_dir.join("resolved_config.json");
    std::fs::create_dir_all(out_dir)?;
    let mut f = BufWriter::new(File::create(&path)?);
    writeln!(f, "{}", cfg.resolved_json())?;
    Ok(path)
}

/// The coupled-bath mode sets with squeezing applied, or a config error
/// naming the analytic-only bath.
pub(crate) fn all_squeezed_modes(
    cfg: &ScenarioConfig,
) -> Result<Vec<unravel_core::ModeSet>, CmdError> {
    let coupled = cfg.coupled_indices();
    if coupled.is_empty() {
        return Err(CmdError::Config("no coupled qubit in the system".into()));
    }
    coupled
        .iter()
        .map(|&q| {
            cfg.squeezed_modes(q)?.ok_or_else(|| {
                CmdError::Config(format!(
                    "qubit {q} uses the analytic delta-kernel bath; noise sampling and \
                     trajectory propagation need a discretized bath (set omega_max and \
                     n_modes on the markov bath, or use another kind)"
                ))
            })
        })
        .collect()
}
