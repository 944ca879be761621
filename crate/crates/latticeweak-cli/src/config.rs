//! Loading of JSON inputs with line-level diagnostics.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use latticeweak::LatticeParams;
use serde::de::DeserializeOwned;

use crate::error::{CliError, CliResult};

/// Reads and deserializes `path`; unknown keys are rejected by the target
/// types.
pub fn read_json<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let shown = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Schema {
        path: shown.clone(),
        message: format!("cannot read: {e}"),
    })?;
    serde_json::from_str(&text).map_err(|e| CliError::Schema {
        path: format!("{shown}:{}:{}", e.line(), e.column()),
        message: e.to_string(),
    })
}

/// Shipped parameter sets.
#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    /// Single-site benchmark couplings.
    PaperL1,
}

/// Where the lattice parameters come from.
#[derive(Clone, Debug, Args)]
pub struct ParamsArgs {
    /// JSON file with lattice parameters.
    #[arg(long, conflicts_with = "preset")]
    pub params: Option<PathBuf>,
    /// Named parameter set, used when no file is given.
    #[arg(long, value_enum, default_value = "paper-l1")]
    pub preset: Preset,
}

impl ParamsArgs {
    pub fn load(&self) -> CliResult<LatticeParams> {
        let p = match &self.params {
            Some(path) => {
                let p: LatticeParams = read_json(path)?;
                p.validate().map_err(|e| CliError::Schema {
                    path: path.display().to_string(),
                    message: e.to_string(),
                })?;
                p
            }
            None => match self.preset {
                Preset::PaperL1 => LatticeParams::benchmark_l1(),
            },
        };
        Ok(p)
    }
}
