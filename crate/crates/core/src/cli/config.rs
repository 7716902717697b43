use std::fs;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use super::CliError;
use crate::engines::DEFAULT_CAP;
use crate::error::Error;
use crate::model::ProcessSpec;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

/// Everything that determines the output of a simulation batch.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub spec: ProcessSpec,
    pub n_trajectories: u64,
    pub master_seed: u64,
    pub cap: u64,
    /// Last index of the reported survival curve.
    pub horizon: u64,
    /// `None` writes to standard output.
    pub output_path: Option<PathBuf>,
    pub output_format: OutputFormat,
    /// Worker threads; does not affect the output.
    pub parallelism: usize,
    pub confidence: f64,
}

pub const DEFAULT_TRAJECTORIES: u64 = 1_000;
pub const DEFAULT_HORIZON: u64 = 1_000;
pub const DEFAULT_CONFIDENCE: f64 = 0.95;

impl ExperimentConfig {
    pub fn new(spec: ProcessSpec) -> Self {
        Self {
            spec,
            n_trajectories: DEFAULT_TRAJECTORIES,
            master_seed: 0,
            cap: DEFAULT_CAP,
            horizon: DEFAULT_HORIZON.min(DEFAULT_CAP),
            output_path: None,
            output_format: OutputFormat::Csv,
            parallelism: 1,
            confidence: DEFAULT_CONFIDENCE,
        }
    }

    pub fn validate(&self) -> Result<(), Error> {
        self.spec.validate()?;
        if self.n_trajectories == 0 {
            return Err(Error::contract("n_trajectories must be >= 1"));
        }
        if self.cap == 0 {
            return Err(Error::contract("cap must be >= 1"));
        }
        if self.horizon == 0 || self.horizon > self.cap {
            return Err(Error::contract(format!(
                "horizon must lie in [1, cap = {}], got {}",
                self.cap, self.horizon
            )));
        }
        if self.parallelism == 0 {
            return Err(Error::contract("threads must be >= 1"));
        }
        if !(self.confidence > 0.0 && self.confidence < 1.0) {
            return Err(Error::domain(format!(
                "confidence must lie in (0, 1), got {}",
                self.confidence
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T: Clone> OneOrMany<T> {
    pub fn to_vec(&self) -> Vec<T> {
        match self {
            OneOrMany::One(v) => vec![v.clone()],
            OneOrMany::Many(v) => v.clone(),
        }
    }
}

/// JSON configuration file. Keys mirror the command-line flags; flags given
/// on the command line take precedence. `l0`, `step` and `stretch` may be
/// lists for `sweep`.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub seed: Option<u64>,
    pub n: Option<u64>,
    pub cap: Option<u64>,
    pub horizon: Option<u64>,
    pub l0: Option<OneOrMany<f64>>,
    pub step: Option<OneOrMany<String>>,
    pub stretch: Option<OneOrMany<String>>,
    pub out: Option<PathBuf>,
    pub summary: Option<PathBuf>,
    pub format: Option<OutputFormat>,
    pub strict: Option<bool>,
    pub threads: Option<usize>,
    pub explore: Option<bool>,
    pub confidence: Option<f64>,
    pub epsilon: Option<f64>,
    pub blocks: Option<u64>,
    pub samples: Option<usize>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))
    }

    pub fn single<T: Clone>(
        value: &Option<OneOrMany<T>>,
        key: &str,
    ) -> Result<Option<T>, CliError> {
        match value {
            None => Ok(None),
            Some(OneOrMany::One(v)) => Ok(Some(v.clone())),
            Some(OneOrMany::Many(v)) if v.len() == 1 => Ok(Some(v[0].clone())),
            Some(OneOrMany::Many(_)) => Err(CliError::Usage(format!(
                "config key {key:?} takes a single value for this command"
            ))),
        }
    }
}
