//! Run configuration files. Every struct fills missing keys from its
//! `Default` and rejects unknown keys.

use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use tsarules::swinggen::{Fixture, GeneratorConfig};
use tsarules::{ElmConfig, ExtractionConfig, PipelineSpec};

use crate::CliError;

/// Where the network fixture comes from: a JSON file or an inline object.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FixtureSource {
    Path(PathBuf),
    Inline(Fixture),
}

impl FixtureSource {
    pub fn load(source: Option<&FixtureSource>) -> Result<Fixture, CliError> {
        match source {
            None => Ok(Fixture::bundled()),
            Some(FixtureSource::Inline(f)) => {
                f.validate()?;
                Ok(f.clone())
            }
            Some(FixtureSource::Path(p)) => {
                let text = read(p)?;
                Ok(Fixture::from_json(&text)?)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
#[derive(Default)]
pub struct GenConfig {
    pub seed: Option<u64>,
    /// `null` selects the bundled three-machine fixture.
    pub fixture: Option<FixtureSource>,
    pub generator: GeneratorConfig,
    /// Extra copy of the dataset outside the run directory.
    pub out: Option<PathBuf>,
}


#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub seed: Option<u64>,
    pub data: Option<PathBuf>,
    pub elm: ElmConfig,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExtractConfig {
    pub seed: Option<u64>,
    pub data: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub extraction: ExtractionConfig,
}

/// Scores of an outside method, added as a table row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Baseline {
    pub method: String,
    /// CSV with `score` and `label` columns.
    pub path: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfig {
    pub seed: Option<u64>,
    pub data: Option<PathBuf>,
    pub k: usize,
    pub pipeline: PipelineSpec,
    pub baselines: Vec<Baseline>,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            seed: None,
            data: None,
            k: 5,
            pipeline: PipelineSpec::default(),
            baselines: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub seed: Option<u64>,
    pub data: Option<PathBuf>,
    pub k: usize,
    pub pipeline: PipelineSpec,
    pub rho_grid: Vec<f64>,
    pub ants_grid: Vec<usize>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            seed: None,
            data: None,
            k: 5,
            pipeline: PipelineSpec::default(),
            rho_grid: vec![0.75, 0.8, 0.85, 0.9, 0.95],
            ants_grid: vec![50, 100, 200, 400],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub seed: Option<u64>,
    /// Existing dataset; when `null` one is generated first.
    pub data: Option<PathBuf>,
    pub fixture: Option<FixtureSource>,
    pub generator: GeneratorConfig,
    pub k: usize,
    pub pipeline: PipelineSpec,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            seed: None,
            data: None,
            fixture: None,
            generator: GeneratorConfig::default(),
            k: 5,
            pipeline: PipelineSpec::default(),
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))
}

/// Parses a config file, or returns the defaults when no file is given.
pub fn load<T: DeserializeOwned + Default>(path: Option<&Path>) -> Result<T, CliError> {
    match path {
        None => Ok(T::default()),
        Some(p) => parse(&read(p)?).map_err(|e| CliError::Config(format!("{}: {e}", p.display()))),
    }
}

fn parse<T: DeserializeOwned>(text: &str) -> Result<T, serde_json::Error> {
    serde_json::from_str(text)
}

/// `gen` also accepts a bare fixture file as its config.
pub fn load_gen(path: Option<&Path>) -> Result<GenConfig, CliError> {
    let Some(p) = path else {
        return Ok(GenConfig::default());
    };
    let text = read(p)?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?;
    if value.get("machines").is_some() {
        let fixture = Fixture::from_json(&text).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?;
        return Ok(GenConfig {
            fixture: Some(FixtureSource::Inline(fixture)),
            ..GenConfig::default()
        });
    }
    serde_json::from_value(value).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))
}

/// Fails with a config error unless `path` names an existing file.
pub fn require_file(key: &str, path: Option<&PathBuf>) -> Result<PathBuf, CliError> {
    let p = path.ok_or_else(|| CliError::Config(format!("`{key}` is required (flag or config key)")))?;
    if !p.is_file() {
        return Err(CliError::Config(format!("{key} file {} does not exist", p.display())));
    }
    Ok(fs::canonicalize(p).unwrap_or_else(|_| p.clone()))
}

/// Help text listing every key with its default.
pub fn defaults_help<T: Serialize + Default>() -> String {
    let json = serde_json::to_string_pretty(&T::default()).expect("defaults serialize");
    format!("Config keys and defaults (JSON):\n{json}")
}
