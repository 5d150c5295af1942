use std::path::Path;

use serde::Deserialize;
use serde_json::Value;

use super::CliError;
use crate::processes::{ProblemSpec, ProcessSpec};
use crate::simulate::DEFAULT_EPSILON;

/// Experiment description read from a JSON file.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub process1: ProcessSpec,
    pub process2: ProcessSpec,
    pub horizon: f64,
    #[serde(default)]
    pub estimator: Option<EstimatorConfig>,
    #[serde(default)]
    pub sweep: Option<SweepConfig>,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimatorConfig {
    pub n_paths: usize,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default)]
    pub seed: u64,
}

fn default_epsilon() -> f64 {
    DEFAULT_EPSILON
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    /// Dotted path to a numeric leaf, e.g. `process2.levy.lambda`.
    pub param: String,
    pub from: f64,
    pub to: f64,
    pub steps: usize,
}

impl ExperimentConfig {
    pub fn spec(&self) -> ProblemSpec {
        ProblemSpec::new(self.process1.clone(), self.process2.clone(), self.horizon)
    }
}

/// A parsed config together with its raw JSON, which sweeps edit.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: ExperimentConfig,
    pub raw: Value,
}

impl LoadedConfig {
    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io { path: path.display().to_string(), message: e.to_string() })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let raw: Value = serde_json::from_str(text)
            .map_err(|e| CliError::ConfigParse { field: ".".into(), message: e.to_string() })?;
        let config = from_value(&raw)?;
        Ok(LoadedConfig { config, raw })
    }

    /// Config with the numeric leaf at `path` replaced by `value`.
    pub fn with_param(&self, path: &str, value: f64) -> Result<ExperimentConfig, CliError> {
        let mut raw = self.raw.clone();
        let unknown = || CliError::UnknownParameterPath(path.to_string());
        let mut node = &mut raw;
        for key in path.split('.') {
            node = match node {
                Value::Object(map) => map.get_mut(key),
                Value::Array(items) => key.parse::<usize>().ok().and_then(|i| items.get_mut(i)),
                _ => None,
            }
            .ok_or_else(unknown)?;
        }
        if !node.is_number() {
            return Err(unknown());
        }
        *node = serde_json::Number::from_f64(value)
            .map(Value::Number)
            .ok_or_else(|| CliError::InvalidConfig(format!("sweep value {value} is not finite")))?;
        from_value(&raw)
    }
}

fn from_value(raw: &Value) -> Result<ExperimentConfig, CliError> {
    let config: ExperimentConfig = serde_path_to_error::deserialize(raw).map_err(|e| CliError::ConfigParse {
        field: e.path().to_string(),
        message: e.inner().to_string(),
    })?;
    config.spec().validate().map_err(|e| CliError::InvalidConfig(e.to_string()))?;
    Ok(config)
}
