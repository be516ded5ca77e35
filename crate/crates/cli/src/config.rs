//! Run and sweep configuration.
//!
//! Values are resolved in three layers: built-in defaults, then the config
//! file, then command-line flags.

use std::path::{Path, PathBuf};

use bvpmmo::analysis::RegimeOptions;
use bvpmmo::models::ParameterSet;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    /// Autonomous embedding `(x, y, p, z)`.
    #[default]
    Original,
    /// Planar system with explicit time.
    Forced,
    /// Fold-centred chart; output converted back to `(x, y, p, z)`.
    Standard,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSpan {
    pub start: f64,
    pub end: f64,
    /// Steps before this time are not written.
    #[serde(default)]
    pub record_from: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    /// Not written back, so outputs do not depend on where they are stored.
    #[serde(skip_serializing)]
    pub dir: Option<PathBuf>,
    pub format: Format,
}

/// Everything needed to reproduce one simulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub model: ModelKind,
    #[serde(default = "default_params")]
    pub params: ParameterSet,
    /// Initial state, forcing phase, transient and record lengths, integrator
    /// and analysis settings.
    #[serde(default)]
    pub run: RegimeOptions,
    /// Explicit span; when absent the run covers the transient and record
    /// periods and only the record is written.
    #[serde(default)]
    pub time: Option<TimeSpan>,
    #[serde(default)]
    pub output: OutputConfig,
}

/// Figure-1(c) point: ε = ω = B1 = 0.1, k1 = 0.9, B0 = 0.205.
pub fn default_params() -> ParameterSet {
    ParameterSet::new(0.1, 0.1, 0.9, 0.205, 0.1).expect("valid defaults")
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            model: ModelKind::Original,
            params: default_params(),
            run: RegimeOptions::default(),
            time: None,
            output: OutputConfig::default(),
        }
    }
}

impl RunConfig {
    /// `(start, end, record_from)` of the integration.
    pub fn span(&self) -> (f64, f64, f64) {
        match self.time {
            Some(t) => (t.start, t.end, t.record_from.unwrap_or(t.start)),
            None => {
                let (rec, end) = self.run.window(&self.params);
                (0.0, end, rec)
            }
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.run.validate()?;
        let (start, end, rec) = self.span();
        if !(start.is_finite() && end.is_finite() && end > start) {
            return Err(CliError::validation(format!(
                "empty or invalid time span [{start}, {end}]"
            )));
        }
        if !(rec.is_finite() && rec >= start && rec < end) {
            return Err(CliError::validation(format!(
                "record_from = {rec} outside [{start}, {end})"
            )));
        }
        if self.model == ModelKind::Standard && self.params.b1() == 0.0 {
            return Err(CliError::validation(
                "the standard chart needs B1 > 0".to_string(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Range {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl Range {
    /// `count` values from `start` to `stop` inclusive.
    pub fn values(&self) -> Vec<f64> {
        match self.count {
            0 => Vec::new(),
            1 => vec![self.start],
            n => (0..n)
                .map(|i| self.start + (self.stop - self.start) * i as f64 / (n - 1) as f64)
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    #[serde(default = "default_parameter")]
    pub parameter: String,
    #[serde(default)]
    pub values: Option<Vec<f64>>,
    #[serde(default)]
    pub range: Option<Range>,
    #[serde(default = "default_jobs")]
    pub jobs: usize,
}

fn default_parameter() -> String {
    "b0".to_string()
}

fn default_jobs() -> usize {
    1
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            parameter: default_parameter(),
            values: None,
            range: None,
            jobs: default_jobs(),
        }
    }
}

impl SweepSpec {
    pub fn resolved_values(&self) -> Result<Vec<f64>, CliError> {
        match (&self.values, &self.range) {
            (Some(_), Some(_)) => Err(CliError::validation(
                "give either values or range, not both".into(),
            )),
            (Some(v), None) => Ok(v.clone()),
            (None, Some(r)) => Ok(r.values()),
            (None, None) => Ok(Vec::new()),
        }
    }
}

/// File form of [`RunConfig`] with every section optional. The `sweep`
/// table is read only by the `sweep` command.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfigFile {
    #[serde(default)]
    pub model: Option<ModelKind>,
    #[serde(default)]
    pub params: Option<ParameterSet>,
    #[serde(default)]
    pub run: Option<RegimeOptions>,
    #[serde(default)]
    pub time: Option<TimeSpan>,
    #[serde(default)]
    pub output: Option<OutputConfig>,
    #[serde(default)]
    pub sweep: Option<SweepSpec>,
}

impl RunConfigFile {
    pub fn into_config(self) -> RunConfig {
        let d = RunConfig::default();
        RunConfig {
            model: self.model.unwrap_or(d.model),
            params: self.params.unwrap_or(d.params),
            run: self.run.unwrap_or(d.run),
            time: self.time,
            output: self.output.unwrap_or(d.output),
        }
    }
}

// Metadata files written by `simulate` carry the resolved config under
// `config`; they are accepted wherever a config file is.
#[derive(Deserialize)]
struct MetadataEnvelope<T> {
    config: T,
}

fn parse<T: serde::de::DeserializeOwned>(path: &Path, text: &str) -> Result<T, CliError> {
    let is_json = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("json"));
    if is_json {
        let value: serde_json::Value = serde_json::from_str(text)
            .map_err(|e| CliError::validation(format!("{}: {e}", path.display())))?;
        let result = if value.get("config").is_some() && value.get("version").is_some() {
            serde_json::from_value::<MetadataEnvelope<T>>(value).map(|m| m.config)
        } else {
            serde_json::from_value::<T>(value)
        };
        result.map_err(|e| CliError::validation(format!("{}: {e}", path.display())))
    } else {
        toml::from_str(text).map_err(|e| CliError::validation(format!("{}: {e}", path.display())))
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::validation(format!("cannot read {}: {e}", path.display())))
}

pub fn load_run(path: Option<&Path>) -> Result<RunConfig, CliError> {
    match path {
        None => Ok(RunConfig::default()),
        Some(p) => Ok(parse::<RunConfigFile>(p, &read(p)?)?.into_config()),
    }
}

pub fn load_sweep(path: Option<&Path>) -> Result<(RunConfig, SweepSpec), CliError> {
    match path {
        None => Ok((RunConfig::default(), SweepSpec::default())),
        Some(p) => {
            let mut c: RunConfigFile = parse(p, &read(p)?)?;
            let spec = c.sweep.take().unwrap_or_default();
            Ok((c.into_config(), spec))
        }
    }
}
