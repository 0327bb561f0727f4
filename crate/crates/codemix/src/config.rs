//! Tool configuration: one strict TOML file covering paths, thresholds,
//! backend definitions, and concurrency limits. Unknown keys are rejected.
//! Secrets never appear in the file; backends name the environment variable
//! holding their API key instead, so config hashes stay key-free.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::backend::BackendConfig;
use crate::evalstats::MarginMode;
use crate::pipeline::PipelineConfig;
use crate::textcore::AmbiguousTagPolicy;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct PathsConfig {
    pub lexicon_matrix: Option<PathBuf>,
    pub lexicon_embedded: Option<PathBuf>,
    pub pii_patterns: Option<PathBuf>,
}

/// Which pipeline role a configured backend serves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackendRole {
    /// Ensemble LID voter.
    Lid,
    /// Translation + retraining engine.
    Translator,
    /// Naturalness classifier scorer.
    Classifier,
    /// Quality-estimation scorer.
    Qe,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct BackendEntry {
    pub role: BackendRole,
    pub backend: BackendConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct ToolConfig {
    /// Global PRNG seed for splits and resampling.
    pub seed: u64,
    /// Worker-pool bound handed to modules; never exceeded.
    pub workers: usize,
    /// Tolerated fraction of malformed JSONL lines before aborting a read.
    pub malformed_tolerance: f64,
    pub ambiguous_tag: AmbiguousTagPolicy,
    /// Tie margin for metric-vs-judge agreement.
    pub margin: f64,
    pub margin_mode: MarginMode,
    pub n_resamples: usize,
    pub paths: PathsConfig,
    pub pipeline: PipelineConfig,
    pub backends: Vec<BackendEntry>,
}

impl Default for ToolConfig {
    fn default() -> Self {
        ToolConfig {
            seed: 0,
            workers: 1,
            malformed_tolerance: 0.0,
            ambiguous_tag: AmbiguousTagPolicy::default(),
            margin: 0.02,
            margin_mode: MarginMode::default(),
            n_resamples: 10_000,
            paths: PathsConfig::default(),
            pipeline: PipelineConfig::default(),
            backends: Vec::new(),
        }
    }
}

impl ToolConfig {
    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let raw = fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml(&raw)
    }

    pub fn from_toml(raw: &str) -> Result<Self, ConfigError> {
        let config: ToolConfig =
            toml::from_str(raw).map_err(|e| ConfigError::Parse(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let unit = |name: &str, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(ConfigError::Invalid(format!("{name} = {v} outside [0, 1]")))
            }
        };
        let f = &self.pipeline.filter;
        unit("pipeline.filter.lexical_threshold", f.lexical_threshold)?;
        unit("pipeline.filter.char_threshold", f.char_threshold)?;
        unit("pipeline.filter.equilibrium_max", f.equilibrium_max)?;
        unit("pipeline.filter.classifier_threshold", f.classifier_threshold)?;
        unit("pipeline.filter.qe_threshold", f.qe_threshold)?;
        if f.length_ratio_min <= 0.0 || f.length_ratio_min > f.length_ratio_max {
            return Err(ConfigError::Invalid(format!(
                "pipeline.filter length ratio interval [{}, {}] is not a positive interval",
                f.length_ratio_min, f.length_ratio_max
            )));
        }
        if self.pipeline.iteration_count == 0 {
            return Err(ConfigError::Invalid(
                "pipeline.iteration_count must be >= 1".into(),
            ));
        }
        if !(0.0..1.0).contains(&self.margin) {
            return Err(ConfigError::Invalid(format!(
                "margin = {} outside [0, 1)",
                self.margin
            )));
        }
        if self.workers == 0 {
            return Err(ConfigError::Invalid("workers must be >= 1".into()));
        }
        let lid_count = self
            .backends
            .iter()
            .filter(|b| b.role == BackendRole::Lid)
            .count();
        if lid_count > 0 && lid_count % 2 == 0 {
            return Err(ConfigError::Invalid(format!(
                "backends: LID ensemble size must be odd, got {lid_count}"
            )));
        }
        for entry in &self.backends {
            if entry.backend.timeout_ms == 0 {
                return Err(ConfigError::Invalid(format!(
                    "backends.{}.timeout_ms must be > 0",
                    entry.backend.name
                )));
            }
        }
        Ok(())
    }

    pub fn backends_with_role(&self, role: BackendRole) -> Vec<&BackendEntry> {
        self.backends.iter().filter(|b| b.role == role).collect()
    }

    /// SHA-256 over the canonical JSON form of the effective configuration.
    /// Changes iff any effective value changes.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_vec(self).expect("config serializes");
        let digest = Sha256::digest(&canonical);
        format!("{digest:x}")
    }
}
