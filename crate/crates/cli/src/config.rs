use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use tangent_geom::{ChartMetric, FamilySpec, MetricSpec, WeightPair};

use crate::suites::SuiteId;

/// A configuration problem, located by a dotted field path.
#[derive(Debug, thiserror::Error)]
#[error("{path}: {message}")]
pub struct ConfigError {
    pub path: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(path: impl Into<String>, message: impl fmt::Display) -> Self {
        Self {
            path: path.into(),
            message: message.to_string(),
        }
    }
}

/// Where sample points are drawn from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplingSpec {
    /// Chart points are uniform in `[-box, box]^m`.
    #[serde(rename = "box", default = "default_box")]
    pub half_width: f64,
    /// Fiber vectors have `g`-norm uniform in this range.
    #[serde(default = "default_fiber")]
    pub fiber: [f64; 2],
}

impl Default for SamplingSpec {
    fn default() -> Self {
        Self {
            half_width: default_box(),
            fiber: default_fiber(),
        }
    }
}

fn default_box() -> f64 {
    0.5
}

fn default_fiber() -> [f64; 2] {
    [0.2, 1.5]
}

fn default_samples() -> usize {
    20
}

fn default_h() -> f64 {
    tangent_geom::oracle::DEFAULT_STEP
}

fn default_suites() -> Vec<String> {
    SuiteId::ALL.iter().map(|s| s.name().to_string()).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub base: MetricSpec,
    pub weights: FamilySpec,
    #[serde(default = "default_suites")]
    pub suites: Vec<String>,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_h")]
    pub h: f64,
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub sampling: SamplingSpec,
}

/// Command-line overrides applied on top of a loaded config.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub suites: Vec<String>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub h: Option<f64>,
    pub output: Option<PathBuf>,
}

/// A config that passed validation, with its geometry already built.
#[derive(Clone, Debug)]
pub struct ValidConfig {
    pub raw: RunConfig,
    pub suites: Vec<SuiteId>,
    pub base: ChartMetric,
    pub weights: WeightPair,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            ConfigError::new(if path == "." { "$".to_string() } else { path }, e.into_inner())
        })
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::new("$", format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if !o.suites.is_empty() {
            self.suites = o.suites.clone();
        }
        if let Some(n) = o.samples {
            self.samples = n;
        }
        if let Some(s) = o.seed {
            self.seed = s;
        }
        if let Some(h) = o.h {
            self.h = h;
        }
        if let Some(p) = &o.output {
            self.output = Some(p.clone());
        }
    }

    pub fn validate(self) -> Result<ValidConfig, ConfigError> {
        if self.samples < 1 {
            return Err(ConfigError::new("samples", "must be at least 1"));
        }
        if !(self.h.is_finite() && self.h > 0.0) {
            return Err(ConfigError::new("h", "must be a positive finite number"));
        }
        if self.suites.is_empty() {
            return Err(ConfigError::new("suites", "must name at least one suite"));
        }
        let mut suites = Vec::new();
        for (i, name) in self.suites.iter().enumerate() {
            let id = SuiteId::from_name(name)
                .ok_or_else(|| ConfigError::new(format!("suites[{i}]"), format!("unknown suite `{name}`")))?;
            if suites.contains(&id) {
                return Err(ConfigError::new(format!("suites[{i}]"), format!("duplicate suite `{name}`")));
            }
            suites.push(id);
        }
        for (name, tol) in &self.tolerances {
            if SuiteId::from_name(name).is_none() {
                return Err(ConfigError::new(format!("tolerances.{name}"), "unknown suite"));
            }
            if !(tol.is_finite() && *tol > 0.0) {
                return Err(ConfigError::new(format!("tolerances.{name}"), "must be a positive finite number"));
            }
        }
        let [lo, hi] = self.sampling.fiber;
        if !(lo >= 0.0 && hi > lo && hi.is_finite()) {
            return Err(ConfigError::new("sampling.fiber", "need 0 <= lo < hi"));
        }
        if !(self.sampling.half_width.is_finite() && self.sampling.half_width >= 0.0) {
            return Err(ConfigError::new("sampling.box", "must be a non-negative finite number"));
        }
        let base = ChartMetric::from_spec(&self.base).map_err(|e| ConfigError::new("base", e))?;
        let weights = WeightPair::from_spec(&self.weights).map_err(|e| ConfigError::new("weights", e))?;
        Ok(ValidConfig {
            raw: self,
            suites,
            base,
            weights,
        })
    }
}

impl ValidConfig {
    pub fn tolerance(&self, suite: SuiteId) -> f64 {
        self.raw
            .tolerances
            .get(suite.name())
            .copied()
            .unwrap_or_else(|| suite.default_tolerance())
    }
}
