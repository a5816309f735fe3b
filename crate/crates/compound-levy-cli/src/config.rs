//! Run configuration: a single JSON document describing the model(s), the
//! evaluation grid and the command parameters.
//!
//! The schema names every field explicitly — in particular the Poisson-gamma
//! mixing law takes `gamma_shape` and `gamma_rate` (a rate, never a scale) —
//! and parsing rejects unknown fields. Constraint violations are reported
//! with the offending field's path.

use compound_levy::{AggregateModel, CompoundModel, FrequencyModel, LevyParams};
use serde::{Deserialize, Serialize};

use crate::montecarlo::{SeveritySampler, SimulationConfig};

#[derive(Debug, Clone, PartialEq)]
pub enum ConfigError {
    /// JSON syntax or schema violation, with serde's line/column message.
    Parse(String),
    /// A field value violates its constraint.
    Invalid { field: String, reason: String },
    /// The command needs a section the config does not provide.
    Missing { field: String },
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ConfigError::Parse(msg) => write!(f, "config parse error: {msg}"),
            ConfigError::Invalid { field, reason } => {
                write!(f, "config field `{field}`: {reason}")
            }
            ConfigError::Missing { field } => write!(f, "config is missing `{field}`"),
        }
    }
}

impl std::error::Error for ConfigError {}

/// One counting law, tagged by `kind`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FrequencyConfig {
    Binomial { trials: u64, p: f64 },
    BetaBinomial { trials: u64, alpha: f64, beta: f64 },
    NegBinomial { r: u64, p: f64 },
    BetaNegBinomial { r: u64, alpha: f64, beta: f64 },
    Poisson { lambda: f64 },
    PoissonGamma { gamma_shape: f64, gamma_rate: f64 },
}

impl FrequencyConfig {
    pub fn to_model(&self) -> FrequencyModel {
        match *self {
            FrequencyConfig::Binomial { trials, p } => FrequencyModel::Binomial { trials, p },
            FrequencyConfig::BetaBinomial { trials, alpha, beta } => {
                FrequencyModel::BetaBinomial { trials, alpha, beta }
            }
            FrequencyConfig::NegBinomial { r, p } => FrequencyModel::NegBinomial { r, p },
            FrequencyConfig::BetaNegBinomial { r, alpha, beta } => {
                FrequencyModel::BetaNegBinomial { r, alpha, beta }
            }
            FrequencyConfig::Poisson { lambda } => FrequencyModel::Poisson { lambda },
            FrequencyConfig::PoissonGamma { gamma_shape, gamma_rate } => {
                FrequencyModel::PoissonGamma { shape: gamma_shape, rate: gamma_rate }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeverityConfig {
    pub gamma: f64,
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub frequency: FrequencyConfig,
    pub severity: SeverityConfig,
}

impl ModelConfig {
    pub fn build(&self, threshold_log: Option<f64>, path: &str) -> Result<CompoundModel, ConfigError> {
        let severity = LevyParams::new(self.severity.gamma, self.severity.delta).map_err(|e| {
            ConfigError::Invalid { field: format!("{path}.severity"), reason: e.to_string() }
        })?;
        let freq = self.frequency.to_model();
        let thr = threshold_log.unwrap_or(compound_levy::compound::DEFAULT_THRESHOLD_LOG);
        CompoundModel::with_threshold_log(freq, severity, thr).map_err(|e| ConfigError::Invalid {
            field: format!("{path}.frequency"),
            reason: e.to_string(),
        })
    }
}

/// Evaluation grid: an equally spaced range or explicit points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridConfig {
    Range { start: f64, stop: f64, points: usize },
    Explicit(Vec<f64>),
}

impl GridConfig {
    pub fn points(&self) -> Result<Vec<f64>, ConfigError> {
        let grid = match self {
            GridConfig::Range { start, stop, points } => {
                if *points == 0 || stop < start {
                    return Err(ConfigError::Invalid {
                        field: "grid".into(),
                        reason: "need points >= 1 and stop >= start".into(),
                    });
                }
                if *points == 1 {
                    vec![*start]
                } else {
                    let step = (stop - start) / (*points as f64 - 1.0);
                    (0..*points).map(|i| start + i as f64 * step).collect()
                }
            }
            GridConfig::Explicit(v) => v.clone(),
        };
        if !grid.windows(2).all(|w| w[0] < w[1]) {
            return Err(ConfigError::Invalid {
                field: "grid".into(),
                reason: "grid must be strictly increasing".into(),
            });
        }
        Ok(grid)
    }
}

/// Truncation caps for the study command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CapsConfig {
    Range { start: u64, stop: u64 },
    Explicit(Vec<u64>),
}

impl CapsConfig {
    pub fn values(&self) -> Result<Vec<u64>, ConfigError> {
        let caps = match self {
            CapsConfig::Range { start, stop } => {
                if start > stop || *start == 0 {
                    return Err(ConfigError::Invalid {
                        field: "caps".into(),
                        reason: "need 1 <= start <= stop".into(),
                    });
                }
                (*start..=*stop).collect()
            }
            CapsConfig::Explicit(v) => v.clone(),
        };
        if caps.is_empty() || !caps.windows(2).all(|w| w[0] < w[1]) || caps[0] == 0 {
            return Err(ConfigError::Invalid {
                field: "caps".into(),
                reason: "caps must be increasing positive integers".into(),
            });
        }
        Ok(caps)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StudyKind {
    Truncation,
    Timing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplerKind {
    InverseCdf,
    Cms,
}

/// Top-level run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Single-cell commands (`eval`, `var`, `truncate`, `simulate`, `study`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelConfig>,
    /// Multi-cell commands (`aggregate`).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub models: Vec<ModelConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridConfig>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub quantiles: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub years: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub block_size: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub caps: Option<CapsConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold_log: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub study: Option<StudyKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub severity_sampler: Option<SamplerKind>,
}

impl RunConfig {
    pub const DEFAULT_YEARS: u64 = 200_000;
    pub const DEFAULT_SEED: u64 = 42;

    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let cfg: RunConfig =
            serde_json::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialization is total")
    }

    fn validate(&self) -> Result<(), ConfigError> {
        if let Some(g) = &self.grid {
            g.points()?;
        }
        if let Some(c) = &self.caps {
            c.values()?;
        }
        for (i, q) in self.quantiles.iter().enumerate() {
            if !(*q > 0.0 && *q < 1.0) {
                return Err(ConfigError::Invalid {
                    field: format!("quantiles[{i}]"),
                    reason: format!("{q} outside (0, 1)"),
                });
            }
        }
        if let Some(t) = self.threshold_log {
            if !(t < 0.0 && t.is_finite()) {
                return Err(ConfigError::Invalid {
                    field: "threshold_log".into(),
                    reason: format!("{t} must be finite and negative"),
                });
            }
        }
        // Model parameter constraints are checked at build time with the
        // field path; trigger that here so parsing fails fast.
        if let Some(m) = &self.model {
            m.build(self.threshold_log, "model")?;
        }
        for (i, m) in self.models.iter().enumerate() {
            m.build(self.threshold_log, &format!("models[{i}]"))?;
        }
        Ok(())
    }

    /// The single model, for cell-level commands.
    pub fn single_model(&self) -> Result<CompoundModel, ConfigError> {
        let m = self.model.as_ref().ok_or(ConfigError::Missing { field: "model".into() })?;
        m.build(self.threshold_log, "model")
    }

    /// All cells, for the aggregate command.
    pub fn aggregate_model(&self) -> Result<AggregateModel, ConfigError> {
        if self.models.len() < 2 {
            return Err(ConfigError::Missing { field: "models (need at least 2)".into() });
        }
        let cells: Vec<CompoundModel> = self
            .models
            .iter()
            .enumerate()
            .map(|(i, m)| m.build(self.threshold_log, &format!("models[{i}]")))
            .collect::<Result<_, _>>()?;
        let budget = self.budget.unwrap_or(AggregateModel::DEFAULT_BUDGET);
        AggregateModel::with_budget(cells, budget)
            .map_err(|e| ConfigError::Invalid { field: "models".into(), reason: e.to_string() })
    }

    pub fn grid_points(&self) -> Result<Vec<f64>, ConfigError> {
        match &self.grid {
            Some(g) => g.points(),
            // 200 equally spaced points on [1, 200].
            None => Ok((1..=200).map(|i| i as f64).collect()),
        }
    }

    pub fn simulation(&self) -> Result<SimulationConfig, ConfigError> {
        let years = self.years.unwrap_or(Self::DEFAULT_YEARS);
        let mut cfg = SimulationConfig::new(years, self.seed.unwrap_or(Self::DEFAULT_SEED), self.grid_points()?);
        if let Some(b) = self.block_size {
            cfg.block_size = b;
        }
        if let Some(SamplerKind::Cms) = self.severity_sampler {
            cfg.severity_sampler = SeveritySampler::Cms;
        }
        cfg.validate().map_err(|e| ConfigError::Invalid {
            field: "years/block_size".into(),
            reason: e.to_string(),
        })?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const POISSON_LOW: &str = r#"{
        "model": {
            "frequency": { "kind": "poisson", "lambda": 0.1 },
            "severity": { "gamma": 0.01, "delta": 0.0 }
        },
        "grid": { "start": 1.0, "stop": 200.0, "points": 200 },
        "quantiles": [0.995],
        "years": 200000,
        "seed": 42
    }"#;

    #[test]
    fn parse_and_build() {
        let cfg = RunConfig::from_json(POISSON_LOW).unwrap();
        let model = cfg.single_model().unwrap();
        assert_eq!(model.bounds().n_upper, 11);
        assert_eq!(cfg.grid_points().unwrap().len(), 200);
    }

    #[test]
    fn parse_serialize_idempotent() {
        let cfg = RunConfig::from_json(POISSON_LOW).unwrap();
        let text = cfg.to_json();
        let cfg2 = RunConfig::from_json(&text).unwrap();
        assert_eq!(cfg, cfg2);
        assert_eq!(cfg2.to_json(), text);
    }

    #[test]
    fn unknown_fields_rejected() {
        let bad = r#"{ "model": { "frequency": { "kind": "poisson", "lambda": 1.0, "scale": 2 },
                        "severity": { "gamma": 0.01, "delta": 0 } } }"#;
        let err = RunConfig::from_json(bad).unwrap_err();
        assert!(matches!(err, ConfigError::Parse(_)), "{err}");
    }

    #[test]
    fn constraint_violations_name_the_field() {
        let bad = r#"{ "model": { "frequency": { "kind": "poisson", "lambda": -1.0 },
                        "severity": { "gamma": 0.01, "delta": 0 } } }"#;
        match RunConfig::from_json(bad).unwrap_err() {
            ConfigError::Invalid { field, .. } => assert_eq!(field, "model.frequency"),
            other => panic!("unexpected {other:?}"),
        }

        let bad_sev = r#"{ "model": { "frequency": { "kind": "poisson", "lambda": 1.0 },
                           "severity": { "gamma": -0.5, "delta": 0 } } }"#;
        match RunConfig::from_json(bad_sev).unwrap_err() {
            ConfigError::Invalid { field, .. } => assert_eq!(field, "model.severity"),
            other => panic!("unexpected {other:?}"),
        }

        let bad_q = r#"{ "quantiles": [0.5, 1.5] }"#;
        match RunConfig::from_json(bad_q).unwrap_err() {
            ConfigError::Invalid { field, .. } => assert_eq!(field, "quantiles[1]"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn gamma_rate_is_explicit() {
        let pg = r#"{ "model": { "frequency": { "kind": "poisson_gamma",
                       "gamma_shape": 1.0, "gamma_rate": 0.1 },
                       "severity": { "gamma": 0.01, "delta": 0 } } }"#;
        let cfg = RunConfig::from_json(pg).unwrap();
        match cfg.model.unwrap().frequency.to_model() {
            FrequencyModel::PoissonGamma { shape, rate } => {
                assert_eq!((shape, rate), (1.0, 0.1));
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
