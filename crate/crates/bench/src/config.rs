//! Flat `key=value` experiment configuration files.

use art_core::inner::InnerKind;
use art_core::keyspace::DistributionKind;
use art_core::sim::{ExperimentConfig, SimError};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("invalid value for {key}: {reason}")]
    Validation { key: String, reason: String },
}

pub const KEYS: [&str; 13] = [
    "n_clusters",
    "b",
    "c",
    "inner",
    "distribution",
    "dist_params",
    "queries",
    "alpha_max",
    "churn_steps",
    "failure_fraction",
    "data_multiplier",
    "seed",
    "universe",
];

fn number<T: std::str::FromStr>(line: usize, key: &str, value: &str) -> Result<T, ConfigError> {
    value.parse().map_err(|_| ConfigError::Parse {
        line,
        reason: format!("{key}: cannot parse {value:?}"),
    })
}

/// Parses and validates a configuration. Missing keys keep their defaults;
/// `#` starts a comment anywhere on a line.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let mut cfg = ExperimentConfig::default();
    let mut seen = Vec::new();
    let mut params: Option<(usize, Vec<f64>)> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let Some((key, value)) = body.split_once('=') else {
            return Err(ConfigError::Parse {
                line,
                reason: format!("expected key=value, found {body:?}"),
            });
        };
        let (key, value) = (key.trim(), value.trim());
        if !KEYS.contains(&key) {
            return Err(ConfigError::Parse {
                line,
                reason: format!("unknown key {key:?}"),
            });
        }
        if seen.contains(&key) {
            return Err(ConfigError::Parse {
                line,
                reason: format!("duplicate key {key:?}"),
            });
        }
        seen.push(key);
        match key {
            "n_clusters" => cfg.n_clusters = number(line, key, value)?,
            "b" => cfg.b = number(line, key, value)?,
            "c" => cfg.c = number(line, key, value)?,
            "inner" => {
                cfg.inner = InnerKind::by_name(value).ok_or_else(|| ConfigError::Validation {
                    key: key.into(),
                    reason: format!("unknown inner overlay {value:?}"),
                })?
            }
            "distribution" => {
                cfg.distribution =
                    DistributionKind::by_name(value).ok_or_else(|| ConfigError::Validation {
                        key: key.into(),
                        reason: format!("unknown distribution {value:?}"),
                    })?
            }
            "dist_params" => {
                let values = value
                    .split(',')
                    .map(|p| number(line, key, p.trim()))
                    .collect::<Result<Vec<f64>, _>>()?;
                params = Some((line, values));
            }
            "queries" => cfg.queries = number(line, key, value)?,
            "alpha_max" => cfg.alpha_max = number(line, key, value)?,
            "churn_steps" => {
                cfg.churn_steps = if value == "auto" {
                    None
                } else {
                    Some(number(line, key, value)?)
                }
            }
            "failure_fraction" => cfg.failure_fraction = number(line, key, value)?,
            "data_multiplier" => cfg.data_multiplier = number(line, key, value)?,
            "seed" => cfg.seed = number(line, key, value)?,
            "universe" => cfg.universe = number(line, key, value)?,
            _ => unreachable!("key list checked above"),
        }
    }
    if let Some((_, values)) = params {
        cfg.distribution = cfg
            .distribution
            .with_params(&values)
            .map_err(|e| ConfigError::Validation {
                key: "dist_params".into(),
                reason: e.to_string(),
            })?;
    }
    validate(&cfg)?;
    Ok(cfg)
}

pub fn validate(cfg: &ExperimentConfig) -> Result<(), ConfigError> {
    cfg.validate().map_err(|e| match e {
        SimError::Validation { key, reason } => ConfigError::Validation { key, reason },
        other => ConfigError::Validation {
            key: "config".into(),
            reason: other.to_string(),
        },
    })
}
