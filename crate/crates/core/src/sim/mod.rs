//! Deterministic experiment engine: workloads, churn and failure
//! injection, and metric aggregation over an [`ArtSkeleton`].
//!
//! Every random choice is drawn from a stream derived from the
//! configuration seed and a per-workload tag, so a report is a pure
//! function of its [`ExperimentConfig`].

mod ledger;
mod run;

use std::collections::BTreeMap;
use std::fmt::Write;

use sha2::{Digest, Sha256};
use thiserror::Error;

pub use ledger::{HopLedger, HopStats, OpRecord};
pub use run::{
    run_cell, run_churn, run_churn_bench, run_failure_bench, run_loadbal_bench, run_query_bench,
    Experiment, Workload,
};

use crate::inner::InnerKind;
use crate::keyspace::{DistributionKind, DistributionSpec, KeyError};
use crate::lrt::Fanout;
use crate::overlay::{ArtConfig, ArtError, ArtSkeleton};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("invalid value for {key}: {reason}")]
    Validation { key: String, reason: String },
    #[error(transparent)]
    Art(#[from] ArtError),
    #[error(transparent)]
    Key(#[from] KeyError),
}

impl SimError {
    fn invalid(key: &str, reason: impl Into<String>) -> Self {
        SimError::Validation {
            key: key.to_string(),
            reason: reason.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub n_clusters: u64,
    pub b: u64,
    pub c: u32,
    pub inner: InnerKind,
    pub distribution: DistributionKind,
    /// Exact and range queries per workload.
    pub queries: usize,
    /// Range widths use a multiplier drawn from `1..=alpha_max`.
    pub alpha_max: u64,
    /// Join/leave steps; `None` means ten per initial peer.
    pub churn_steps: Option<u64>,
    pub failure_fraction: f64,
    /// Keys loaded per peer by the load-balancing run.
    pub data_multiplier: u64,
    pub seed: u64,
    /// Size of the data key space workloads draw from; keys are mapped
    /// order-preservingly onto the overlay's key space.
    pub universe: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            n_clusters: 1024,
            b: 4,
            c: 1,
            inner: InnerKind::FingerRing,
            distribution: DistributionKind::Uniform,
            queries: 1000,
            alpha_max: 10,
            churn_steps: None,
            failure_fraction: 0.3,
            data_multiplier: 20,
            seed: 1,
            universe: 1_000_000_000,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        if self.n_clusters == 0 || self.n_clusters > u32::MAX as u64 {
            return Err(SimError::invalid("n_clusters", "must be between 1 and 2^32 - 1"));
        }
        Fanout::new(self.b).map_err(|_| SimError::invalid("b", "not of the form 2^(2^j)"))?;
        if self.c == 0 {
            return Err(SimError::invalid("c", "must be positive"));
        }
        self.distribution
            .validate()
            .map_err(|e| SimError::invalid("dist_params", e.to_string()))?;
        if self.queries == 0 {
            return Err(SimError::invalid("queries", "must be positive"));
        }
        if !(1..=10).contains(&self.alpha_max) {
            return Err(SimError::invalid("alpha_max", "must be in 1..=10"));
        }
        if !(0.0..1.0).contains(&self.failure_fraction) {
            return Err(SimError::invalid("failure_fraction", "must be in [0, 1)"));
        }
        if self.universe == 0 {
            return Err(SimError::invalid("universe", "must be positive"));
        }
        Ok(())
    }

    /// Sorted `key=value` lines covering every field.
    pub fn canonical_text(&self) -> String {
        let params: Vec<String> = self.distribution.params().iter().map(|p| p.to_string()).collect();
        let mut fields = BTreeMap::new();
        fields.insert("alpha_max", self.alpha_max.to_string());
        fields.insert("b", self.b.to_string());
        fields.insert("c", self.c.to_string());
        fields.insert(
            "churn_steps",
            self.churn_steps.map_or("auto".to_string(), |s| s.to_string()),
        );
        fields.insert("data_multiplier", self.data_multiplier.to_string());
        fields.insert("dist_params", params.join(","));
        fields.insert("distribution", self.distribution.name().to_string());
        fields.insert("failure_fraction", self.failure_fraction.to_string());
        fields.insert("inner", self.inner.name().to_string());
        fields.insert("n_clusters", self.n_clusters.to_string());
        fields.insert("queries", self.queries.to_string());
        fields.insert("seed", self.seed.to_string());
        fields.insert("universe", self.universe.to_string());
        let mut out = String::new();
        for (k, v) in fields {
            writeln!(out, "{k}={v}").unwrap();
        }
        out
    }

    /// First 16 hex digits of the SHA-256 of [`Self::canonical_text`].
    pub fn config_hash(&self) -> String {
        let digest = Sha256::digest(self.canonical_text().as_bytes());
        digest.iter().take(8).fold(String::new(), |mut s, b| {
            write!(s, "{b:02x}").unwrap();
            s
        })
    }

    pub fn art_config(&self) -> Result<ArtConfig, SimError> {
        Ok(ArtConfig {
            fanout: Fanout::new(self.b).map_err(ArtError::from)?,
            c: self.c,
            inner: self.inner,
            seed: self.seed,
        })
    }

    pub fn distribution_spec(&self, seed: u64) -> Result<DistributionSpec, SimError> {
        Ok(DistributionSpec::new(self.distribution, seed)?)
    }

    pub fn build(&self) -> Result<ArtSkeleton, SimError> {
        self.validate()?;
        Ok(crate::overlay::build_art(self.n_clusters, &self.art_config()?)?)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRow {
    pub op_class: String,
    pub stats: HopStats,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClusterLoad {
    pub cluster: u64,
    pub peers: usize,
    pub keys: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub config_hash: String,
    /// Peers when the run started.
    pub n_total: u64,
    pub n_clusters: u64,
    pub rows: Vec<MetricsRow>,
    pub max_routing_entries: f64,
    pub cluster_size_max: usize,
    pub violations: u64,
    /// Run-specific measurements, by name.
    pub extras: BTreeMap<String, f64>,
    /// Per-cluster membership and data, filled by the load run.
    pub cluster_loads: Vec<ClusterLoad>,
}

impl MetricsReport {
    pub fn row(&self, op_class: &str) -> Option<&MetricsRow> {
        self.rows.iter().find(|r| r.op_class == op_class)
    }

    pub fn extra(&self, name: &str) -> Option<f64> {
        self.extras.get(name).copied()
    }
}
