//! The four experiment runs.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{ClusterLoad, ExperimentConfig, HopLedger, MetricsReport, MetricsRow, OpRecord, SimError};
use crate::inner::{InnerError, PeerId};
use crate::keyspace::{range_width, Key, KeySampler};
use crate::overlay::{ArtError, ArtSkeleton, RouteTrace};

const EXACT: u64 = 1;
const RANGE: u64 = 2;
const CHURN: u64 = 3;
const FAILURE: u64 = 4;
const LOAD: u64 = 5;

fn stream(seed: u64, tag: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(tag);
    rng
}

/// Data keys of one workload, drawn in the configured data universe and
/// mapped onto the overlay's key space.
#[derive(Debug, Clone)]
pub struct Workload {
    sampler: KeySampler,
    data_universe: u64,
    max_key: u64,
}

impl Workload {
    pub fn new(cfg: &ExperimentConfig, art: &ArtSkeleton, tag: u64) -> Result<Self, SimError> {
        let spec = cfg.distribution_spec(cfg.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ tag)?;
        Ok(Workload {
            sampler: KeySampler::new(spec, cfg.universe)?,
            data_universe: cfg.universe,
            max_key: art.universe().max_key(),
        })
    }

    pub fn key(&self, index: u64) -> Key {
        let raw = self.sampler.key_at(index) as u128;
        (raw * self.max_key as u128 / self.data_universe as u128) as Key
    }
}

/// Which run a cell performs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    Exact,
    Range,
    Query,
    Churn,
    Failure,
    Load,
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Exact => "exact",
            Experiment::Range => "range",
            Experiment::Query => "query",
            Experiment::Churn => "churn",
            Experiment::Failure => "failure",
            Experiment::Load => "load",
        }
    }
}

/// Builds the skeleton for `cfg` and performs one run on it.
pub fn run_cell(cfg: &ExperimentConfig, experiment: Experiment) -> Result<MetricsReport, SimError> {
    let mut art = cfg.build()?;
    let mut report = match experiment {
        Experiment::Exact | Experiment::Range | Experiment::Query => run_query_bench(&art, cfg)?,
        Experiment::Churn => run_churn_bench(&mut art, cfg)?,
        Experiment::Failure => run_failure_bench(&mut art, cfg)?,
        Experiment::Load => run_loadbal_bench(&mut art, cfg)?,
    };
    match experiment {
        Experiment::Exact => report.rows.retain(|r| r.op_class == "exact"),
        Experiment::Range => report.rows.retain(|r| r.op_class == "range"),
        _ => {}
    }
    Ok(report)
}

fn report(art: &ArtSkeleton, cfg: &ExperimentConfig, n_total: u64, rows: Vec<(&str, HopLedger)>) -> MetricsReport {
    MetricsReport {
        config_hash: cfg.config_hash(),
        n_total,
        n_clusters: art.cluster_count(),
        rows: rows
            .into_iter()
            .map(|(name, ledger)| MetricsRow {
                op_class: name.to_string(),
                stats: ledger.stats(),
            })
            .collect(),
        max_routing_entries: art.max_routing_entries(),
        cluster_size_max: art.clusters().iter().map(|c| c.peer_count()).max().unwrap_or(0),
        violations: 0,
        extras: BTreeMap::new(),
        cluster_loads: Vec::new(),
    }
}

fn is_routing_failure(e: &ArtError) -> bool {
    matches!(
        e,
        ArtError::ClusterDown(_) | ArtError::UnreachableAfterRepair { .. } | ArtError::Inner(InnerError::EmptyCluster)
    )
}

/// Sources and keys of the exact-lookup workload over the current peers.
fn exact_plan(art: &ArtSkeleton, cfg: &ExperimentConfig) -> Result<Vec<(PeerId, Key)>, SimError> {
    let work = Workload::new(cfg, art, EXACT)?;
    let mut rng = stream(cfg.seed, EXACT);
    let peers: Vec<PeerId> = art.live_peers().collect();
    Ok((0..cfg.queries as u64)
        .map(|i| (peers[rng.random_range(0..peers.len())], work.key(i)))
        .collect())
}

fn record_lookup(
    ledger: &mut HopLedger,
    result: Result<(PeerId, RouteTrace), ArtError>,
) -> Result<Option<RouteTrace>, SimError> {
    match result {
        Ok((_, trace)) => {
            ledger.record(&trace);
            Ok(Some(trace))
        }
        Err(e) if is_routing_failure(&e) => {
            ledger.record_failure();
            Ok(None)
        }
        Err(e) => Err(e.into()),
    }
}

/// Exact lookups for keys whose cluster is still live, repairing dead
/// spine entries as they are found. Returns the ledger and the number of
/// keys skipped because no live peer owns them.
fn exact_with_repair(art: &mut ArtSkeleton, cfg: &ExperimentConfig) -> Result<(HopLedger, u64), SimError> {
    let mut ledger = HopLedger::new();
    let mut skipped = 0;
    for (source, key) in exact_plan(art, cfg)? {
        let cluster = art.universe().cluster_for_key(key)?;
        if !art.cluster(cluster)?.is_live() {
            skipped += 1;
            continue;
        }
        if let Some(trace) = record_lookup(&mut ledger, art.exact_search(source, key))? {
            art.repair(&trace)?;
        }
    }
    Ok((ledger, skipped))
}

/// Exact-match and range queries from random live peers.
pub fn run_query_bench(art: &ArtSkeleton, cfg: &ExperimentConfig) -> Result<MetricsReport, SimError> {
    let mut exact = HopLedger::new();
    for (source, key) in exact_plan(art, cfg)? {
        record_lookup(&mut exact, art.exact_search(source, key))?;
    }

    let work = Workload::new(cfg, art, RANGE)?;
    let mut rng = stream(cfg.seed, RANGE);
    let peers: Vec<PeerId> = art.live_peers().collect();
    let total_peers = peers.len() as u64;
    let max_key = art.universe().max_key();
    let mut range = HopLedger::new();
    for i in 0..cfg.queries as u64 {
        let source = peers[rng.random_range(0..peers.len())];
        let alpha = rng.random_range(1..=cfg.alpha_max);
        let lo = work.key(i);
        let width = range_width(max_key, total_peers, alpha).max(1);
        let hi = lo.saturating_add(width - 1).min(max_key - 1);
        let result = art.range_search(source, lo, hi).map(|(_, t)| (source, t));
        record_lookup(&mut range, result)?;
    }
    Ok(report(art, cfg, total_peers, vec![("exact", exact), ("range", range)]))
}

/// Ten join/leave steps per initial peer with even odds.
pub fn run_churn_bench(art: &mut ArtSkeleton, cfg: &ExperimentConfig) -> Result<MetricsReport, SimError> {
    let steps = cfg
        .churn_steps
        .unwrap_or(10 * art.total_peers() as u64);
    run_churn(art, cfg, steps, 0.5)
}

/// Joins (probability `join_probability`, entering at a random live peer
/// with a workload key) and departures (a uniformly random live peer).
/// A step is a violation when a departure is refused because it would
/// empty a cluster, or when some cluster exceeds `8 log2(N)^2` peers.
pub fn run_churn(
    art: &mut ArtSkeleton,
    cfg: &ExperimentConfig,
    steps: u64,
    join_probability: f64,
) -> Result<MetricsReport, SimError> {
    let n_total = art.total_peers() as u64;
    let ceiling = 8.0 * (n_total as f64).log2().powi(2);
    let work = Workload::new(cfg, art, CHURN)?;
    let mut rng = stream(cfg.seed, CHURN);
    let mut live: Vec<PeerId> = art.live_peers().collect();
    let mut joins = HopLedger::new();
    let mut leaves = HopLedger::new();
    let mut overfull = art
        .clusters()
        .iter()
        .filter(|c| c.peer_count() as f64 > ceiling)
        .count();
    let (mut violating_steps, mut rejected) = (0u64, 0u64);
    let (mut smallest, mut largest) = (usize::MAX, 0usize);
    for c in art.clusters() {
        smallest = smallest.min(c.peer_count());
        largest = largest.max(c.peer_count());
    }

    for step in 0..steps {
        let mut violated = false;
        if rng.random_bool(join_probability) {
            let entrance = live[rng.random_range(0..live.len())];
            let key = work.key(step);
            match art.join_peer(entrance, key) {
                Ok((id, trace)) => {
                    joins.record(&trace);
                    live.push(id);
                    let size = art.cluster(art.peer_cluster(id)?)?.peer_count();
                    largest = largest.max(size);
                    if size as f64 > ceiling && (size - 1) as f64 <= ceiling {
                        overfull += 1;
                    }
                }
                Err(ArtError::Inner(InnerError::DuplicatePeerPosition(_))) => joins.record_failure(),
                Err(e) => return Err(e.into()),
            }
        } else {
            let idx = rng.random_range(0..live.len());
            let peer = live[idx];
            let cluster = art.peer_cluster(peer)?;
            match art.leave_peer(peer) {
                Ok(trace) => {
                    leaves.record(&trace);
                    live.swap_remove(idx);
                    let size = art.cluster(cluster)?.peer_count();
                    smallest = smallest.min(size);
                    if size as f64 <= ceiling && (size + 1) as f64 > ceiling {
                        overfull -= 1;
                    }
                }
                Err(ArtError::Inner(InnerError::LastPeerInCluster(_))) => {
                    leaves.record_failure();
                    rejected += 1;
                    violated = true;
                }
                Err(e) => return Err(e.into()),
            }
        }
        if violated || overfull > 0 {
            violating_steps += 1;
        }
    }

    let mut out = report(art, cfg, n_total, vec![("join", joins), ("leave", leaves)]);
    out.violations = violating_steps;
    out.cluster_size_max = largest;
    let extras = &mut out.extras;
    extras.insert("steps".into(), steps as f64);
    extras.insert(
        "violation_fraction".into(),
        if steps == 0 { 0.0 } else { violating_steps as f64 / steps as f64 },
    );
    extras.insert("rejected_departures".into(), rejected as f64);
    extras.insert("final_peers".into(), art.total_peers() as f64);
    extras.insert("cluster_size_min".into(), smallest as f64);
    extras.insert("cluster_size_max".into(), largest as f64);
    extras.insert("cluster_size_ceiling".into(), ceiling);
    Ok(out)
}

fn failure_label(fraction: f64) -> String {
    format!("failure@{fraction:.2}")
}

/// Fails peers in 5% steps up to the configured fraction, running the
/// exact-lookup workload (with spine repair) after every step.
pub fn run_failure_bench(art: &mut ArtSkeleton, cfg: &ExperimentConfig) -> Result<MetricsReport, SimError> {
    let n_total = art.total_peers() as u64;
    let mut rng = stream(cfg.seed, FAILURE);
    let mut live: Vec<PeerId> = art.live_peers().collect();
    let mut rows = Vec::new();
    let (baseline, _) = exact_with_repair(art, cfg)?;
    let base_mean = baseline.stats().mean;
    rows.push((failure_label(0.0), baseline));

    let increments = (cfg.failure_fraction / 0.05 - 1e-9).ceil().max(0.0) as u64;
    let (mut failed, mut breaks, mut keys_lost, mut skipped) = (0u64, 0u64, 0u64, 0u64);
    let mut success = Vec::new();
    for step in 1..=increments {
        let fraction = (step as f64 * 0.05).min(cfg.failure_fraction);
        let goal = (fraction * n_total as f64).round() as u64;
        while failed < goal && !live.is_empty() {
            let peer = live.swap_remove(rng.random_range(0..live.len()));
            let event = art.fail_peer(peer)?;
            failed += 1;
            keys_lost += event.keys_lost as u64;
            breaks += u64::from(event.skeleton_break);
        }
        let (ledger, skip) = exact_with_repair(art, cfg)?;
        skipped += skip;
        success.push(ledger.stats().success_rate());
        rows.push((failure_label(fraction), ledger));
    }

    let final_mean = rows.last().map(|(_, l)| l.stats().mean).unwrap_or(base_mean);
    let named: Vec<(&str, HopLedger)> = rows.iter().map(|(n, l)| (n.as_str(), l.clone())).collect();
    let mut out = report(art, cfg, n_total, named);
    out.violations = breaks;
    let extras = &mut out.extras;
    extras.insert("failed_peers".into(), failed as f64);
    extras.insert("skeleton_breaks".into(), breaks as f64);
    extras.insert("keys_lost".into(), keys_lost as f64);
    extras.insert("dead_owned_skipped".into(), skipped as f64);
    extras.insert(
        "hop_inflation".into(),
        if base_mean > 0.0 { final_mean / base_mean } else { 1.0 },
    );
    extras.insert(
        "success_rate_min".into(),
        success.iter().copied().fold(1.0, f64::min),
    );
    Ok(out)
}

/// Loads `peers x data_multiplier` workload keys, moving peer boundaries
/// whenever a peer holds more than twice its cluster's mean load. Each
/// boundary move costs two messages: the load report and the handoff.
pub fn run_loadbal_bench(art: &mut ArtSkeleton, cfg: &ExperimentConfig) -> Result<MetricsReport, SimError> {
    let n_total = art.total_peers() as u64;
    let work = Workload::new(cfg, art, LOAD)?;
    let mut rng = stream(cfg.seed, LOAD);
    let peers: Vec<PeerId> = art.live_peers().collect();
    let mut inserts = HopLedger::new();
    let mut rebalances = HopLedger::new();
    for i in 0..n_total * cfg.data_multiplier {
        let source = peers[rng.random_range(0..peers.len())];
        let key = work.key(i);
        let (_, trace) = art.insert_key(source, key)?;
        inserts.record(&trace);
        if art.rebalance_if_overloaded(key, 2.0)? {
            rebalances.push(OpRecord {
                maintenance: 2,
                ok: true,
                ..OpRecord::default()
            });
        }
    }

    let loads: Vec<ClusterLoad> = art
        .clusters()
        .iter()
        .map(|c| ClusterLoad {
            cluster: c.id,
            peers: c.peer_count(),
            keys: c.key_count(),
        })
        .collect();
    let events = rebalances.len();
    let messages = rebalances.total_messages();
    let mut out = report(art, cfg, n_total, vec![("insert", inserts), ("rebalance", rebalances)]);
    let keys: Vec<f64> = loads.iter().map(|l| l.keys as f64).collect();
    let n = keys.len() as f64;
    let mean = keys.iter().sum::<f64>() / n;
    let max = keys.iter().copied().fold(0.0, f64::max);
    let min = keys.iter().copied().fold(f64::INFINITY, f64::min);
    let extras = &mut out.extras;
    extras.insert("keys_inserted".into(), (n_total * cfg.data_multiplier) as f64);
    extras.insert("keys_loaded".into(), art.total_keys() as f64);
    extras.insert("cluster_keys_mean".into(), mean);
    extras.insert("cluster_keys_max".into(), max);
    extras.insert("cluster_keys_min".into(), min);
    extras.insert("cluster_key_ratio_max_mean".into(), if mean > 0.0 { max / mean } else { 1.0 });
    extras.insert(
        "cluster_key_ratio_max_min".into(),
        if min > 0.0 { max / min } else if max > 0.0 { f64::INFINITY } else { 1.0 },
    );
    extras.insert(
        "cluster_peers_mean".into(),
        loads.iter().map(|l| l.peers as f64).sum::<f64>() / n,
    );
    extras.insert("rebalance_events".into(), events as f64);
    extras.insert("rebalance_messages".into(), messages as f64);
    out.cluster_loads = loads;
    Ok(out)
}
