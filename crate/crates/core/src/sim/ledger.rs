//! Per-operation message accounting.

use crate::overlay::RouteTrace;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct OpRecord {
    pub skeleton: u32,
    pub intra: u32,
    pub maintenance: u32,
    pub retries: u32,
    pub ok: bool,
}

impl OpRecord {
    pub fn from_trace(trace: &RouteTrace) -> Self {
        OpRecord {
            skeleton: trace.skeleton_hops(),
            intra: trace.intra_hops(),
            maintenance: trace.maintenance,
            retries: trace.retries,
            ok: true,
        }
    }

    pub fn failed() -> Self {
        OpRecord::default()
    }

    pub fn total(&self) -> u32 {
        self.skeleton + self.intra + self.maintenance
    }
}

/// Aggregates over the successful operations of a ledger. Percentiles use
/// the nearest-rank rule.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct HopStats {
    pub ops: usize,
    pub succeeded: usize,
    pub mean: f64,
    pub p50: f64,
    pub p99: f64,
    pub max: f64,
    pub skeleton_mean: f64,
    pub skeleton_max: f64,
    pub retries: u64,
}

impl HopStats {
    /// Share of operations that succeeded; 1 for an empty ledger.
    pub fn success_rate(&self) -> f64 {
        if self.ops == 0 {
            1.0
        } else {
            self.succeeded as f64 / self.ops as f64
        }
    }
}

/// Raw event log of one operation class.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct HopLedger {
    records: Vec<OpRecord>,
}

fn nearest_rank(sorted: &[u32], pct: f64) -> f64 {
    if sorted.is_empty() {
        return 0.0;
    }
    let rank = ((pct / 100.0) * sorted.len() as f64).ceil().max(1.0) as usize;
    f64::from(sorted[rank.min(sorted.len()) - 1])
}

impl HopLedger {
    pub fn new() -> Self {
        HopLedger::default()
    }

    pub fn push(&mut self, record: OpRecord) {
        self.records.push(record);
    }

    pub fn record(&mut self, trace: &RouteTrace) {
        self.push(OpRecord::from_trace(trace));
    }

    pub fn record_failure(&mut self) {
        self.push(OpRecord::failed());
    }

    pub fn records(&self) -> &[OpRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Messages across every successful operation.
    pub fn total_messages(&self) -> u64 {
        self.records.iter().filter(|r| r.ok).map(|r| u64::from(r.total())).sum()
    }

    pub fn stats(&self) -> HopStats {
        let ok: Vec<&OpRecord> = self.records.iter().filter(|r| r.ok).collect();
        let mut totals: Vec<u32> = ok.iter().map(|r| r.total()).collect();
        totals.sort_unstable();
        let n = ok.len().max(1) as f64;
        HopStats {
            ops: self.records.len(),
            succeeded: ok.len(),
            mean: totals.iter().map(|&t| f64::from(t)).sum::<f64>() / n,
            p50: nearest_rank(&totals, 50.0),
            p99: nearest_rank(&totals, 99.0),
            max: totals.last().map_or(0.0, |&t| f64::from(t)),
            skeleton_mean: ok.iter().map(|r| f64::from(r.skeleton)).sum::<f64>() / n,
            skeleton_max: ok.iter().map(|r| f64::from(r.skeleton)).fold(0.0, f64::max),
            retries: self.records.iter().map(|r| u64::from(r.retries)).sum(),
        }
    }
}
