//! Two-layer collection indexes.
//!
//! The `Z` populated collections of a level are grouped into `B` buckets
//! of `q` consecutive collections. A first-layer LRT spans the buckets and
//! a second-layer LRT inside every bucket spans its collections, so finding
//! a collection costs one hop per layer instead of a full walk over `Z`.
//!
//! Indexes are pure functions of `(context size, level)`: every nested
//! context of the same size has the same shape, which keeps the catalog
//! small enough to snapshot.

use std::collections::{BTreeMap, BTreeSet};

use crate::lrt::{Fanout, Label, Level, TreeGeometry};

/// `B = min(Z, ceil(log2(Z)^(2c)))`, at least 1.
pub fn bucket_target(collections: u64, c: u32) -> u64 {
    if collections <= 1 {
        return 1;
    }
    let b = (collections as f64).log2().powi(2 * c as i32).ceil() as u64;
    b.clamp(1, collections)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IndexShape {
    pub context_len: u64,
    pub level: Level,
    /// Populated collections `Z`.
    pub collections: u64,
    /// Nominal collection size; the last one may be partial.
    pub collection_size: u64,
    /// Buckets actually formed, `ceil(Z / q)`.
    pub buckets: u64,
    /// Collections per bucket `q`; the last bucket may hold fewer.
    pub per_bucket: u64,
    pub first_layer_height: usize,
    pub second_layer_height: usize,
}

impl IndexShape {
    /// Shape of the index over `level` in a context with geometry `g`.
    pub fn of(g: &TreeGeometry, level: Level, c: u32) -> Self {
        let collections = g.populated_collections(level);
        let per_bucket = collections.div_ceil(bucket_target(collections, c)).max(1);
        let buckets = collections.div_ceil(per_bucket);
        let height = |n: u64| {
            TreeGeometry::new(g.fanout(), n.max(1))
                .expect("positive size")
                .lrt_height()
        };
        IndexShape {
            context_len: g.node_count(),
            level,
            collections,
            collection_size: g.collection_size(level).clamped(),
            buckets,
            per_bucket,
            first_layer_height: height(buckets),
            second_layer_height: height(per_bucket.min(collections)),
        }
    }

    /// Bucket of a zero-based collection index.
    pub fn bucket_of(&self, collection: u64) -> u64 {
        collection / self.per_bucket
    }

    /// Zero-based first and last collection of a bucket.
    pub fn bucket_collections(&self, bucket: u64) -> (u64, u64) {
        let first = bucket * self.per_bucket;
        (first, (first + self.per_bucket).min(self.collections) - 1)
    }
}

/// Routing entries held by a node of an LRT with `n` nodes: one left-spine
/// pointer per level, plus a pointer per populated collection of its level
/// when it is the spine node. A single-node LRT needs no table.
pub fn lrt_node_entries(fanout: Fanout, n: u64, label: u64) -> f64 {
    if n <= 1 {
        return 0.0;
    }
    let g = TreeGeometry::new(fanout, n).expect("positive size");
    let level = g.level_of_label(Label(label)).expect("label inside the tree");
    let spine = if level > 0 && g.level_start_label(level).0 == label {
        g.populated_collections(level)
    } else {
        0
    };
    (g.lrt_height() + spine as usize) as f64
}

/// Routing entries of all nodes of an `n`-node LRT together.
pub fn lrt_total_entries(fanout: Fanout, n: u64) -> f64 {
    if n <= 1 {
        return 0.0;
    }
    let g = TreeGeometry::new(fanout, n).expect("positive size");
    let height = g.lrt_height();
    let spines: u64 = (1..height).map(|l| g.populated_collections(l)).sum();
    (n * height as u64 + spines) as f64
}

/// Every index shape any routing context of an `n`-node tree can use,
/// keyed by `(context size, level)`.
pub fn catalog(fanout: Fanout, n: u64, c: u32) -> BTreeMap<(u64, Level), IndexShape> {
    let mut out = BTreeMap::new();
    let mut seen = BTreeSet::new();
    let mut pending = vec![n];
    while let Some(len) = pending.pop() {
        if !seen.insert(len) {
            continue;
        }
        let g = TreeGeometry::new(fanout, len).expect("positive size");
        for level in 1..g.lrt_height() {
            let shape = IndexShape::of(&g, level, c);
            out.insert((len, level), shape);
            if shape.collection_size <= fanout.get() {
                continue;
            }
            let present = g.populated_count(level);
            if present >= shape.collection_size {
                pending.push(shape.collection_size);
            }
            if present % shape.collection_size != 0 {
                pending.push(present % shape.collection_size);
            }
        }
    }
    out
}
