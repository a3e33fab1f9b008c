//! The ART overlay: an LRT skeleton of cluster-peers with random spine
//! tables, two-layer collection indexes, and pluggable inner overlays.
//!
//! Cluster `i` of `N'` sits at LRT label `i` and owns the `i`-th block of
//! `S^2` keys, so key order and label order agree. The skeleton (cluster
//! ids, key ranges, index shapes) is fixed at build time; joins, departures
//! and key updates only change cluster contents.
//!
//! Lookups follow the nested routing scheme. In a routing context of `n`
//! labels the hop to the target's level goes through the current cluster's
//! random spine entry for that level. From there the two-layer index
//! reaches the target's collection in at most two hops, and routing
//! recurses into that collection, re-rooted as an LRT of its own, until the
//! collection is small enough (at most `b` members) to reach the target
//! directly. Only the top context's spine tables are stored; nested contexts
//! derive theirs from the seed.

mod index;
mod snapshot;

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

pub use index::{bucket_target, catalog, lrt_node_entries, lrt_total_entries, IndexShape};
pub use snapshot::SNAPSHOT_VERSION;

use crate::inner::{Inner, InnerError, InnerKind, InnerOverlay, PeerDirectory, PeerId};
use crate::keyspace::{Key, KeyError, KeyUniverse};
use crate::lrt::{Fanout, GeometryError, Label, Level, TreeGeometry};

pub type ClusterId = u64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ArtError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("cluster {0} does not exist")]
    UnknownCluster(ClusterId),
    #[error("peer {0} is not live")]
    UnknownPeer(PeerId),
    #[error("cluster {0} has no live peers")]
    ClusterDown(ClusterId),
    #[error("no live spine target from cluster {cluster} at level {level}")]
    UnreachableAfterRepair { cluster: ClusterId, level: Level },
    #[error("no cluster at level {0} has a live representative")]
    LevelExhausted(Level),
    #[error("invalid range [{lo}, {hi}]")]
    InvalidRange { lo: Key, hi: Key },
    #[error(transparent)]
    Key(#[from] KeyError),
    #[error(transparent)]
    Inner(#[from] InnerError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ArtConfig {
    pub fanout: Fanout,
    /// Exponent of the bucket count `log2(Z)^(2c)`.
    pub c: u32,
    pub inner: InnerKind,
    pub seed: u64,
}

impl ArtConfig {
    pub fn new(b: u64, inner: InnerKind, seed: u64) -> Result<Self, ArtError> {
        Ok(ArtConfig {
            fanout: Fanout::new(b)?,
            c: 1,
            inner,
            seed,
        })
    }
}

/// Random spine pointers of one cluster: entry `i` is a cluster at level `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RsiTable {
    pub entries: Vec<ClusterId>,
    /// Stream of the build-time draws.
    pub stream: u64,
    /// Resamples performed per level.
    pub resamples: Vec<u32>,
}

#[derive(Debug, Clone)]
pub struct ClusterPeer {
    pub id: ClusterId,
    pub key_range: (Key, Key),
    pub rsi: RsiTable,
    pub inner: Inner,
}

impl ClusterPeer {
    /// The lowest-key live peer, if any.
    pub fn representative(&self) -> Option<PeerId> {
        self.inner.directory().slots().first().map(|s| s.id)
    }

    pub fn is_live(&self) -> bool {
        self.inner.peer_count() > 0
    }

    pub fn peer_count(&self) -> usize {
        self.inner.peer_count()
    }

    pub fn key_count(&self) -> usize {
        self.inner.key_count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum HopKind {
    Skeleton,
    IntraCluster,
}

/// One message. Skeleton hops name clusters, intra-cluster hops name peers.
/// An undelivered hop went to a dead cluster and timed out.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HopRecord {
    pub kind: HopKind,
    pub from: u64,
    pub to: u64,
    pub delivered: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RouteTrace {
    pub hops: Vec<HopRecord>,
    /// Spine resamples forced by dead targets.
    pub retries: u32,
    /// Stored spine entries found dead, as `(cluster, level)`.
    pub dead_rsi: Vec<(ClusterId, Level)>,
    /// Handoff and repair messages that are not part of a route.
    pub maintenance: u32,
}

impl RouteTrace {
    pub fn skeleton_hops(&self) -> u32 {
        self.count(HopKind::Skeleton)
    }

    pub fn intra_hops(&self) -> u32 {
        self.count(HopKind::IntraCluster)
    }

    /// Every message the operation sent.
    pub fn total(&self) -> u32 {
        self.hops.len() as u32 + self.maintenance
    }

    fn count(&self, kind: HopKind) -> u32 {
        self.hops.iter().filter(|h| h.kind == kind).count() as u32
    }

    fn push(&mut self, kind: HopKind, from: u64, to: u64, delivered: bool) {
        self.hops.push(HopRecord {
            kind,
            from,
            to,
            delivered,
        });
    }

    /// Whether each hop starts where the previous one of the same kind
    /// ended (or where it started, after a timeout). Intra-cluster walks
    /// are checked between skeleton hops.
    pub fn is_connected(&self) -> bool {
        let mut last: [Option<HopRecord>; 2] = [None, None];
        for hop in &self.hops {
            // Arriving at another cluster starts a new intra-cluster walk.
            if hop.kind == HopKind::Skeleton {
                last[HopKind::IntraCluster as usize] = None;
            }
            let slot = &mut last[hop.kind as usize];
            if let Some(prev) = slot {
                let at = if prev.delivered { prev.to } else { prev.from };
                if hop.from != at {
                    return false;
                }
            }
            *slot = Some(*hop);
        }
        true
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FailEvent {
    pub peer: PeerId,
    pub cluster: ClusterId,
    pub keys_lost: usize,
    pub representative_changed: bool,
    /// The cluster lost its last peer.
    pub skeleton_break: bool,
}

#[derive(Debug, Clone)]
pub struct ArtSkeleton {
    config: ArtConfig,
    geometry: TreeGeometry,
    universe: KeyUniverse,
    clusters: Vec<ClusterPeer>,
    indexes: BTreeMap<(u64, Level), IndexShape>,
    /// Cluster of every peer id ever issued; 0 once the peer is gone.
    peer_home: Vec<u32>,
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Deterministic uniform draw in `[lo, hi]` keyed by `parts`.
fn keyed_pick(seed: u64, parts: &[u64], lo: u64, hi: u64) -> u64 {
    let key = parts
        .iter()
        .fold(splitmix64(seed), |h, &p| splitmix64(h ^ p));
    ChaCha8Rng::seed_from_u64(key).random_range(lo..=hi)
}

/// Labels of `level` present in a tree, inclusive.
fn level_labels(g: &TreeGeometry, level: Level) -> (u64, u64) {
    let lo = g.level_start_label(level).0;
    let hi = g.level_start_label(level + 1).0.min(g.node_count() + 1) - 1;
    (lo, hi)
}

/// Builds a skeleton of `n_clusters` clusters over the universe sized so
/// that every cluster starts with exactly `S` peers.
pub fn build_art(n_clusters: u64, config: &ArtConfig) -> Result<ArtSkeleton, ArtError> {
    if n_clusters == 0 {
        return Err(ArtError::InvalidConfig("at least one cluster is required".into()));
    }
    if n_clusters > u32::MAX as u64 {
        return Err(ArtError::InvalidConfig(format!("{n_clusters} clusters is too many")));
    }
    if config.c == 0 {
        return Err(ArtError::InvalidConfig("c must be positive".into()));
    }
    let universe = KeyUniverse::for_clusters(n_clusters)?;
    let geometry = TreeGeometry::new(config.fanout, n_clusters)?;
    let height = geometry.lrt_height();
    let span = universe.peer_span();
    let levels: Vec<(u64, u64)> = (0..height).map(|i| level_labels(&geometry, i)).collect();

    let mut clusters = Vec::with_capacity(n_clusters as usize);
    let mut peer_home = vec![0u32; (n_clusters * span + 1) as usize];
    for id in 1..=n_clusters {
        let (lo, hi) = universe.cluster_keys(id);
        let first_peer = (id - 1) * span + 1;
        let dir = PeerDirectory::with_peers(
            lo,
            hi,
            (0..span).map(|j| (first_peer + j, lo + j * span)),
        );
        for j in 0..span {
            peer_home[(first_peer + j) as usize] = id as u32;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(id);
        let entries = levels
            .iter()
            .map(|&(a, z)| rng.random_range(a..=z))
            .collect();
        clusters.push(ClusterPeer {
            id,
            key_range: (lo, hi),
            rsi: RsiTable {
                entries,
                stream: id,
                resamples: vec![0; height],
            },
            inner: Inner::new(config.inner, dir),
        });
    }
    Ok(ArtSkeleton {
        config: *config,
        geometry,
        universe,
        clusters,
        indexes: catalog(config.fanout, n_clusters, config.c),
        peer_home,
    })
}

impl ArtSkeleton {
    pub fn config(&self) -> &ArtConfig {
        &self.config
    }

    pub fn geometry(&self) -> &TreeGeometry {
        &self.geometry
    }

    pub fn universe(&self) -> &KeyUniverse {
        &self.universe
    }

    pub fn cluster_count(&self) -> u64 {
        self.clusters.len() as u64
    }

    pub fn height(&self) -> usize {
        self.geometry.lrt_height()
    }

    pub fn clusters(&self) -> &[ClusterPeer] {
        &self.clusters
    }

    pub fn cluster(&self, id: ClusterId) -> Result<&ClusterPeer, ArtError> {
        id.checked_sub(1)
            .and_then(|i| self.clusters.get(i as usize))
            .ok_or(ArtError::UnknownCluster(id))
    }

    fn cluster_mut(&mut self, id: ClusterId) -> Result<&mut ClusterPeer, ArtError> {
        id.checked_sub(1)
            .and_then(|i| self.clusters.get_mut(i as usize))
            .ok_or(ArtError::UnknownCluster(id))
    }

    pub fn indexes(&self) -> &BTreeMap<(u64, Level), IndexShape> {
        &self.indexes
    }

    /// Cluster currently holding a live peer.
    pub fn peer_cluster(&self, peer: PeerId) -> Result<ClusterId, ArtError> {
        match self.peer_home.get(peer as usize) {
            Some(&c) if c > 0 => Ok(c as ClusterId),
            _ => Err(ArtError::UnknownPeer(peer)),
        }
    }

    pub fn total_peers(&self) -> usize {
        self.clusters.iter().map(|c| c.peer_count()).sum()
    }

    pub fn total_keys(&self) -> usize {
        self.clusters.iter().map(|c| c.key_count()).sum()
    }

    /// Every live peer id in key order.
    pub fn live_peers(&self) -> impl Iterator<Item = PeerId> + '_ {
        self.clusters
            .iter()
            .flat_map(|c| c.inner.directory().slots().iter().map(|s| s.id))
    }

    /// Every stored key in ascending order.
    pub fn stored_keys(&self) -> impl Iterator<Item = Key> + '_ {
        self.clusters.iter().flat_map(|c| {
            c.inner
                .directory()
                .slots()
                .iter()
                .flat_map(|s| s.keys.iter().copied())
        })
    }

    fn is_live(&self, id: ClusterId) -> bool {
        self.clusters[(id - 1) as usize].is_live()
    }

    fn first_live(&self, lo: ClusterId, hi: ClusterId) -> Option<ClusterId> {
        (lo..=hi).find(|&id| self.is_live(id))
    }

    fn skeleton_hop(trace: &mut RouteTrace, cur: &mut ClusterId, to: ClusterId) {
        if *cur != to {
            trace.push(HopKind::Skeleton, *cur, to, true);
            *cur = to;
        }
    }

    /// Spine target from `cur` for `level` of the context starting at
    /// global label `first`, retrying dead targets with fresh draws.
    fn spine_target(
        &self,
        cur: ClusterId,
        ctx: &TreeGeometry,
        first: ClusterId,
        depth: u64,
        level: Level,
        trace: &mut RouteTrace,
    ) -> Result<ClusterId, ArtError> {
        let (lo, hi) = level_labels(ctx, level);
        let offset = first - 1;
        let draw = |attempt: u64| {
            offset
                + keyed_pick(
                    self.config.seed,
                    &[cur, first, depth, level as u64, attempt],
                    lo,
                    hi,
                )
        };
        let mut target = if depth == 0 {
            self.clusters[(cur - 1) as usize].rsi.entries[level]
        } else {
            draw(0)
        };
        if self.is_live(target) {
            return Ok(target);
        }
        if depth == 0 {
            trace.dead_rsi.push((cur, level));
        }
        for attempt in 1..=self.height() as u64 {
            trace.push(HopKind::Skeleton, cur, target, false);
            trace.retries += 1;
            target = draw(attempt);
            if self.is_live(target) {
                return Ok(target);
            }
        }
        trace.push(HopKind::Skeleton, cur, target, false);
        Err(ArtError::UnreachableAfterRepair {
            cluster: cur,
            level,
        })
    }

    /// Routes between clusters. Returns the reached cluster (always
    /// `target` on success) and the skeleton hops taken.
    pub fn art_lookup(
        &self,
        source: ClusterId,
        target: ClusterId,
    ) -> Result<(ClusterId, RouteTrace), ArtError> {
        self.cluster(source)?;
        if !self.cluster(target)?.is_live() {
            return Err(ArtError::ClusterDown(target));
        }
        let b = self.config.fanout.get();
        let mut trace = RouteTrace::default();
        let mut cur = source;
        let mut first: ClusterId = 1;
        let mut ctx = self.geometry;
        let mut depth = 0u64;
        while cur != target {
            let local = target - first + 1;
            let level = ctx.level_of_label(Label(local))?;
            if level == 0 {
                Self::skeleton_hop(&mut trace, &mut cur, target);
                break;
            }
            let spine = self.spine_target(cur, &ctx, first, depth, level, &mut trace)?;
            Self::skeleton_hop(&mut trace, &mut cur, spine);
            if cur == target {
                break;
            }

            let (lo, hi) = level_labels(&ctx, level);
            let size = ctx.collection_size(level).clamped();
            let m = (local - lo) / size;
            let c_first = first - 1 + lo + m * size;
            let c_last = (c_first + size - 1).min(first - 1 + hi);
            if !(c_first..=c_last).contains(&cur) {
                let shape = IndexShape::of(&ctx, level, self.config.c);
                let m_cur = (cur - first + 1 - lo) / size;
                let bucket = shape.bucket_of(m);
                if shape.bucket_of(m_cur) != bucket {
                    let (b_first, b_last) = shape.bucket_collections(bucket);
                    let from = first - 1 + lo + b_first * size;
                    let to = (first - 1 + lo + (b_last + 1) * size - 1).min(first - 1 + hi);
                    let rep = self
                        .first_live(from, to)
                        .expect("the target's bucket holds a live cluster");
                    Self::skeleton_hop(&mut trace, &mut cur, rep);
                }
                let entry = self
                    .first_live(c_first, c_last)
                    .expect("the target's collection holds a live cluster");
                Self::skeleton_hop(&mut trace, &mut cur, entry);
            }
            if size <= b {
                Self::skeleton_hop(&mut trace, &mut cur, target);
                break;
            }
            first = c_first;
            ctx = ctx.with_node_count(c_last - c_first + 1)?;
            depth += 1;
        }
        Ok((cur, trace))
    }

    /// Appends the intra-cluster route from `from_pos` to the owner of `key`.
    fn route_inside(
        &self,
        cluster: ClusterId,
        from_pos: usize,
        key: Key,
        trace: &mut RouteTrace,
    ) -> Result<PeerId, ArtError> {
        let inner = &self.clusters[(cluster - 1) as usize].inner;
        let slots = inner.directory().slots();
        let (pos, path) = inner.route(from_pos, key)?;
        let mut at = slots[from_pos].id;
        for p in path {
            trace.push(HopKind::IntraCluster, at, slots[p].id, true);
            at = slots[p].id;
        }
        Ok(slots[pos].id)
    }

    /// Finds the peer responsible for `key`, starting at peer `source`.
    pub fn exact_search(&self, source: PeerId, key: Key) -> Result<(PeerId, RouteTrace), ArtError> {
        let home = self.peer_cluster(source)?;
        let target = self.universe.cluster_for_key(key)?;
        let (_, mut trace) = self.art_lookup(home, target)?;
        let from_pos = if target == home {
            self.clusters[(home - 1) as usize]
                .inner
                .directory()
                .position_of(source)
                .expect("home cluster lists its peers")
        } else {
            0
        };
        let peer = self.route_inside(target, from_pos, key, &mut trace)?;
        Ok((peer, trace))
    }

    /// Stored keys in `[lo, hi]`, found by locating `lo` and scanning
    /// peers rightward across clusters until a peer starts beyond `hi`.
    pub fn range_search(
        &self,
        source: PeerId,
        lo: Key,
        hi: Key,
    ) -> Result<(Vec<Key>, RouteTrace), ArtError> {
        if lo > hi {
            return Err(ArtError::InvalidRange { lo, hi });
        }
        self.universe.check(hi)?;
        let (peer, mut trace) = self.exact_search(source, lo)?;
        let mut cluster = self.peer_cluster(peer)?;
        let mut pos = self.clusters[(cluster - 1) as usize]
            .inner
            .directory()
            .position_of(peer)
            .expect("owner is a member");
        let mut answer = Vec::new();
        loop {
            let slots = self.clusters[(cluster - 1) as usize].inner.directory().slots();
            let keys = &slots[pos].keys;
            let from = keys.partition_point(|&k| k < lo);
            let to = keys.partition_point(|&k| k <= hi);
            answer.extend_from_slice(&keys[from..to]);
            if let Some(next) = slots.get(pos + 1) {
                if next.start > hi {
                    break;
                }
                trace.push(HopKind::IntraCluster, slots[pos].id, next.id, true);
                pos += 1;
                continue;
            }
            // Move on to the successor cluster, skipping dead ones.
            let mut next = cluster + 1;
            loop {
                if next > self.cluster_count() || self.clusters[(next - 1) as usize].key_range.0 > hi {
                    return Ok((answer, trace));
                }
                let live = self.is_live(next);
                trace.push(HopKind::Skeleton, cluster, next, live);
                if live {
                    break;
                }
                next += 1;
            }
            cluster = next;
            pos = 0;
        }
        Ok((answer, trace))
    }

    /// Stores `key` at its responsible peer. Returns whether it was new.
    pub fn insert_key(&mut self, source: PeerId, key: Key) -> Result<(bool, RouteTrace), ArtError> {
        let (_, trace) = self.exact_search(source, key)?;
        let cluster = self.universe.cluster_for_key(key)?;
        let (_, fresh) = self
            .cluster_mut(cluster)?
            .inner
            .directory_mut()
            .insert_key(key)?;
        Ok((fresh, trace))
    }

    /// Removes `key` from its responsible peer. Returns whether it existed.
    pub fn delete_key(&mut self, source: PeerId, key: Key) -> Result<(bool, RouteTrace), ArtError> {
        let (_, trace) = self.exact_search(source, key)?;
        let cluster = self.universe.cluster_for_key(key)?;
        let (_, found) = self
            .cluster_mut(cluster)?
            .inner
            .directory_mut()
            .delete_key(key)?;
        Ok((found, trace))
    }

    pub fn contains_key(&self, key: Key) -> bool {
        self.universe
            .cluster_for_key(key)
            .map(|c| self.clusters[(c - 1) as usize].inner.directory().contains_key(key))
            .unwrap_or(false)
    }

    /// If the peer owning `key` stores more than `factor` times its
    /// cluster's mean load (and more than `factor` keys), shifts a boundary
    /// with its lighter neighbor. Returns whether a boundary moved.
    pub fn rebalance_if_overloaded(&mut self, key: Key, factor: f64) -> Result<bool, ArtError> {
        let cluster = self.universe.cluster_for_key(key)?;
        let dir = self.cluster_mut(cluster)?.inner.directory_mut();
        let pos = dir.owner(key)?;
        let mean = dir.key_count() as f64 / dir.len() as f64;
        let load = dir.slots()[pos].keys.len() as f64;
        if load <= factor * mean.max(1.0) {
            return Ok(false);
        }
        Ok(dir.balance_with_neighbor(pos))
    }

    /// A new peer enters through `entrance` carrying `w_key` and joins the
    /// cluster that owns it. Returns the new peer's id.
    pub fn join_peer(&mut self, entrance: PeerId, w_key: Key) -> Result<(PeerId, RouteTrace), ArtError> {
        let home = self.peer_cluster(entrance)?;
        let target = self.universe.cluster_for_key(w_key)?;
        let (_, mut trace) = self.art_lookup(home, target)?;
        let id = self.peer_home.len() as PeerId;
        let inner = &mut self.cluster_mut(target)?.inner;
        let cost = inner.add_peer(id, w_key)?;
        trace.maintenance += cost;
        self.peer_home.push(target as u32);
        Ok((id, trace))
    }

    /// Graceful departure, handled inside the peer's own cluster. The last
    /// peer of a cluster may not leave.
    pub fn leave_peer(&mut self, peer: PeerId) -> Result<RouteTrace, ArtError> {
        let home = self.peer_cluster(peer)?;
        let cost = self.cluster_mut(home)?.inner.remove_peer(peer)?;
        self.peer_home[peer as usize] = 0;
        Ok(RouteTrace {
            maintenance: cost,
            ..RouteTrace::default()
        })
    }

    /// Abrupt failure: the peer's keys are lost, neighbors absorb its range.
    pub fn fail_peer(&mut self, peer: PeerId) -> Result<FailEvent, ArtError> {
        let home = self.peer_cluster(peer)?;
        let cluster = self.cluster_mut(home)?;
        let was_rep = cluster.representative() == Some(peer);
        let (keys_lost, _) = cluster.inner.fail_peer(peer)?;
        let skeleton_break = !cluster.is_live();
        self.peer_home[peer as usize] = 0;
        Ok(FailEvent {
            peer,
            cluster: home,
            keys_lost,
            representative_changed: was_rep && !skeleton_break,
            skeleton_break,
        })
    }

    /// Replaces a stored spine entry with a uniform draw among the live
    /// clusters of its level.
    pub fn rsi_resample(&mut self, cluster: ClusterId, level: Level) -> Result<ClusterId, ArtError> {
        self.cluster(cluster)?;
        if level >= self.height() {
            return Err(ArtError::InvalidConfig(format!(
                "level {level} is beyond the skeleton height {}",
                self.height()
            )));
        }
        let (lo, hi) = level_labels(&self.geometry, level);
        let live: Vec<ClusterId> = (lo..=hi).filter(|&id| self.is_live(id)).collect();
        if live.is_empty() {
            return Err(ArtError::LevelExhausted(level));
        }
        let table = &self.clusters[(cluster - 1) as usize].rsi;
        let draw = table.resamples[level] as u64;
        let pick = keyed_pick(
            self.config.seed,
            &[u64::MAX, cluster, level as u64, draw],
            0,
            live.len() as u64 - 1,
        );
        let chosen = live[pick as usize];
        let table = &mut self.cluster_mut(cluster)?.rsi;
        table.entries[level] = chosen;
        table.resamples[level] += 1;
        Ok(chosen)
    }

    /// Repairs every dead stored spine entry a trace ran into.
    pub fn repair(&mut self, trace: &RouteTrace) -> Result<(), ArtError> {
        for &(cluster, level) in &trace.dead_rsi {
            let entry = self.cluster(cluster)?.rsi.entries[level];
            if !self.is_live(entry) {
                self.rsi_resample(cluster, level)?;
            }
        }
        Ok(())
    }

    /// Routing entries a cluster holds: its spine table plus its share of
    /// the indexes of every level it sits at, one level per nested
    /// context. A first-layer index is striped evenly over all clusters of
    /// its level, a bucket's second-layer index over the bucket's clusters.
    pub fn routing_entries(&self, id: ClusterId) -> Result<f64, ArtError> {
        let cluster = self.cluster(id)?;
        let fanout = self.config.fanout;
        let b = fanout.get();
        let mut total = cluster.rsi.entries.len() as f64;
        let mut first: ClusterId = 1;
        let mut ctx = self.geometry;
        loop {
            let local = id - first + 1;
            let level = ctx.level_of_label(Label(local))?;
            if level == 0 {
                break;
            }
            let (lo, hi) = level_labels(&ctx, level);
            let shape = IndexShape::of(&ctx, level, self.config.c);
            let size = shape.collection_size;
            let m = (local - lo) / size;
            let (b_first, b_last) = shape.bucket_collections(shape.bucket_of(m));
            let bucket_members = (lo + (b_last + 1) * size - 1).min(hi) - (lo + b_first * size) + 1;
            total += lrt_total_entries(fanout, shape.buckets) / (hi - lo + 1) as f64;
            total += lrt_total_entries(fanout, b_last - b_first + 1) / bucket_members as f64;
            if size <= b {
                break;
            }
            let c_first = lo + m * size;
            let c_last = (c_first + size - 1).min(hi);
            first = first - 1 + c_first;
            ctx = ctx.with_node_count(c_last - c_first + 1)?;
        }
        Ok(total)
    }

    /// Largest [`ArtSkeleton::routing_entries`] over all clusters.
    pub fn max_routing_entries(&self) -> f64 {
        (1..=self.cluster_count())
            .map(|id| self.routing_entries(id).expect("cluster ids are valid"))
            .fold(0.0, f64::max)
    }

    /// Versioned text rendering of the skeleton: header, index shapes, and
    /// one line per cluster with its key range and spine table. Peer
    /// membership and stored keys are not part of it.
    pub fn snapshot(&self) -> String {
        snapshot::render(self)
    }
}

#[cfg(test)]
mod tests;
