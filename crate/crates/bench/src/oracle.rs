//! Brute-force oracles and the exhaustive small-instance check.

use std::collections::BTreeSet;

use art_core::inner::{InnerKind, InnerOverlay, PeerId};
use art_core::keyspace::Key;
use art_core::overlay::{build_art, ArtConfig, ArtError, ArtSkeleton};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Owner of `key` by scanning every peer's sub-range.
pub fn flat_owner(art: &ArtSkeleton, key: Key) -> Option<PeerId> {
    art.clusters().iter().find_map(|c| {
        let dir = c.inner.directory();
        (0..dir.len()).find_map(|pos| {
            let (lo, hi) = dir.sub_range(pos);
            (lo <= key && key <= hi).then(|| dir.slots()[pos].id)
        })
    })
}

/// Stored keys in `[lo, hi]` by filtering every peer's keys.
pub fn flat_range(art: &ArtSkeleton, lo: Key, hi: Key) -> Vec<Key> {
    let mut out: Vec<Key> = art.stored_keys().filter(|k| (lo..=hi).contains(k)).collect();
    out.sort_unstable();
    out
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct OracleOutcome {
    pub lookups: u64,
    pub ranges: u64,
    pub mismatches: u64,
    /// The first few mismatches, described.
    pub examples: Vec<String>,
}

impl OracleOutcome {
    pub fn passed(&self) -> bool {
        self.mismatches == 0
    }

    fn note(&mut self, what: String) {
        self.mismatches += 1;
        if self.examples.len() < 20 {
            self.examples.push(what);
        }
    }

    pub fn absorb(&mut self, other: OracleOutcome) {
        self.lookups += other.lookups;
        self.ranges += other.ranges;
        self.mismatches += other.mismatches;
        self.examples.extend(other.examples);
        self.examples.truncate(20);
    }
}

fn compare<T: PartialEq + std::fmt::Debug>(out: &mut OracleOutcome, what: String, got: Result<T, ArtError>, want: T) {
    match got {
        Ok(g) if g == want => {}
        other => out.note(format!("{what}: got {other:?}, want {want:?}")),
    }
}

/// Checks one instance: every (start cluster, key) exact search against
/// [`flat_owner`], then `ranges` seeded range queries over a loaded key
/// set against [`flat_range`].
pub fn check_instance(n_clusters: u64, b: u64, inner: InnerKind, seed: u64, ranges: u64) -> OracleOutcome {
    let mut out = OracleOutcome::default();
    let config = ArtConfig::new(b, inner, seed).expect("valid fanout");
    let mut art = build_art(n_clusters, &config).expect("valid size");
    let max_key = art.universe().max_key();
    let owners: Vec<PeerId> = (0..max_key)
        .map(|k| flat_owner(&art, k).expect("every key has an owner"))
        .collect();
    let tag = format!("N'={n_clusters} b={b} {}", inner.name());
    for cluster in art.clusters() {
        let source = cluster.representative().expect("fresh clusters are live");
        for key in 0..max_key {
            out.lookups += 1;
            let got = art.exact_search(source, key).map(|(peer, _)| peer);
            compare(
                &mut out,
                format!("{tag} lookup from cluster {} for key {key}", cluster.id),
                got,
                owners[key as usize],
            );
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let peers: Vec<PeerId> = art.live_peers().collect();
    let mut stored = BTreeSet::new();
    for _ in 0..max_key / 2 {
        let key = rng.random_range(0..max_key);
        let source = peers[rng.random_range(0..peers.len())];
        art.insert_key(source, key).expect("insert routes");
        stored.insert(key);
    }
    for _ in 0..ranges {
        let lo = rng.random_range(0..max_key);
        let hi = (lo + rng.random_range(0..=max_key / 4)).min(max_key - 1);
        let source = peers[rng.random_range(0..peers.len())];
        out.ranges += 1;
        let want: Vec<Key> = stored.range(lo..=hi).copied().collect();
        let flat = flat_range(&art, lo, hi);
        if flat != want {
            out.note(format!("{tag} flat filter disagrees on [{lo}, {hi}]"));
        }
        let got = art.range_search(source, lo, hi).map(|(keys, _)| keys);
        compare(&mut out, format!("{tag} range [{lo}, {hi}]"), got, want);
    }
    out
}

/// The self-test suite: every small instance of the oracle check.
pub fn selftest_suite() -> Vec<(u64, u64, InnerKind)> {
    let mut cells = Vec::new();
    for n in [1, 16, 64, 256] {
        for b in [2, 4] {
            for inner in [InnerKind::FingerRing, InnerKind::DirectOracle] {
                cells.push((n, b, inner));
            }
        }
    }
    cells
}
