use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::lrt::t1_hop_bound;

fn art(n: u64, b: u64, inner: InnerKind, seed: u64) -> ArtSkeleton {
    build_art(n, &ArtConfig::new(b, inner, seed).unwrap()).unwrap()
}

fn rep(art: &ArtSkeleton, cluster: ClusterId) -> PeerId {
    art.cluster(cluster).unwrap().representative().unwrap()
}

/// Owner of `key` by scanning every live peer's sub-range.
fn flat_owner(art: &ArtSkeleton, key: Key) -> PeerId {
    for c in art.clusters() {
        let dir = c.inner.directory();
        for pos in 0..dir.len() {
            let (a, z) = dir.sub_range(pos);
            if a <= key && key <= z {
                return dir.slots()[pos].id;
            }
        }
    }
    panic!("no owner for {key}");
}

#[test]
fn single_cluster() {
    let a = art(1, 4, InnerKind::FingerRing, 1);
    assert_eq!(a.height(), 1);
    assert_eq!(a.cluster(1).unwrap().rsi.entries, vec![1]);
    let (c, trace) = a.art_lookup(1, 1).unwrap();
    assert_eq!(c, 1);
    assert_eq!(trace.skeleton_hops(), 0);
    let (_, trace) = a.exact_search(rep(&a, 1), 0).unwrap();
    assert_eq!(trace.skeleton_hops(), 0);
}

#[test]
fn eleven_clusters_on_four_levels() {
    let a = art(11, 2, InnerKind::DirectOracle, 1);
    assert_eq!(a.height(), 4);
    let pops: Vec<u64> = (0..4).map(|i| a.geometry().level_population(i).clamped()).collect();
    assert_eq!(pops, vec![1, 2, 4, 16]);
    assert_eq!(a.geometry().populated_count(3), 4);
    for c in a.clusters() {
        assert_eq!(c.peer_count() as u64, a.universe().peer_span());
        for (level, &e) in c.rsi.entries.iter().enumerate() {
            assert_eq!(a.geometry().level_of_label(Label(e)).unwrap(), level);
        }
    }
}

#[test]
fn seed_changes_spine_tables_only() {
    let x = art(10_000, 4, InnerKind::FingerRing, 1);
    let y = art(10_000, 4, InnerKind::FingerRing, 2);
    assert_eq!(x.indexes(), y.indexes());
    assert_eq!(x.height(), y.height());
    let ranges = |a: &ArtSkeleton| a.clusters().iter().map(|c| c.key_range).collect::<Vec<_>>();
    assert_eq!(ranges(&x), ranges(&y));
    let differing = x
        .clusters()
        .iter()
        .zip(y.clusters())
        .filter(|(p, q)| p.rsi.entries != q.rsi.entries)
        .count();
    assert!(differing > 9_000, "{differing}");
}

#[test]
fn lookup_to_self_is_free() {
    let a = art(300, 2, InnerKind::DirectOracle, 3);
    for c in [1, 2, 77, 300] {
        let (reached, trace) = a.art_lookup(c, c).unwrap();
        assert_eq!(reached, c);
        assert!(trace.hops.is_empty());
    }
}

#[test]
fn first_hop_follows_spine_of_target_level() {
    let a = art(300, 2, InnerKind::DirectOracle, 9);
    let g = a.geometry();
    for target in [19u64, 119, 290] {
        let level = g.level_of_label(Label(target)).unwrap();
        let (reached, trace) = a.art_lookup(3, target).unwrap();
        assert_eq!(reached, target);
        let spine = a.cluster(3).unwrap().rsi.entries[level];
        if spine != 3 {
            assert_eq!(trace.hops[0].to, spine);
        }
    }
    assert_eq!(g.level_of_label(Label(19)).unwrap(), 3);
    assert_eq!(g.level_of_label(Label(119)).unwrap(), 4);
    assert_eq!(g.level_of_label(Label(290)).unwrap(), 5);
}

#[test]
fn every_pair_reaches_its_target() {
    for (b, seed) in [(2, 5), (4, 6)] {
        let a = art(256, b, InnerKind::DirectOracle, seed);
        let ceiling = 4.0 * t1_hop_bound(256, Fanout::new(b).unwrap());
        for s in 1..=256 {
            for t in 1..=256 {
                let (reached, trace) = a.art_lookup(s, t).unwrap();
                assert_eq!(reached, t);
                assert!(trace.is_connected());
                assert_eq!(trace.hops.last().map_or(s, |h| h.to), t);
                assert!(f64::from(trace.skeleton_hops()) <= ceiling.max(4.0), "{s}->{t}");
            }
        }
    }
}

#[test]
fn exact_search_matches_flat_scan() {
    let a = art(64, 2, InnerKind::DirectOracle, 8);
    let u = a.universe().max_key();
    for s in (1..=64).step_by(7) {
        let source = rep(&a, s);
        for k in 0..u {
            let (peer, trace) = a.exact_search(source, k).unwrap();
            assert_eq!(peer, flat_owner(&a, k));
            assert!(trace.intra_hops() <= 1);
        }
    }
}

#[test]
fn own_cluster_needs_no_skeleton_hop() {
    let a = art(64, 4, InnerKind::FingerRing, 8);
    let (lo, hi) = a.cluster(10).unwrap().key_range;
    let source = a.cluster(10).unwrap().inner.directory().slots()[3].id;
    for k in lo..=hi {
        let (peer, trace) = a.exact_search(source, k).unwrap();
        assert_eq!(trace.skeleton_hops(), 0);
        assert_eq!(peer, flat_owner(&a, k));
    }
}

fn loaded(n: u64, b: u64, inner: InnerKind, keys: usize, seed: u64) -> (ArtSkeleton, BTreeSet<Key>) {
    let mut a = art(n, b, inner, seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u = a.universe().max_key();
    let mut oracle = BTreeSet::new();
    let peers: Vec<PeerId> = a.live_peers().collect();
    for _ in 0..keys {
        let k = rng.random_range(0..u);
        let source = peers[rng.random_range(0..peers.len())];
        let (fresh, _) = a.insert_key(source, k).unwrap();
        assert_eq!(fresh, oracle.insert(k));
    }
    (a, oracle)
}

#[test]
fn inserts_match_oracle_set() {
    let (a, oracle) = loaded(256, 4, InnerKind::FingerRing, 10_000, 4);
    assert_eq!(a.stored_keys().collect::<BTreeSet<_>>(), oracle);
    assert_eq!(a.total_keys(), oracle.len());
    let k = *oracle.iter().next().unwrap();
    assert!(a.contains_key(k));
}

#[test]
fn insert_delete_round_trip() {
    let mut a = art(64, 2, InnerKind::FingerRing, 1);
    let source = rep(&a, 5);
    assert!(a.insert_key(source, 1234).unwrap().0);
    assert!(!a.insert_key(source, 1234).unwrap().0);
    let (peer, _) = a.exact_search(source, 1234).unwrap();
    let c = a.peer_cluster(peer).unwrap();
    let dir = a.cluster(c).unwrap().inner.directory();
    assert!(dir.slots()[dir.position_of(peer).unwrap()].keys.contains(&1234));
    assert!(a.delete_key(source, 1234).unwrap().0);
    assert!(!a.delete_key(source, 1234).unwrap().0);
    assert!(!a.contains_key(1234));
    assert_eq!(a.total_keys(), 0);
}

#[test]
fn range_search_matches_filter() {
    let (a, oracle) = loaded(64, 2, InnerKind::FingerRing, 3_000, 12);
    let u = a.universe().max_key();
    let peers: Vec<PeerId> = a.live_peers().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..1_000 {
        let lo = rng.random_range(0..u);
        let hi = (lo + rng.random_range(0..u / 8)).min(u - 1);
        let source = peers[rng.random_range(0..peers.len())];
        let (got, trace) = a.range_search(source, lo, hi).unwrap();
        let want: Vec<Key> = oracle.range(lo..=hi).copied().collect();
        assert_eq!(got, want);
        assert!(trace.is_connected());
    }
    assert_eq!(
        a.range_search(peers[0], 5, 4).unwrap_err(),
        ArtError::InvalidRange { lo: 5, hi: 4 }
    );
}

#[test]
fn degenerate_range_costs_one_lookup() {
    let (a, oracle) = loaded(64, 4, InnerKind::FingerRing, 500, 2);
    let k = *oracle.iter().nth(100).unwrap();
    let source = rep(&a, 1);
    let (got, trace) = a.range_search(source, k, k).unwrap();
    let (_, lookup) = a.exact_search(source, k).unwrap();
    assert_eq!(got, vec![k]);
    assert_eq!(trace.skeleton_hops(), lookup.skeleton_hops());
    assert!(trace.total() >= lookup.total());
}

#[test]
fn three_cluster_range_takes_two_successor_hops() {
    let a = art(64, 4, InnerKind::DirectOracle, 2);
    let lo = a.cluster(20).unwrap().key_range.0;
    let hi = a.cluster(22).unwrap().key_range.1;
    let source = rep(&a, 40);
    let (_, trace) = a.range_search(source, lo, hi).unwrap();
    let (_, lookup) = a.exact_search(source, lo).unwrap();
    assert_eq!(trace.skeleton_hops(), lookup.skeleton_hops() + 2);
    let span = a.universe().peer_span() as u32;
    // Every peer of the three clusters is visited once.
    assert_eq!(trace.intra_hops(), lookup.intra_hops() + 3 * (span - 1));
}

#[test]
fn join_and_leave() {
    let mut a = art(1024, 4, InnerKind::FingerRing, 3);
    let before = a.cluster(7).unwrap().clone();
    let entrance = a.cluster(7).unwrap().inner.directory().slots()[2].id;
    let (lo, _) = before.key_range;
    let (id, trace) = a.join_peer(entrance, lo + 40).unwrap();
    assert_eq!(trace.skeleton_hops(), 0);
    assert!(trace.maintenance >= 1);
    assert_eq!(a.cluster(7).unwrap().peer_count(), before.peer_count() + 1);
    assert_eq!(a.peer_cluster(id), Ok(7));
    a.leave_peer(id).unwrap();
    assert_eq!(a.cluster(7).unwrap().inner, before.inner);
    assert_eq!(a.peer_cluster(id), Err(ArtError::UnknownPeer(id)));

    let far = a.cluster(900).unwrap().key_range.0 + 3;
    let (id, trace) = a.join_peer(entrance, far).unwrap();
    assert_eq!(a.peer_cluster(id), Ok(900));
    assert!(trace.skeleton_hops() >= 1);
}

#[test]
fn representative_reelection() {
    let mut a = art(64, 4, InnerKind::FingerRing, 3);
    let first = rep(&a, 9);
    let second = a.cluster(9).unwrap().inner.directory().slots()[1].id;
    let third = a.cluster(9).unwrap().inner.directory().slots()[2].id;
    a.leave_peer(third).unwrap();
    assert_eq!(rep(&a, 9), first);
    a.leave_peer(first).unwrap();
    assert_eq!(rep(&a, 9), second);
    while a.cluster(9).unwrap().peer_count() > 1 {
        let last = a.cluster(9).unwrap().inner.directory().slots().last().unwrap().id;
        a.leave_peer(last).unwrap();
    }
    let only = rep(&a, 9);
    assert_eq!(
        a.leave_peer(only).unwrap_err(),
        ArtError::Inner(InnerError::LastPeerInCluster(only))
    );
}

#[test]
fn failing_representative_keeps_cluster_routable() {
    let mut a = art(64, 4, InnerKind::FingerRing, 3);
    while a.cluster(12).unwrap().peer_count() > 3 {
        let last = a.cluster(12).unwrap().inner.directory().slots().last().unwrap().id;
        a.leave_peer(last).unwrap();
    }
    let old = rep(&a, 12);
    let event = a.fail_peer(old).unwrap();
    assert!(event.representative_changed);
    assert!(!event.skeleton_break);
    let new = rep(&a, 12);
    assert_ne!(new, old);
    let k = a.cluster(12).unwrap().key_range.0;
    let (peer, _) = a.exact_search(rep(&a, 50), k).unwrap();
    assert_eq!(peer, new);
    assert_eq!(a.fail_peer(old).unwrap_err(), ArtError::UnknownPeer(old));
}

fn kill_cluster(a: &mut ArtSkeleton, id: ClusterId) {
    let peers: Vec<PeerId> = a.cluster(id).unwrap().inner.directory().slots().iter().map(|s| s.id).collect();
    let events: Vec<FailEvent> = peers.into_iter().map(|p| a.fail_peer(p).unwrap()).collect();
    assert!(events.last().unwrap().skeleton_break);
}

#[test]
fn dead_spine_entries_are_resampled() {
    let mut a = art(64, 2, InnerKind::DirectOracle, 21);
    // Level 2 holds clusters 4..=7.
    for dead in [4, 5, 6] {
        kill_cluster(&mut a, dead);
    }
    assert_eq!(a.rsi_resample(30, 2), Ok(7));
    assert_eq!(a.cluster(30).unwrap().rsi.entries[2], 7);
    kill_cluster(&mut a, 7);
    assert_eq!(a.rsi_resample(30, 2), Err(ArtError::LevelExhausted(2)));
    assert_eq!(
        a.art_lookup(30, 6).unwrap_err(),
        ArtError::ClusterDown(6)
    );
}

#[test]
fn lookup_survives_dead_spine_target() {
    let mut a = art(1024, 4, InnerKind::DirectOracle, 5);
    let source = 600;
    let level = 4;
    let dead = a.cluster(source).unwrap().rsi.entries[level];
    kill_cluster(&mut a, dead);
    let target = (a.geometry().level_start_label(level).0..)
        .find(|&t| t != dead && a.geometry().collection_index(level, Label(t)).unwrap()
            != a.geometry().collection_index(level, Label(dead)).unwrap())
        .unwrap();
    let (reached, trace) = a.art_lookup(source, target).unwrap();
    assert_eq!(reached, target);
    assert!(trace.retries >= 1);
    assert_eq!(trace.dead_rsi, vec![(source, level)]);
    assert!(trace.is_connected());
    a.repair(&trace).unwrap();
    let (reached, trace) = a.art_lookup(source, target).unwrap();
    assert_eq!(reached, target);
    assert_eq!(trace.retries, 0);
    let entry = a.cluster(source).unwrap().rsi.entries[level];
    assert_eq!(a.geometry().level_of_label(Label(entry)).unwrap(), level);
}

#[test]
fn routing_state_within_budget() {
    for (n, b) in [(256u64, 4u64), (1024, 4), (4096, 2), (1 << 14, 4)] {
        let a = art(n, b, InnerKind::DirectOracle, 1);
        let h = a.height() as f64;
        let nf = n as f64;
        let bound = f64::max(8.0, 2.0 * nf.powf(0.25) / nf.log2() + h);
        let max = a.max_routing_entries();
        assert!(max <= bound, "n={n} b={b}: {max} > {bound}");
        assert!(max >= h);
    }
}

#[test]
fn snapshot_ignores_membership_and_data() {
    let mut a = art(256, 4, InnerKind::FingerRing, 17);
    let before = a.snapshot();
    assert!(before.starts_with("art-skeleton v1\nclusters 256 fanout 4 c 1 seed 17"));
    assert_eq!(before.lines().filter(|l| l.starts_with("cluster ")).count(), 256);
    let entrance = rep(&a, 1);
    let mut joined = Vec::new();
    for i in 0..200 {
        let k = (i * 7919) % a.universe().max_key();
        joined.push(a.join_peer(entrance, k).unwrap().0);
        a.insert_key(entrance, k).unwrap();
    }
    for p in joined.into_iter().step_by(2) {
        a.leave_peer(p).unwrap();
    }
    assert_eq!(a.snapshot(), before);
}

#[test]
fn snapshot_is_stable() {
    let a = art(11, 2, InnerKind::DirectOracle, 1);
    let text = a.snapshot();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some(SNAPSHOT_VERSION));
    assert_eq!(
        lines.next(),
        Some("clusters 11 fanout 2 c 1 seed 1 universe 396 peer_span 6 height 4")
    );
    assert_eq!(text, art(11, 2, InnerKind::FingerRing, 1).snapshot());
}

#[derive(Debug, Clone)]
enum Op {
    Insert(u64, u64),
    Delete(u64, u64),
    Join(u64, u64),
    Leave(u64),
    Range(u64, u64, u64),
}

fn op() -> impl Strategy<Value = Op> {
    prop_oneof![
        (any::<u64>(), any::<u64>()).prop_map(|(p, k)| Op::Insert(p, k)),
        (any::<u64>(), any::<u64>()).prop_map(|(p, k)| Op::Delete(p, k)),
        (any::<u64>(), any::<u64>()).prop_map(|(p, k)| Op::Join(p, k)),
        any::<u64>().prop_map(Op::Leave),
        (any::<u64>(), any::<u64>(), any::<u64>()).prop_map(|(p, a, z)| Op::Range(p, a, z)),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn operations_agree_with_flat_oracle(
        n in 1u64..80,
        wide in any::<bool>(),
        direct in any::<bool>(),
        seed in any::<u64>(),
        ops in proptest::collection::vec(op(), 1..60),
    ) {
        let b = if wide { 4 } else { 2 };
        let inner = if direct { InnerKind::DirectOracle } else { InnerKind::FingerRing };
        let mut a = art(n, b, inner, seed);
        let skeleton = a.snapshot();
        let u = a.universe().max_key();
        let mut oracle = BTreeSet::new();
        for op in ops {
            let peers: Vec<PeerId> = a.live_peers().collect();
            let pick = |p: u64| peers[(p % peers.len() as u64) as usize];
            match op {
                Op::Insert(p, k) => {
                    let k = k % u;
                    prop_assert_eq!(a.insert_key(pick(p), k).unwrap().0, oracle.insert(k));
                }
                Op::Delete(p, k) => {
                    let k = k % u;
                    prop_assert_eq!(a.delete_key(pick(p), k).unwrap().0, oracle.remove(&k));
                }
                Op::Join(p, k) => {
                    let before = a.total_peers();
                    if a.join_peer(pick(p), k % u).is_ok() {
                        prop_assert_eq!(a.total_peers(), before + 1);
                    }
                }
                Op::Leave(p) => {
                    let _ = a.leave_peer(pick(p));
                }
                Op::Range(p, x, y) => {
                    let (lo, hi) = ((x % u).min(y % u), (x % u).max(y % u));
                    let (got, trace) = a.range_search(pick(p), lo, hi).unwrap();
                    let want: Vec<Key> = oracle.range(lo..=hi).copied().collect();
                    prop_assert_eq!(got, want);
                    prop_assert!(trace.is_connected());
                }
            }
        }
        prop_assert_eq!(a.snapshot(), skeleton);
        prop_assert_eq!(a.stored_keys().collect::<BTreeSet<_>>(), oracle);
        let peers: Vec<PeerId> = a.live_peers().collect();
        for k in (0..u).step_by((u / 97).max(1) as usize) {
            let (peer, _) = a.exact_search(peers[(k % peers.len() as u64) as usize], k).unwrap();
            prop_assert_eq!(peer, flat_owner(&a, k));
        }
    }
}
