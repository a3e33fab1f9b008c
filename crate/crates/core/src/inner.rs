//! Peer organization inside one cluster-peer.
//!
//! A cluster owns a contiguous inclusive key range. Its live peers are kept
//! sorted by the start of their sub-range, and the sub-ranges tile the
//! cluster's range: peer `i` owns `[start_i, start_{i+1} - 1]`, the last peer
//! owns up to the cluster's upper bound. Two hop models sit on top of that
//! directory: [`FingerRing`], a Chord-style ring with power-of-two fingers,
//! and [`DirectOracle`], which reaches any peer in one message.

use std::fmt;

use thiserror::Error;

use crate::keyspace::Key;

pub type PeerId = u64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InnerError {
    #[error("cluster has no live peers")]
    EmptyCluster,
    #[error("key {key} is outside the cluster range [{lo}, {hi}]")]
    KeyOutsideCluster { key: Key, lo: Key, hi: Key },
    #[error("no room to place a new peer at key {0}")]
    DuplicatePeerPosition(Key),
    #[error("peer {0} is already a member")]
    DuplicatePeerId(PeerId),
    #[error("peer {0} is not a member")]
    UnknownPeer(PeerId),
    #[error("peer {0} is the last one in its cluster")]
    LastPeerInCluster(PeerId),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InnerKind {
    FingerRing,
    DirectOracle,
}

impl InnerKind {
    pub fn name(&self) -> &'static str {
        match self {
            InnerKind::FingerRing => "finger-ring",
            InnerKind::DirectOracle => "direct-oracle",
        }
    }

    pub fn by_name(name: &str) -> Option<Self> {
        match name {
            "finger-ring" => Some(InnerKind::FingerRing),
            "direct-oracle" => Some(InnerKind::DirectOracle),
            _ => None,
        }
    }
}

impl fmt::Display for InnerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PeerSlot {
    pub id: PeerId,
    pub start: Key,
    /// Stored keys, sorted and distinct.
    pub keys: Vec<Key>,
}

/// Sorted peer directory of one cluster. Pure bookkeeping, no hop counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PeerDirectory {
    lo: Key,
    hi: Key,
    slots: Vec<PeerSlot>,
}

impl PeerDirectory {
    pub fn new(lo: Key, hi: Key) -> Self {
        assert!(lo <= hi, "empty cluster range [{lo}, {hi}]");
        PeerDirectory {
            lo,
            hi,
            slots: Vec::new(),
        }
    }

    /// Directory with peers at the given sorted, distinct start keys; the
    /// first start must be `lo`.
    pub fn with_peers(lo: Key, hi: Key, peers: impl IntoIterator<Item = (PeerId, Key)>) -> Self {
        let slots: Vec<PeerSlot> = peers
            .into_iter()
            .map(|(id, start)| PeerSlot {
                id,
                start,
                keys: Vec::new(),
            })
            .collect();
        assert!(slots.first().is_none_or(|s| s.start == lo));
        assert!(slots.windows(2).all(|w| w[0].start < w[1].start));
        assert!(slots.last().is_none_or(|s| s.start <= hi));
        PeerDirectory { lo, hi, slots }
    }

    pub fn range(&self) -> (Key, Key) {
        (self.lo, self.hi)
    }

    pub fn slots(&self) -> &[PeerSlot] {
        &self.slots
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn key_count(&self) -> usize {
        self.slots.iter().map(|s| s.keys.len()).sum()
    }

    /// Inclusive sub-range owned by the peer at `pos`.
    pub fn sub_range(&self, pos: usize) -> (Key, Key) {
        let end = match self.slots.get(pos + 1) {
            Some(next) => next.start - 1,
            None => self.hi,
        };
        (self.slots[pos].start, end)
    }

    pub fn position_of(&self, id: PeerId) -> Option<usize> {
        self.slots.iter().position(|s| s.id == id)
    }

    fn check_key(&self, key: Key) -> Result<(), InnerError> {
        if key < self.lo || key > self.hi {
            return Err(InnerError::KeyOutsideCluster {
                key,
                lo: self.lo,
                hi: self.hi,
            });
        }
        Ok(())
    }

    /// Position of the peer responsible for `key`.
    pub fn owner(&self, key: Key) -> Result<usize, InnerError> {
        self.check_key(key)?;
        if self.slots.is_empty() {
            return Err(InnerError::EmptyCluster);
        }
        Ok(self.slots.partition_point(|s| s.start <= key) - 1)
    }

    /// Inserts a peer in front of the owner of `position`, taking the lower
    /// part of the owner's sub-range. The split falls on the owner's median
    /// stored key when that leaves both sides nonempty, otherwise on the
    /// midpoint of the sub-range. Returns the new peer's position.
    pub fn insert_peer(&mut self, id: PeerId, position: Key) -> Result<usize, InnerError> {
        self.check_key(position)?;
        if self.position_of(id).is_some() {
            return Err(InnerError::DuplicatePeerId(id));
        }
        if self.slots.is_empty() {
            self.slots.push(PeerSlot {
                id,
                start: self.lo,
                keys: Vec::new(),
            });
            return Ok(0);
        }
        let pos = self.owner(position)?;
        let (start, end) = self.sub_range(pos);
        if start == end {
            return Err(InnerError::DuplicatePeerPosition(position));
        }
        let owner = &mut self.slots[pos];
        let split = match owner.keys.get(owner.keys.len() / 2) {
            Some(&median) if median > start => median,
            _ => start + (end - start).div_ceil(2),
        };
        let cut = owner.keys.partition_point(|&k| k < split);
        let lower: Vec<Key> = owner.keys.drain(..cut).collect();
        owner.start = split;
        self.slots.insert(
            pos,
            PeerSlot {
                id,
                start,
                keys: lower,
            },
        );
        Ok(pos)
    }

    /// Removes a peer; its sub-range and keys merge into the successor, or
    /// into the predecessor when it is the last peer. With `keep_keys` unset
    /// the departing peer's keys are dropped instead. Removing the only peer
    /// empties the directory.
    pub fn remove_peer(&mut self, id: PeerId, keep_keys: bool) -> Result<PeerSlot, InnerError> {
        let pos = self.position_of(id).ok_or(InnerError::UnknownPeer(id))?;
        let gone = self.slots.remove(pos);
        if self.slots.is_empty() {
            return Ok(gone);
        }
        if pos < self.slots.len() {
            let succ = &mut self.slots[pos];
            succ.start = gone.start;
            if keep_keys {
                let mut keys = gone.keys.clone();
                keys.append(&mut succ.keys);
                succ.keys = keys;
            }
        } else if keep_keys {
            self.slots[pos - 1].keys.extend_from_slice(&gone.keys);
        }
        Ok(gone)
    }

    /// Stores `key` at its owner; returns the owner position and whether the
    /// key was new.
    pub fn insert_key(&mut self, key: Key) -> Result<(usize, bool), InnerError> {
        let pos = self.owner(key)?;
        let keys = &mut self.slots[pos].keys;
        match keys.binary_search(&key) {
            Ok(_) => Ok((pos, false)),
            Err(at) => {
                keys.insert(at, key);
                Ok((pos, true))
            }
        }
    }

    pub fn delete_key(&mut self, key: Key) -> Result<(usize, bool), InnerError> {
        let pos = self.owner(key)?;
        let keys = &mut self.slots[pos].keys;
        match keys.binary_search(&key) {
            Ok(at) => {
                keys.remove(at);
                Ok((pos, true))
            }
            Err(_) => Ok((pos, false)),
        }
    }

    pub fn contains_key(&self, key: Key) -> bool {
        self.owner(key)
            .map(|pos| self.slots[pos].keys.binary_search(&key).is_ok())
            .unwrap_or(false)
    }

    /// Evens out the stored keys of the peer at `pos` and its lighter
    /// neighbor by moving their shared boundary to the median of their
    /// combined keys. Returns false when no boundary move helps.
    pub fn balance_with_neighbor(&mut self, pos: usize) -> bool {
        let n = self.slots.len();
        if n < 2 {
            return false;
        }
        let neighbor = match (pos.checked_sub(1), (pos + 1 < n).then_some(pos + 1)) {
            (Some(a), Some(b)) => {
                if self.slots[a].keys.len() <= self.slots[b].keys.len() {
                    a
                } else {
                    b
                }
            }
            (Some(a), None) => a,
            (None, Some(b)) => b,
            (None, None) => return false,
        };
        let (left, right) = (pos.min(neighbor), pos.max(neighbor));
        let mut merged = self.slots[left].keys.clone();
        merged.extend_from_slice(&self.slots[right].keys);
        let left_start = self.slots[left].start;
        // The boundary must stay strictly inside the pair's joint range.
        let half = merged.len() / 2;
        let split = merged[half.min(merged.len().saturating_sub(1))..]
            .iter()
            .copied()
            .find(|&k| k > left_start);
        let Some(split) = split else {
            return false;
        };
        if split == self.slots[right].start {
            return false;
        }
        let cut = merged.partition_point(|&k| k < split);
        let upper = merged.split_off(cut);
        self.slots[left].keys = merged;
        self.slots[right].keys = upper;
        self.slots[right].start = split;
        true
    }
}

/// Hop-accounted interface every intra-cluster organization provides.
pub trait InnerOverlay {
    fn kind(&self) -> InnerKind;

    fn directory(&self) -> &PeerDirectory;

    fn directory_mut(&mut self) -> &mut PeerDirectory;

    /// Routes from the peer at position `from` to the owner of `key`.
    /// Returns the owner position and the positions visited after `from`,
    /// one per hop.
    fn route(&self, from: usize, key: Key) -> Result<(usize, Vec<usize>), InnerError>;

    /// Extra messages for finger or directory maintenance after the
    /// membership changed to `size` peers.
    fn repair_cost(&self, size: usize) -> u32;

    /// Owner of `key` and hops from the cluster's representative (its
    /// lowest-key peer).
    fn locate(&self, key: Key) -> Result<(PeerId, u32), InnerError> {
        self.directory().owner(key)?;
        let (pos, path) = self.route(0, key)?;
        Ok((self.directory().slots()[pos].id, path.len() as u32))
    }

    /// Owner of `key` and hops starting from peer `from`.
    fn locate_from(&self, from: PeerId, key: Key) -> Result<(PeerId, u32), InnerError> {
        let start = self
            .directory()
            .position_of(from)
            .ok_or(InnerError::UnknownPeer(from))?;
        let (pos, path) = self.route(start, key)?;
        Ok((self.directory().slots()[pos].id, path.len() as u32))
    }

    /// Adds peer `id` next to the owner of `position`. The cost covers
    /// locating the owner, the key handoff, and repair.
    fn add_peer(&mut self, id: PeerId, position: Key) -> Result<u32, InnerError> {
        if self.directory().is_empty() {
            self.directory_mut().insert_peer(id, position)?;
            return Ok(0);
        }
        let (_, path) = self.route(0, position)?;
        self.directory_mut().insert_peer(id, position)?;
        let size = self.directory().len();
        Ok(path.len() as u32 + 1 + self.repair_cost(size))
    }

    /// Graceful departure: the peer's keys move to its successor.
    fn remove_peer(&mut self, id: PeerId) -> Result<u32, InnerError> {
        let dir = self.directory();
        if dir.position_of(id).is_none() {
            return Err(InnerError::UnknownPeer(id));
        }
        if dir.len() == 1 {
            return Err(InnerError::LastPeerInCluster(id));
        }
        self.directory_mut().remove_peer(id, true)?;
        let size = self.directory().len();
        Ok(1 + self.repair_cost(size))
    }

    /// Abrupt failure: the neighbors absorb the range, the keys are lost.
    /// Unlike [`InnerOverlay::remove_peer`] this may empty the cluster.
    /// Returns the number of keys lost and the repair cost.
    fn fail_peer(&mut self, id: PeerId) -> Result<(usize, u32), InnerError> {
        let gone = self.directory_mut().remove_peer(id, false)?;
        let size = self.directory().len();
        let cost = if size == 0 { 0 } else { self.repair_cost(size) };
        Ok((gone.keys.len(), cost))
    }

    fn insert_key(&mut self, key: Key) -> Result<(PeerId, bool, u32), InnerError> {
        let (_, hops) = self.locate(key)?;
        let (pos, fresh) = self.directory_mut().insert_key(key)?;
        Ok((self.directory().slots()[pos].id, fresh, hops))
    }

    fn delete_key(&mut self, key: Key) -> Result<(PeerId, bool, u32), InnerError> {
        let (_, hops) = self.locate(key)?;
        let (pos, found) = self.directory_mut().delete_key(key)?;
        Ok((self.directory().slots()[pos].id, found, hops))
    }

    fn peer_count(&self) -> usize {
        self.directory().len()
    }

    fn key_count(&self) -> usize {
        self.directory().key_count()
    }
}

fn floor_log2(n: usize) -> u32 {
    if n <= 1 {
        0
    } else {
        usize::BITS - 1 - n.leading_zeros()
    }
}

/// Ring of peers ordered by sub-range start. Peer `p` keeps fingers to the
/// peers at positions `p + 2^j (mod B)` for `j = 0..=floor(log2 B)`; a lookup
/// forwards to the farthest finger that does not overshoot the key.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FingerRing {
    dir: PeerDirectory,
}

impl FingerRing {
    pub fn new(dir: PeerDirectory) -> Self {
        FingerRing { dir }
    }

    /// Finger positions of the peer at `pos`, nearest first.
    pub fn fingers(&self, pos: usize) -> Vec<usize> {
        let b = self.dir.len();
        (0..=floor_log2(b))
            .map(|j| (pos + (1usize << j)) % b)
            .collect()
    }
}

impl InnerOverlay for FingerRing {
    fn kind(&self) -> InnerKind {
        InnerKind::FingerRing
    }

    fn directory(&self) -> &PeerDirectory {
        &self.dir
    }

    fn directory_mut(&mut self) -> &mut PeerDirectory {
        &mut self.dir
    }

    fn route(&self, from: usize, key: Key) -> Result<(usize, Vec<usize>), InnerError> {
        let target = self.dir.owner(key)?;
        let b = self.dir.len();
        let span = self.dir.hi - self.dir.lo + 1;
        // Clockwise key distance along the ring of sub-ranges.
        let dist = |a: Key, z: Key| (z + span - a) % span;
        let mut at = from;
        let mut path = Vec::new();
        while at != target {
            let here = self.dir.slots[at].start;
            let want = dist(here, key);
            let next = self
                .fingers(at)
                .into_iter()
                .filter(|&f| f != at && dist(here, self.dir.slots[f].start) <= want)
                .max_by_key(|&f| dist(here, self.dir.slots[f].start))
                .expect("the successor finger never overshoots");
            at = next;
            path.push(at);
            debug_assert!(path.len() <= b);
        }
        Ok((at, path))
    }

    fn repair_cost(&self, size: usize) -> u32 {
        floor_log2(size)
    }
}

/// Every peer knows the whole directory: one hop to any other peer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirectOracle {
    dir: PeerDirectory,
}

impl DirectOracle {
    pub fn new(dir: PeerDirectory) -> Self {
        DirectOracle { dir }
    }
}

impl InnerOverlay for DirectOracle {
    fn kind(&self) -> InnerKind {
        InnerKind::DirectOracle
    }

    fn directory(&self) -> &PeerDirectory {
        &self.dir
    }

    fn directory_mut(&mut self) -> &mut PeerDirectory {
        &mut self.dir
    }

    fn route(&self, from: usize, key: Key) -> Result<(usize, Vec<usize>), InnerError> {
        let target = self.dir.owner(key)?;
        let path = if target == from { vec![] } else { vec![target] };
        Ok((target, path))
    }

    fn repair_cost(&self, _size: usize) -> u32 {
        0
    }
}

/// Either inner organization, chosen at build time.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Inner {
    Ring(FingerRing),
    Direct(DirectOracle),
}

impl Inner {
    pub fn new(kind: InnerKind, dir: PeerDirectory) -> Self {
        match kind {
            InnerKind::FingerRing => Inner::Ring(FingerRing::new(dir)),
            InnerKind::DirectOracle => Inner::Direct(DirectOracle::new(dir)),
        }
    }

    fn as_dyn(&self) -> &dyn InnerOverlay {
        match self {
            Inner::Ring(r) => r,
            Inner::Direct(d) => d,
        }
    }
}

impl InnerOverlay for Inner {
    fn kind(&self) -> InnerKind {
        self.as_dyn().kind()
    }

    fn directory(&self) -> &PeerDirectory {
        self.as_dyn().directory()
    }

    fn directory_mut(&mut self) -> &mut PeerDirectory {
        match self {
            Inner::Ring(r) => r.directory_mut(),
            Inner::Direct(d) => d.directory_mut(),
        }
    }

    fn route(&self, from: usize, key: Key) -> Result<(usize, Vec<usize>), InnerError> {
        self.as_dyn().route(from, key)
    }

    fn repair_cost(&self, size: usize) -> u32 {
        self.as_dyn().repair_cost(size)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn evenly(kind: InnerKind, peers: u64, width: u64) -> Inner {
        let dir = PeerDirectory::with_peers(0, peers * width - 1, (0..peers).map(|i| (i + 1, i * width)));
        Inner::new(kind, dir)
    }

    fn linear_owner(dir: &PeerDirectory, key: Key) -> PeerId {
        (0..dir.len())
            .find(|&p| {
                let (a, z) = dir.sub_range(p);
                a <= key && key <= z
            })
            .map(|p| dir.slots()[p].id)
            .unwrap()
    }

    fn assert_tiles(dir: &PeerDirectory) {
        let (lo, hi) = dir.range();
        let mut next = lo;
        for p in 0..dir.len() {
            let (a, z) = dir.sub_range(p);
            assert_eq!(a, next);
            assert!(a <= z);
            assert!(dir.slots()[p].keys.iter().all(|&k| a <= k && k <= z));
            next = z + 1;
        }
        assert_eq!(next, hi + 1);
    }

    #[test]
    fn direct_oracle_costs_one_hop() {
        let inner = evenly(InnerKind::DirectOracle, 8, 10);
        assert_eq!(inner.locate(0), Ok((1, 0)));
        assert_eq!(inner.locate(35), Ok((4, 1)));
        assert_eq!(inner.locate_from(4, 35), Ok((4, 0)));
    }

    #[test]
    fn single_peer_is_free() {
        for kind in [InnerKind::FingerRing, InnerKind::DirectOracle] {
            let inner = evenly(kind, 1, 50);
            for k in 0..50 {
                assert_eq!(inner.locate(k), Ok((1, 0)));
            }
        }
    }

    #[test]
    fn ring_of_sixteen_within_five_hops() {
        let inner = evenly(InnerKind::FingerRing, 16, 3);
        let mut worst = 0;
        for from in 1..=16 {
            for k in 0..48 {
                let (id, hops) = inner.locate_from(from, k).unwrap();
                assert_eq!(id, k / 3 + 1);
                worst = worst.max(hops);
            }
        }
        assert!(worst <= 5, "{worst}");
        assert_eq!(worst, 4);
    }

    #[test]
    fn ring_hop_ceiling_exhaustive_small_sizes() {
        for b in 1..=64u64 {
            let inner = evenly(InnerKind::FingerRing, b, 2);
            let ceiling = floor_log2(b as usize) + 1;
            for from in 1..=b {
                for k in 0..2 * b {
                    let (_, hops) = inner.locate_from(from, k).unwrap();
                    assert!(hops <= ceiling, "b={b} from={from} k={k} hops={hops}");
                }
            }
        }
    }

    #[test]
    fn ring_hop_ceiling_sampled_large_sizes() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for b in [65u64, 100, 255, 256, 1000, 2047, 4095, 4096] {
            let inner = evenly(InnerKind::FingerRing, b, 3);
            let ceiling = floor_log2(b as usize) + 1;
            for _ in 0..2000 {
                let from = rng.random_range(1..=b);
                let k = rng.random_range(0..3 * b);
                let (id, hops) = inner.locate_from(from, k).unwrap();
                assert_eq!(id, k / 3 + 1);
                assert!(hops <= ceiling, "b={b} hops={hops}");
            }
        }
    }

    #[test]
    fn errors() {
        let mut empty = Inner::new(InnerKind::FingerRing, PeerDirectory::new(0, 9));
        assert_eq!(empty.locate(3), Err(InnerError::EmptyCluster));
        assert_eq!(empty.add_peer(7, 4), Ok(0));
        assert_eq!(empty.peer_count(), 1);
        assert_eq!(empty.locate(9), Ok((7, 0)));
        assert_eq!(
            empty.locate(10),
            Err(InnerError::KeyOutsideCluster { key: 10, lo: 0, hi: 9 })
        );
        assert_eq!(empty.remove_peer(3), Err(InnerError::UnknownPeer(3)));
        assert_eq!(empty.remove_peer(7), Err(InnerError::LastPeerInCluster(7)));
        assert_eq!(empty.add_peer(7, 2), Err(InnerError::DuplicatePeerId(7)));

        let mut tight = evenly(InnerKind::FingerRing, 2, 1);
        assert_eq!(tight.add_peer(9, 1), Err(InnerError::DuplicatePeerPosition(1)));
    }

    #[test]
    fn remove_from_pair_leaves_full_range() {
        let mut inner = evenly(InnerKind::FingerRing, 2, 5);
        inner.insert_key(7).unwrap();
        inner.remove_peer(2).unwrap();
        assert_eq!(inner.peer_count(), 1);
        assert_eq!(inner.directory().sub_range(0), (0, 9));
        assert!(inner.directory().contains_key(7));
    }

    #[test]
    fn add_then_remove_restores_assignment() {
        let mut inner = evenly(InnerKind::FingerRing, 8, 100);
        for k in (0..800).step_by(7) {
            inner.insert_key(k).unwrap();
        }
        let before = inner.clone();
        let cost = inner.add_peer(99, 345).unwrap();
        assert!(cost >= 1);
        assert_eq!(inner.peer_count(), 9);
        assert_tiles(inner.directory());
        for k in 0..800 {
            assert_eq!(inner.locate(k).unwrap().0, linear_owner(inner.directory(), k));
        }
        inner.remove_peer(99).unwrap();
        assert_eq!(inner, before);
    }

    #[test]
    fn remove_middle_of_eight() {
        let mut inner = evenly(InnerKind::FingerRing, 8, 10);
        inner.remove_peer(4).unwrap();
        assert_tiles(inner.directory());
        for k in 0..80 {
            let (id, hops) = inner.locate(k).unwrap();
            assert_eq!(id, linear_owner(inner.directory(), k));
            assert!(hops <= 3);
        }
    }

    #[test]
    fn failure_drops_keys_and_may_empty() {
        let mut inner = evenly(InnerKind::DirectOracle, 2, 5);
        inner.insert_key(1).unwrap();
        inner.insert_key(8).unwrap();
        assert_eq!(inner.fail_peer(1).unwrap().0, 1);
        assert_eq!(inner.key_count(), 1);
        assert_eq!(inner.locate(1), Ok((2, 0)));
        inner.fail_peer(2).unwrap();
        assert_eq!(inner.locate(1), Err(InnerError::EmptyCluster));
    }

    #[test]
    fn balancing_moves_boundary_to_median() {
        let mut dir = PeerDirectory::with_peers(0, 99, [(1, 0), (2, 50)]);
        for k in 0..20 {
            dir.insert_key(k).unwrap();
        }
        assert!(dir.balance_with_neighbor(0));
        assert_eq!(dir.slots()[0].keys.len(), 10);
        assert_eq!(dir.slots()[1].keys.len(), 10);
        assert_tiles(&dir);
        assert!(!dir.balance_with_neighbor(0));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        #[derive(Debug, Clone)]
        enum Op {
            Add(Key),
            Remove(usize),
            Insert(Key),
            Delete(Key),
            Balance(usize),
        }

        fn op() -> impl Strategy<Value = Op> {
            prop_oneof![
                (0u64..1000).prop_map(Op::Add),
                (0usize..64).prop_map(Op::Remove),
                (0u64..1000).prop_map(Op::Insert),
                (0u64..1000).prop_map(Op::Delete),
                (0usize..64).prop_map(Op::Balance),
            ]
        }

        proptest! {
            #[test]
            fn directory_tracks_linear_scan(
                ring in any::<bool>(),
                ops in proptest::collection::vec(op(), 1..120),
            ) {
                let kind = if ring { InnerKind::FingerRing } else { InnerKind::DirectOracle };
                let mut inner = Inner::new(kind, PeerDirectory::new(0, 999));
                inner.add_peer(1, 0).unwrap();
                let mut next_id = 2;
                let mut stored = std::collections::BTreeSet::new();
                for op in ops {
                    match op {
                        Op::Add(k) => {
                            if inner.add_peer(next_id, k).is_ok() {
                                next_id += 1;
                            }
                        }
                        Op::Remove(i) => {
                            let id = inner.directory().slots()[i % inner.peer_count()].id;
                            let _ = inner.remove_peer(id);
                        }
                        Op::Insert(k) => {
                            let fresh = inner.insert_key(k).unwrap().1;
                            prop_assert_eq!(fresh, stored.insert(k));
                        }
                        Op::Delete(k) => {
                            let found = inner.delete_key(k).unwrap().1;
                            prop_assert_eq!(found, stored.remove(&k));
                        }
                        Op::Balance(i) => {
                            let n = inner.peer_count();
                            inner.directory_mut().balance_with_neighbor(i % n);
                        }
                    }
                    assert_tiles(inner.directory());
                    prop_assert_eq!(inner.key_count(), stored.len());
                }
                let b = inner.peer_count();
                for k in (0..1000).step_by(13) {
                    let (id, hops) = inner.locate(k).unwrap();
                    prop_assert_eq!(id, linear_owner(inner.directory(), k));
                    prop_assert!(hops <= floor_log2(b) + 1);
                    prop_assert_eq!(inner.directory().contains_key(k), stored.contains(&k));
                }
            }
        }
    }
}
