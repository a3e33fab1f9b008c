//! Level Range Tree geometry.
//!
//! An LRT holds one node at level 0 and `b^(2^(i-1))` nodes at every level
//! `i >= 1`, where the fanout `b` is itself of the form `2^(2^j)`. The degree
//! of a level-`i` node equals the population of level `i` (and `b` for the
//! root), so level populations square from one level to the next and the
//! height stays `O(log log_b N)`.
//!
//! Nodes are labelled in level order starting from 1, left to right, with
//! consecutive labels inside a level. With that labelling every quantity
//! routing needs is integer arithmetic:
//!
//! * the left-most (spine) label of level `i` is `start(i) = start(i-1) + t(i-1)`,
//!   which is the `label(x) = label(father(x)) + b^(2^(i-2))` identity read
//!   along the left spine;
//! * the level of a label is found by walking the spine until the label falls
//!   short of the next start label;
//! * level `i` is partitioned into `t(i-1)` collections (one per parent) of
//!   `t(i)/t(i-1)` consecutive labels each.
//!
//! Nothing in this module allocates or mutates; it is the arithmetic skeleton
//! that the overlay and the simulator are built on.

use std::fmt;

use thiserror::Error;

/// Zero-based level index; level 0 holds only the root.
pub type Level = usize;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GeometryError {
    #[error("fanout {0} is not of the form 2^(2^j)")]
    InvalidFanout(u64),
    #[error("a tree needs at least one node")]
    EmptyTree,
    #[error("label {label} is out of range (tree of {node_count} nodes, level {level:?})")]
    LabelOutOfRange {
        label: u64,
        node_count: u64,
        level: Option<Level>,
    },
    #[error("collection {index} does not exist at level {level}")]
    InvalidCollection { level: Level, index: u64 },
}

/// Tree fanout `b`. The only way to obtain one is [`Fanout::new`], which
/// enforces `b = 2^(2^j)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Fanout(u64);

impl Fanout {
    pub fn new(b: u64) -> Result<Self, GeometryError> {
        // A power of two whose exponent is itself a power of two.
        if b >= 2 && b.is_power_of_two() && b.trailing_zeros().is_power_of_two() {
            Ok(Fanout(b))
        } else {
            Err(GeometryError::InvalidFanout(b))
        }
    }

    pub fn get(self) -> u64 {
        self.0
    }
}

impl fmt::Display for Fanout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// A level-order node label, 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Label(pub u64);

impl Label {
    pub fn get(self) -> u64 {
        self.0
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Level population. Populations grow doubly exponentially and stop fitting
/// in 64 bits after a handful of levels; past that point they are reported as
/// [`Population::Saturated`] instead of overflowing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Population {
    Exact(u64),
    Saturated,
}

impl Population {
    pub fn exact(self) -> Option<u64> {
        match self {
            Population::Exact(v) => Some(v),
            Population::Saturated => None,
        }
    }

    /// The population, clamped to `u64::MAX` when saturated.
    pub fn clamped(self) -> u64 {
        self.exact().unwrap_or(u64::MAX)
    }
}

/// `m`-th collection (1-based) of level `level`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CollectionRef {
    pub level: Level,
    pub index: u64,
}

/// The arithmetic shape of an LRT over `node_count` nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TreeGeometry {
    fanout: Fanout,
    node_count: u64,
}

impl TreeGeometry {
    pub fn new(fanout: Fanout, node_count: u64) -> Result<Self, GeometryError> {
        if node_count == 0 {
            return Err(GeometryError::EmptyTree);
        }
        Ok(TreeGeometry { fanout, node_count })
    }

    pub fn fanout(&self) -> Fanout {
        self.fanout
    }

    pub fn node_count(&self) -> u64 {
        self.node_count
    }

    /// Same fanout, different size. Used to re-root the geometry on a
    /// collection when routing recurses.
    pub fn with_node_count(&self, node_count: u64) -> Result<Self, GeometryError> {
        TreeGeometry::new(self.fanout, node_count)
    }

    /// `t(0) = 1`, `t(i) = b^(2^(i-1))`.
    pub fn level_population(&self, level: Level) -> Population {
        if level == 0 {
            return Population::Exact(1);
        }
        let exponent = match u32::try_from(level - 1)
            .ok()
            .and_then(|e| 1u32.checked_shl(e))
        {
            Some(e) => e,
            None => return Population::Saturated,
        };
        match self.fanout.0.checked_pow(exponent) {
            Some(v) => Population::Exact(v),
            None => Population::Saturated,
        }
    }

    /// Label of the left-most node of `level`. Saturates at `u64::MAX`.
    pub fn level_start_label(&self, level: Level) -> Label {
        let mut start = 1u64;
        for i in 0..level {
            match self.level_population(i) {
                Population::Exact(t) => start = start.saturating_add(t),
                Population::Saturated => return Label(u64::MAX),
            }
            if start == u64::MAX {
                break;
            }
        }
        Label(start)
    }

    /// Level containing `label`, found by walking the left spine until the
    /// label is smaller than the next level's start label.
    pub fn level_of_label(&self, label: Label) -> Result<Level, GeometryError> {
        self.check_label(label, None)?;
        let mut level = 0;
        let mut next_start = 2u64; // start(1)
        while label.0 >= next_start {
            level += 1;
            next_start = next_start.saturating_add(self.level_population(level).clamped());
        }
        Ok(level)
    }

    /// Number of collections at `level` (`t(level-1)`); level 0 has none.
    pub fn collection_count(&self, level: Level) -> Population {
        if level == 0 {
            Population::Exact(0)
        } else {
            self.level_population(level - 1)
        }
    }

    /// Size of every collection at `level`: the degree of a level `level-1`
    /// node, i.e. `b` for level 1 and `t(level-1)` beyond.
    pub fn collection_size(&self, level: Level) -> Population {
        match level {
            0 => Population::Exact(1),
            1 => Population::Exact(self.fanout.0),
            _ => self.level_population(level - 1),
        }
    }

    /// Collection of `label`, which must sit at `level`.
    pub fn collection_index(
        &self,
        level: Level,
        label: Label,
    ) -> Result<CollectionRef, GeometryError> {
        self.check_label(label, Some(level))?;
        let start = self.level_start_label(level).0;
        let next = self.level_start_label(level + 1).0;
        if level == 0 || label.0 < start || label.0 >= next {
            return Err(self.out_of_range(label, Some(level)));
        }
        let size = self.collection_size(level).clamped();
        Ok(CollectionRef {
            level,
            index: (label.0 - start) / size + 1,
        })
    }

    /// Inclusive first and last labels of a collection. Bounds are purely
    /// geometric: the last collection of the bottom level may extend past
    /// `node_count`.
    pub fn collection_bounds(
        &self,
        collection: CollectionRef,
    ) -> Result<(Label, Label), GeometryError> {
        let invalid = GeometryError::InvalidCollection {
            level: collection.level,
            index: collection.index,
        };
        if collection.level == 0 || collection.index == 0 {
            return Err(invalid);
        }
        let (Some(count), Some(size)) = (
            self.collection_count(collection.level).exact(),
            self.collection_size(collection.level).exact(),
        ) else {
            return Err(invalid);
        };
        if collection.index > count {
            return Err(invalid);
        }
        let start = self.level_start_label(collection.level).0;
        let first = (collection.index - 1)
            .checked_mul(size)
            .and_then(|o| start.checked_add(o))
            .ok_or_else(|| invalid.clone())?;
        let last = first.checked_add(size - 1).ok_or(invalid)?;
        Ok((Label(first), Label(last)))
    }

    /// Number of levels needed to hold `node_count` nodes.
    pub fn lrt_height(&self) -> usize {
        // node_count >= 1, so this cannot fail.
        self.level_of_label(Label(self.node_count))
            .expect("node_count is a valid label")
            + 1
    }

    /// Nodes actually present at `level` (the bottom level may be partial).
    pub fn populated_count(&self, level: Level) -> u64 {
        let start = self.level_start_label(level).0;
        if start > self.node_count {
            return 0;
        }
        let next = self.level_start_label(level + 1).0;
        next.min(self.node_count + 1) - start
    }

    /// Collections at `level` that hold at least one present node.
    pub fn populated_collections(&self, level: Level) -> u64 {
        let present = self.populated_count(level);
        if present == 0 || level == 0 {
            return 0;
        }
        present.div_ceil(self.collection_size(level).clamped())
    }

    /// Whether every collection of this tree has at most `b` members, which
    /// ends the nesting recursion.
    pub fn is_innermost(&self) -> bool {
        // Levels 1 and 2 have collections of exactly b nodes; level 3 and
        // deeper have t(i-1) >= b^2.
        self.lrt_height() <= 3
    }

    /// Size of the largest present collection: the largest sub-tree that
    /// routing may have to recurse into.
    pub fn largest_collection(&self) -> u64 {
        let height = self.lrt_height();
        (1..height)
            .map(|level| {
                let present = self.populated_count(level);
                self.collection_size(level).clamped().min(present)
            })
            .max()
            .unwrap_or(0)
    }

    /// Number of nested trees routing can pass through, counting this one:
    /// recurse on the largest collection until a tree is innermost.
    pub fn max_nesting_depth(&self) -> usize {
        let mut depth = 1;
        let mut current = *self;
        while !current.is_innermost() {
            let inner = current.largest_collection();
            current = current
                .with_node_count(inner)
                .expect("collections are non-empty");
            depth += 1;
        }
        depth
    }

    fn check_label(&self, label: Label, level: Option<Level>) -> Result<(), GeometryError> {
        if label.0 == 0 || label.0 > self.node_count {
            Err(self.out_of_range(label, level))
        } else {
            Ok(())
        }
    }

    fn out_of_range(&self, label: Label, level: Option<Level>) -> GeometryError {
        GeometryError::LabelOutOfRange {
            label: label.0,
            node_count: self.node_count,
            level,
        }
    }
}

/// Worst-case per-node second-layer routing state, `N^(1/4) / (log2 N)^c`.
pub fn routing_overhead_estimate(n: u64, c: u32) -> f64 {
    let n = n as f64;
    n.powf(0.25) / n.log2().powi(c as i32)
}

/// Asymptotic skeleton-hop budget `(log_b log2 N)^2`.
pub fn t1_hop_bound(n: u64, b: Fanout) -> f64 {
    let inner = (n as f64).log2();
    let levels = inner.log2() / (b.get() as f64).log2();
    levels * levels
}
