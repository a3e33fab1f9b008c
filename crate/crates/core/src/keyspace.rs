//! Key universe partitioning and workload key generation.
//!
//! Keys are integers in `[0, U)`. Peer `i` (1-based) covers the `S` keys
//! `[(i-1)S, iS - 1]` and cluster `i'` covers the `S^2` keys
//! `[(i'-1)S^2, i'S^2 - 1]`, where `S = ceil(ln n)` for a deployment sized
//! for `n` keys. A fresh cluster therefore starts with exactly `S` peers.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution, Normal};
use thiserror::Error;

pub type Key = u64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KeyError {
    #[error("key {key} is outside the universe [0, {max_key})")]
    KeyOutOfUniverse { key: Key, max_key: u64 },
    #[error("invalid key universe: {0}")]
    InvalidUniverse(String),
    #[error("invalid distribution parameters: {0}")]
    InvalidDistributionParameters(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct KeyUniverse {
    max_key: u64,
    n: u64,
    peer_span: u64,
}

impl KeyUniverse {
    /// Universe `[0, max_key)` for a deployment sized for `n` keys.
    pub fn new(max_key: u64, n: u64) -> Result<Self, KeyError> {
        if max_key == 0 || n == 0 {
            return Err(KeyError::InvalidUniverse(format!(
                "max_key={max_key}, n={n}"
            )));
        }
        let peer_span = ((n as f64).ln().ceil() as u64).max(1);
        Ok(KeyUniverse {
            max_key,
            n,
            peer_span,
        })
    }

    /// The self-consistent universe with exactly `n_clusters` clusters:
    /// `U = n = n_clusters * S^2` with `S = ceil(ln U)`.
    pub fn for_clusters(n_clusters: u64) -> Result<Self, KeyError> {
        if n_clusters == 0 {
            return Err(KeyError::InvalidUniverse("zero clusters".into()));
        }
        let mut span = 1u64;
        for _ in 0..64 {
            let universe = n_clusters
                .checked_mul(span * span)
                .ok_or_else(|| KeyError::InvalidUniverse("universe overflows".into()))?;
            let next = ((universe as f64).ln().ceil() as u64).max(1);
            if next == span {
                return KeyUniverse::new(universe, universe);
            }
            span = next.max(span);
        }
        Err(KeyError::InvalidUniverse(format!(
            "no stable peer span for {n_clusters} clusters"
        )))
    }

    pub fn max_key(&self) -> u64 {
        self.max_key
    }

    pub fn sized_for(&self) -> u64 {
        self.n
    }

    /// `S`: keys per peer, and peers per cluster at initialization.
    pub fn peer_span(&self) -> u64 {
        self.peer_span
    }

    pub fn cluster_span(&self) -> u64 {
        self.peer_span * self.peer_span
    }

    pub fn peer_count(&self) -> u64 {
        self.max_key.div_ceil(self.peer_span)
    }

    pub fn cluster_count(&self) -> u64 {
        self.max_key.div_ceil(self.cluster_span())
    }

    pub fn peer_for_key(&self, key: Key) -> Result<u64, KeyError> {
        self.check(key)?;
        Ok(key / self.peer_span + 1)
    }

    pub fn cluster_for_key(&self, key: Key) -> Result<u64, KeyError> {
        self.check(key)?;
        Ok(key / self.cluster_span() + 1)
    }

    /// Inclusive key range of cluster `id` (1-based), clipped to the universe.
    pub fn cluster_keys(&self, id: u64) -> (Key, Key) {
        let span = self.cluster_span();
        let lo = (id - 1) * span;
        (lo, (lo + span - 1).min(self.max_key - 1))
    }

    pub fn check(&self, key: Key) -> Result<(), KeyError> {
        if key < self.max_key {
            Ok(())
        } else {
            Err(KeyError::KeyOutOfUniverse {
                key,
                max_key: self.max_key,
            })
        }
    }
}

/// Width of a benchmark range query: `floor(U / peers) * alpha`.
pub fn range_width(max_key: u64, total_peers: u64, alpha: u64) -> u64 {
    (max_key / total_peers.max(1)) * alpha
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DistributionKind {
    Uniform,
    /// Normal with mean and standard deviation given as fractions of the
    /// universe, truncated to it.
    Normal { mean: f64, std_dev: f64 },
    /// Beta(alpha, beta) scaled by the universe.
    Beta { alpha: f64, beta: f64 },
    /// Bounded Pareto over `[1, U]` with density proportional to `x^-exponent`.
    PowerLaw { exponent: f64 },
}

impl DistributionKind {
    pub fn name(&self) -> &'static str {
        match self {
            DistributionKind::Uniform => "uniform",
            DistributionKind::Normal { .. } => "normal",
            DistributionKind::Beta { .. } => "beta",
            DistributionKind::PowerLaw { .. } => "power-law",
        }
    }

    /// Kind by name with its default parameters.
    pub fn by_name(name: &str) -> Option<Self> {
        Some(match name {
            "uniform" => DistributionKind::Uniform,
            "normal" => DistributionKind::Normal {
                mean: 0.5,
                std_dev: 0.125,
            },
            "beta" => DistributionKind::Beta {
                alpha: 2.0,
                beta: 2.0,
            },
            "power-law" => DistributionKind::PowerLaw { exponent: 2.0 },
            _ => return None,
        })
    }

    /// Same kind with its real parameters replaced, in declaration order.
    pub fn with_params(&self, params: &[f64]) -> Result<Self, KeyError> {
        let wrong = |want: usize| {
            KeyError::InvalidDistributionParameters(format!(
                "{} takes {want} parameters, got {}",
                self.name(),
                params.len()
            ))
        };
        let kind = match (self, params) {
            (DistributionKind::Uniform, []) => DistributionKind::Uniform,
            (DistributionKind::Uniform, _) => return Err(wrong(0)),
            (DistributionKind::Normal { .. }, &[mean, std_dev]) => {
                DistributionKind::Normal { mean, std_dev }
            }
            (DistributionKind::Normal { .. }, _) => return Err(wrong(2)),
            (DistributionKind::Beta { .. }, &[alpha, beta]) => DistributionKind::Beta { alpha, beta },
            (DistributionKind::Beta { .. }, _) => return Err(wrong(2)),
            (DistributionKind::PowerLaw { .. }, &[exponent]) => {
                DistributionKind::PowerLaw { exponent }
            }
            (DistributionKind::PowerLaw { .. }, _) => return Err(wrong(1)),
        };
        kind.validate()?;
        Ok(kind)
    }

    pub fn params(&self) -> Vec<f64> {
        match *self {
            DistributionKind::Uniform => vec![],
            DistributionKind::Normal { mean, std_dev } => vec![mean, std_dev],
            DistributionKind::Beta { alpha, beta } => vec![alpha, beta],
            DistributionKind::PowerLaw { exponent } => vec![exponent],
        }
    }

    pub fn validate(&self) -> Result<(), KeyError> {
        let bad = |msg: String| Err(KeyError::InvalidDistributionParameters(msg));
        match *self {
            DistributionKind::Uniform => Ok(()),
            DistributionKind::Normal { mean, std_dev } => {
                if !(0.0..=1.0).contains(&mean) || !(std_dev > 0.0 && std_dev.is_finite()) {
                    bad(format!("normal needs mean in [0,1] and sd > 0, got {mean}, {std_dev}"))
                } else {
                    Ok(())
                }
            }
            DistributionKind::Beta { alpha, beta } => {
                if alpha > 0.0 && beta > 0.0 && alpha.is_finite() && beta.is_finite() {
                    Ok(())
                } else {
                    bad(format!("beta needs alpha, beta > 0, got {alpha}, {beta}"))
                }
            }
            DistributionKind::PowerLaw { exponent } => {
                if exponent > 1.0 && exponent.is_finite() {
                    Ok(())
                } else {
                    bad(format!("power-law needs exponent > 1, got {exponent}"))
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistributionSpec {
    pub kind: DistributionKind,
    pub seed: u64,
}

impl DistributionSpec {
    pub fn new(kind: DistributionKind, seed: u64) -> Result<Self, KeyError> {
        kind.validate()?;
        Ok(DistributionSpec { kind, seed })
    }

    pub fn uniform(seed: u64) -> Self {
        DistributionSpec {
            kind: DistributionKind::Uniform,
            seed,
        }
    }
}

/// Random-access key generator: key `i` depends only on the spec, the
/// universe size, and `i`, so independent workloads never share RNG state.
#[derive(Debug, Clone)]
pub struct KeySampler {
    spec: DistributionSpec,
    max_key: u64,
    normal: Option<Normal<f64>>,
    beta: Option<Beta<f64>>,
}

impl KeySampler {
    pub fn new(spec: DistributionSpec, max_key: u64) -> Result<Self, KeyError> {
        spec.kind.validate()?;
        if max_key == 0 {
            return Err(KeyError::InvalidUniverse("empty universe".into()));
        }
        let invalid = |e: &dyn std::fmt::Display| KeyError::InvalidDistributionParameters(e.to_string());
        let (normal, beta) = match spec.kind {
            DistributionKind::Normal { mean, std_dev } => {
                let u = max_key as f64;
                (Some(Normal::new(mean * u, std_dev * u).map_err(|e| invalid(&e))?), None)
            }
            DistributionKind::Beta { alpha, beta } => {
                (None, Some(Beta::new(alpha, beta).map_err(|e| invalid(&e))?))
            }
            _ => (None, None),
        };
        Ok(KeySampler {
            spec,
            max_key,
            normal,
            beta,
        })
    }

    pub fn key_at(&self, index: u64) -> Key {
        let mut rng = ChaCha8Rng::seed_from_u64(self.spec.seed);
        rng.set_stream(index);
        let top = self.max_key - 1;
        match self.spec.kind {
            DistributionKind::Uniform => rng.random_range(0..self.max_key),
            DistributionKind::Normal { .. } => {
                let normal = self.normal.as_ref().expect("built in new");
                // Truncate by rejection; the tails outside [0, U) are thin
                // for any sensible parameters, but stay total regardless.
                for _ in 0..1_000 {
                    let x = normal.sample(&mut rng);
                    if x >= 0.0 && x < self.max_key as f64 {
                        return x as Key;
                    }
                }
                (normal.sample(&mut rng).max(0.0) as Key).min(top)
            }
            DistributionKind::Beta { .. } => {
                let x = self.beta.as_ref().expect("built in new").sample(&mut rng);
                ((x * self.max_key as f64) as Key).min(top)
            }
            DistributionKind::PowerLaw { exponent } => {
                let shape = exponent - 1.0;
                let u: f64 = rng.random();
                let upper = self.max_key as f64;
                // Inverse CDF of the Pareto law truncated to [1, U].
                let tail = 1.0 - upper.powf(-shape);
                let x = (1.0 - u * tail).powf(-1.0 / shape);
                ((x.floor() as Key).saturating_sub(1)).min(top)
            }
        }
    }
}

/// `count` keys in `[0, U)`, deterministic in `(spec, index)`.
pub fn sample_keys(
    spec: &DistributionSpec,
    universe: &KeyUniverse,
    count: usize,
) -> Result<Vec<Key>, KeyError> {
    let sampler = KeySampler::new(*spec, universe.max_key())?;
    Ok((0..count as u64).map(|i| sampler.key_at(i)).collect())
}
