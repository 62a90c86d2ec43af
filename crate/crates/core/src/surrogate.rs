//! Surrogate series.
//!
//! Rank remapping keeps the temporal order of a series and swaps its marginal
//! distribution for a target one: the value with rank `k` (1-based, ascending,
//! ties broken by position) becomes the target quantile at `(k - 0.5) / T`.
//! Shuffling keeps the marginal and destroys the ordering.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par::Exec;
use crate::qgauss::{QGaussian, QGaussianParams};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum SurrogateSpec {
    RankRemap {
        target: QGaussianParams,
        /// Break ties randomly with this seed instead of by position.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tie_seed: Option<u64>,
    },
    Shuffle {
        seed: u64,
    },
}

impl SurrogateSpec {
    /// Short label used in output paths.
    pub fn label(&self) -> String {
        match self {
            SurrogateSpec::RankRemap { target, .. } => format!("remap-q{}", target.q),
            SurrogateSpec::Shuffle { seed } => format!("shuffle-s{seed}"),
        }
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        match *self {
            SurrogateSpec::RankRemap { target, tie_seed } => {
                let g = QGaussian::new(target)?;
                let order = match tie_seed {
                    None => rank_order(x),
                    Some(seed) => rank_order_random_ties(x, seed),
                };
                remap_with_order(x, &order, &g)
            }
            SurrogateSpec::Shuffle { seed } => Ok(shuffle(x, seed)),
        }
    }
}

/// Maps a 1-based rank out of `n` onto an output value.
pub trait RankTarget: Sync {
    fn value_at_rank(&self, rank: usize, n: usize) -> f64;
}

impl RankTarget for QGaussian {
    fn value_at_rank(&self, rank: usize, n: usize) -> f64 {
        self.quantile_unchecked((rank as f64 - 0.5) / n as f64)
    }
}

/// The empirical distribution of a sample, addressed by rank.
#[derive(Debug, Clone)]
pub struct EmpiricalTarget {
    sorted: Vec<f64>,
}

impl EmpiricalTarget {
    pub fn new(sample: &[f64]) -> Self {
        let mut sorted = sample.to_vec();
        sorted.sort_by(f64::total_cmp);
        EmpiricalTarget { sorted }
    }
}

impl RankTarget for EmpiricalTarget {
    /// Nearest order statistic at the same plotting position.
    fn value_at_rank(&self, rank: usize, n: usize) -> f64 {
        let m = self.sorted.len();
        let u = (rank as f64 - 0.5) / n as f64;
        let i = ((u * m as f64).floor() as usize).min(m - 1);
        self.sorted[i]
    }
}

/// Indices of `x` in ascending order, ties kept in original order.
pub fn rank_order(x: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    idx
}

/// Like [`rank_order`] but equal values are ordered by a seeded random key.
pub fn rank_order_random_ties(x: &[f64], seed: u64) -> Vec<usize> {
    use rand::RngCore;
    let mut r = rng::stream(seed);
    let keys: Vec<u64> = (0..x.len()).map(|_| r.next_u64()).collect();
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]).then(keys[a].cmp(&keys[b])).then(a.cmp(&b)));
    idx
}

fn remap_with_order<T: RankTarget>(x: &[f64], order: &[usize], target: &T) -> Result<Vec<f64>> {
    let n = x.len();
    if n < 2 {
        return Err(Error::Size(format!("rank remap needs at least 2 points, got {n}")));
    }
    let by_rank = Exec::auto().map_range(n, |k| target.value_at_rank(k + 1, n));
    let mut out = vec![0.0; n];
    for (k, &i) in order.iter().enumerate() {
        out[i] = by_rank[k];
    }
    Ok(out)
}

/// Replaces the marginal of `x` by the q-Gaussian `target`, keeping ranks.
pub fn rank_remap(x: &[f64], target: QGaussianParams) -> Result<Vec<f64>> {
    let g = QGaussian::new(target)?;
    remap_with_order(x, &rank_order(x), &g)
}

/// Rank remap onto an arbitrary [`RankTarget`].
pub fn rank_remap_onto<T: RankTarget>(x: &[f64], target: &T) -> Result<Vec<f64>> {
    remap_with_order(x, &rank_order(x), target)
}

/// Uniform random permutation of `x` (Fisher–Yates on a ChaCha8 stream).
pub fn shuffle(x: &[f64], seed: u64) -> Vec<f64> {
    let mut out = x.to_vec();
    rng::fisher_yates(&mut rng::stream(seed), &mut out);
    out
}

/// The permutation [`shuffle`] applies: `shuffle(x, seed)[i] == x[perm[i]]`.
pub fn shuffle_permutation(n: usize, seed: u64) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..n).collect();
    rng::fisher_yates(&mut rng::stream(seed), &mut idx);
    idx
}
