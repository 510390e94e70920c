use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::Points;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// How points are ordered before conditioning sets are chosen.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case", tag = "rule", content = "seed")]
pub enum OrderingRule {
    /// Ascending sum of coordinates; for one-dimensional points this is
    /// natural order.
    #[default]
    CoordinateSum,
    /// Uniformly random permutation from the given seed.
    Random(u64),
}

/// Point ordering and, for every ordered position, the positions of its
/// conditioning set.
#[derive(Clone, Debug, PartialEq)]
pub struct NeighborSets {
    /// position -> point index
    pub order: Vec<usize>,
    /// position -> earlier positions, nearest first
    pub neighbors: Vec<Vec<usize>>,
    pub m: usize,
}

impl NeighborSets {
    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }
}

/// Orders `points` and picks for each the `min(m, i)` nearest earlier
/// points; equal distances go to the earlier position.
pub fn build_neighbor_sets<T: Real>(
    points: &Points<T>,
    m: usize,
    rule: OrderingRule,
) -> Result<NeighborSets> {
    let n = points.len();
    if n > 1 && (m < 1 || m > n - 1) {
        return Err(Error::Contract(format!(
            "neighbor count m={m} outside 1..={} for {n} points",
            n - 1
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    match rule {
        OrderingRule::CoordinateSum => {
            let key = |i: usize| -> T { points.point(i).iter().copied().sum() };
            order.sort_by(|&i, &j| {
                key(i)
                    .partial_cmp(&key(j))
                    .unwrap_or(std::cmp::Ordering::Equal)
                    .then(i.cmp(&j))
            });
        }
        OrderingRule::Random(seed) => {
            order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        }
    }

    let mut neighbors = Vec::with_capacity(n);
    let mut cand: Vec<(T, usize)> = Vec::with_capacity(n);
    for pos in 0..n {
        let k = m.min(pos);
        cand.clear();
        cand.extend((0..pos).map(|q| (points.dist2(order[pos], order[q]), q)));
        let cmp = |a: &(T, usize), b: &(T, usize)| {
            a.0.partial_cmp(&b.0)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.1.cmp(&b.1))
        };
        if k < cand.len() && k > 0 {
            cand.select_nth_unstable_by(k - 1, cmp);
            cand.truncate(k);
        }
        cand.sort_by(cmp);
        neighbors.push(cand.iter().take(k).map(|&(_, q)| q).collect());
    }
    Ok(NeighborSets { order, neighbors, m })
}
