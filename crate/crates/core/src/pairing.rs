//! Self-generated together constraints.
//!
//! Within a mini-batch, every anchor is paired with the partners that are
//! closest in masked tag space while being far apart in prediction space:
//! `J(i, j) = gamma * |g(t_i) - g(t_j)|_1 - |p_i - p_j|_1`, smallest first.

use log::warn;
use ndarray::{ArrayView1, ArrayView2};

use crate::net::BatchProbabilities;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PairConstraint {
    pub anchor: usize,
    pub partner: usize,
}

fn l1(a: ArrayView1<'_, f64>, b: ArrayView1<'_, f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).abs()).sum()
}

/// Pair-mining score for one (anchor, partner) pair.
pub fn pair_objective(
    masked_tags: ArrayView2<'_, f64>,
    probs: &BatchProbabilities,
    gamma: f64,
    i: usize,
    j: usize,
) -> f64 {
    let p = probs.view();
    gamma * l1(masked_tags.row(i), masked_tags.row(j)) - l1(p.row(i), p.row(j))
}

/// For each anchor, the `l` partners with smallest objective (ties to the
/// lower index). `l` is clamped to `N_B - 1`; anchors come out in order.
pub fn generate_pairs(
    masked_tags: ArrayView2<'_, f64>,
    probs: &BatchProbabilities,
    gamma: f64,
    l: usize,
) -> Vec<PairConstraint> {
    let n = probs.n();
    assert_eq!(masked_tags.nrows(), n, "tag rows must match batch rows");
    if n < 2 {
        warn!("batch of {n} instance(s) cannot produce pairs");
        return Vec::new();
    }
    let l = l.min(n - 1);
    let mut out = Vec::with_capacity(n * l);
    let mut scored: Vec<(f64, usize)> = Vec::with_capacity(n - 1);
    for i in 0..n {
        scored.clear();
        scored.extend(
            (0..n)
                .filter(|&j| j != i)
                .map(|j| (pair_objective(masked_tags, probs, gamma, i, j), j)),
        );
        if l < scored.len() {
            scored.select_nth_unstable_by(l - 1, |a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            scored.truncate(l);
        }
        scored.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        out.extend(scored.iter().map(|&(_, j)| PairConstraint {
            anchor: i,
            partner: j,
        }));
    }
    out
}
