//! Degree-preserving trade randomization.
//!
//! A trade picks two top nodes, pools the neighbors unique to each, shuffles
//! the pool, and deals it back so each node keeps its degree. Shared
//! neighbors stay with both nodes. Every split of the pool is equally
//! likely, which is what makes the chain's stationary distribution uniform
//! over all networks with the given margins.

use crate::error::{Error, Result};
use crate::network::BipartiteNetwork;
use crate::rng::RngState;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// How shared/unique neighbors are extracted for a trade.
///
/// `Fastball` walks the two sorted lists in one linear merge. `Curveball`
/// goes through ordered sets, which costs an extra log factor. Both produce
/// identical networks from identical generator states; the slower path
/// exists only to cross-check the fast one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TradeAlgorithm {
    #[default]
    Fastball,
    Curveball,
}

/// Perform one trade between top nodes `i` and `j` using the fastball path.
pub fn trade(
    net: &mut BipartiteNetwork,
    i: usize,
    j: usize,
    rng: &mut ChaCha8Rng,
) -> Result<()> {
    trade_with(net, i, j, rng, TradeAlgorithm::Fastball)
}

/// Perform one trade with an explicit algorithm choice.
pub fn trade_with(
    net: &mut BipartiteNetwork,
    i: usize,
    j: usize,
    rng: &mut ChaCha8Rng,
    algorithm: TradeAlgorithm,
) -> Result<()> {
    let count = net.top_count();
    for index in [i, j] {
        if index >= count {
            return Err(Error::NodeOutOfRange { index, count });
        }
    }
    if i == j {
        return Err(Error::IdenticalNodes { index: i });
    }

    let rows = net.neighbors_mut();
    let row_i = std::mem::take(&mut rows[i]);
    let row_j = std::mem::take(&mut rows[j]);
    let (shared, mut pool, unique_i) = match algorithm {
        TradeAlgorithm::Fastball => split_by_merge(&row_i, &row_j),
        TradeAlgorithm::Curveball => split_by_sets(&row_i, &row_j),
    };
    pool.shuffle(rng);
    rows[i] = rebuild_row(&shared, &mut pool[..unique_i]);
    rows[j] = rebuild_row(&shared, &mut pool[unique_i..]);
    Ok(())
}

/// One merge pass over two sorted lists: returns (shared, pool of uniques in
/// ascending order, number unique to the first list).
fn split_by_merge(a: &[u32], b: &[u32]) -> (Vec<u32>, Vec<u32>, usize) {
    let mut shared = Vec::with_capacity(a.len().min(b.len()));
    let mut pool = Vec::with_capacity(a.len() + b.len());
    let mut unique_a = 0usize;
    let (mut x, mut y) = (0usize, 0usize);
    while x < a.len() && y < b.len() {
        match a[x].cmp(&b[y]) {
            std::cmp::Ordering::Less => {
                pool.push(a[x]);
                unique_a += 1;
                x += 1;
            }
            std::cmp::Ordering::Greater => {
                pool.push(b[y]);
                y += 1;
            }
            std::cmp::Ordering::Equal => {
                shared.push(a[x]);
                x += 1;
                y += 1;
            }
        }
    }
    unique_a += a.len() - x;
    pool.extend_from_slice(&a[x..]);
    pool.extend_from_slice(&b[y..]);
    (shared, pool, unique_a)
}

/// Set-based extraction. The pool comes out in the same ascending order as
/// the merge path, so both paths consume the generator identically.
fn split_by_sets(a: &[u32], b: &[u32]) -> (Vec<u32>, Vec<u32>, usize) {
    use std::collections::BTreeSet;
    let set_a: BTreeSet<u32> = a.iter().copied().collect();
    let set_b: BTreeSet<u32> = b.iter().copied().collect();
    let shared: Vec<u32> = set_a.intersection(&set_b).copied().collect();
    let pool: Vec<u32> = set_a.symmetric_difference(&set_b).copied().collect();
    let unique_a = a.len() - shared.len();
    (shared, pool, unique_a)
}

/// Sort the dealt uniques and merge them with the shared neighbors.
fn rebuild_row(shared: &[u32], dealt: &mut [u32]) -> Vec<u32> {
    dealt.sort_unstable();
    let mut out = Vec::with_capacity(shared.len() + dealt.len());
    let (mut x, mut y) = (0usize, 0usize);
    while x < shared.len() && y < dealt.len() {
        if shared[x] < dealt[y] {
            out.push(shared[x]);
            x += 1;
        } else {
            out.push(dealt[y]);
            y += 1;
        }
    }
    out.extend_from_slice(&shared[x..]);
    out.extend_from_slice(&dealt[y..]);
    out
}

/// Draw an unordered pair of distinct top nodes, uniformly, by rejection.
pub(crate) fn draw_distinct_pair(rng: &mut ChaCha8Rng, top_count: usize) -> (usize, usize) {
    loop {
        let i = rng.random_range(0..top_count);
        let j = rng.random_range(0..top_count);
        if i != j {
            return (i, j);
        }
    }
}

/// A single randomization chain: a network, its trade count, and its own
/// generator. Distinct chains are fully independent.
#[derive(Debug, Clone)]
pub struct TradeChain {
    network: BipartiteNetwork,
    trades_done: u64,
    rng: RngState,
    algorithm: TradeAlgorithm,
}

impl TradeChain {
    pub fn new(network: BipartiteNetwork, seed: u64) -> Self {
        Self::with_algorithm(network, seed, TradeAlgorithm::default())
    }

    pub fn with_algorithm(
        network: BipartiteNetwork,
        seed: u64,
        algorithm: TradeAlgorithm,
    ) -> Self {
        Self {
            network,
            trades_done: 0,
            rng: RngState::from_seed(seed),
            algorithm,
        }
    }

    pub fn network(&self) -> &BipartiteNetwork {
        &self.network
    }

    pub fn into_network(self) -> BipartiteNetwork {
        self.network
    }

    pub fn trades_done(&self) -> u64 {
        self.trades_done
    }

    /// One random trade: pick a uniform pair of distinct top nodes and trade.
    /// A trade that ends up swapping nothing still counts.
    pub fn step(&mut self) -> Result<()> {
        let top_count = self.network.top_count();
        if top_count < 2 {
            return Err(Error::DegenerateNetwork { top_count });
        }
        let (i, j) = draw_distinct_pair(self.rng.rng(), top_count);
        trade_with(&mut self.network, i, j, self.rng.rng(), self.algorithm)?;
        self.trades_done += 1;
        Ok(())
    }

    /// Run exactly `t` random trades; `t` must be at least 1.
    pub fn run(&mut self, t: u64) -> Result<()> {
        if t == 0 {
            return Err(Error::RejectedInput(
                "trade count must be at least 1".into(),
            ));
        }
        for _ in 0..t {
            self.step()?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::DegreeSequencePair;
    use std::collections::HashMap;

    fn net(lists: &[&[u32]], bottom: usize) -> BipartiteNetwork {
        BipartiteNetwork::from_neighbor_lists(
            lists.iter().map(|l| l.to_vec()).collect(),
            bottom,
        )
        .unwrap()
    }

    #[test]
    fn trade_without_unique_neighbors_is_identity() {
        let mut rng = RngState::from_seed(1);
        let mut n = net(&[&[0, 1], &[0, 1]], 2);
        let before = n.clone();
        trade(&mut n, 0, 1, rng.rng()).unwrap();
        assert_eq!(n, before);
    }

    #[test]
    fn trade_rejects_bad_indices() {
        let mut rng = RngState::from_seed(1);
        let mut n = net(&[&[0], &[1]], 2);
        assert!(matches!(
            trade(&mut n, 0, 0, rng.rng()),
            Err(Error::IdenticalNodes { .. })
        ));
        assert!(matches!(
            trade(&mut n, 0, 5, rng.rng()),
            Err(Error::NodeOutOfRange { .. })
        ));
    }

    #[test]
    fn two_way_split_is_a_fair_coin() {
        // Rows {0,1} and {1,2} share {1}; the two possible outcomes for the
        // first row are {0,1} and {1,2}, each with probability 1/2.
        let mut rng = RngState::from_seed(99);
        let trials = 100_000u32;
        let mut kept = 0u32;
        for _ in 0..trials {
            let mut n = net(&[&[0, 1], &[1, 2]], 3);
            trade(&mut n, 0, 1, rng.rng()).unwrap();
            let pair = n.degree_sequences();
            assert_eq!(pair.top, vec![2, 2]);
            assert_eq!(pair.bottom, vec![1, 2, 1]);
            if n.neighbors()[0] == vec![0, 1] {
                kept += 1;
            } else {
                assert_eq!(n.neighbors()[0], vec![1, 2]);
            }
        }
        let freq = f64::from(kept) / f64::from(trials);
        let three_sigma = 3.0 * (0.25 / f64::from(trials)).sqrt();
        assert!(
            (freq - 0.5).abs() < three_sigma,
            "split frequency {freq} outside 0.5 +/- {three_sigma}"
        );
    }

    #[test]
    fn three_way_split_is_uniform() {
        // Rows {0} and {1,2}: the first row ends up {0}, {1} or {2}, each 1/3.
        let mut rng = RngState::from_seed(7);
        let trials = 100_000u32;
        let mut counts = [0u32; 3];
        for _ in 0..trials {
            let mut n = net(&[&[0], &[1, 2]], 3);
            trade(&mut n, 0, 1, rng.rng()).unwrap();
            assert_eq!(n.neighbors()[0].len(), 1);
            counts[n.neighbors()[0][0] as usize] += 1;
        }
        let three_sigma = 3.0 * (2.0 / 9.0 / f64::from(trials)).sqrt();
        for c in counts {
            let freq = f64::from(c) / f64::from(trials);
            assert!(
                (freq - 1.0 / 3.0).abs() < three_sigma,
                "outcome frequency {freq} outside 1/3 +/- {three_sigma}"
            );
        }
    }

    #[test]
    fn pair_selection_uniform_over_unordered_pairs() {
        let mut rng = RngState::from_seed(3);
        let trials = 100_000u32;
        let mut counts: HashMap<(usize, usize), u32> = HashMap::new();
        for _ in 0..trials {
            let (i, j) = draw_distinct_pair(rng.rng(), 4);
            let key = (i.min(j), i.max(j));
            *counts.entry(key).or_default() += 1;
        }
        assert_eq!(counts.len(), 6);
        let p = 1.0 / 6.0;
        let three_sigma = 3.0 * (p * (1.0 - p) / f64::from(trials)).sqrt();
        for (&pair, &c) in &counts {
            let freq = f64::from(c) / f64::from(trials);
            assert!(
                (freq - p).abs() < three_sigma,
                "pair {pair:?} frequency {freq} outside 1/6 +/- {three_sigma}"
            );
        }
    }

    #[test]
    fn chain_preserves_degrees_and_counts_zero_swap_trades() {
        let start = net(&[&[0], &[2], &[1, 2]], 3);
        let margins = start.degree_sequences();
        let mut chain = TradeChain::new(start, 11);
        for step in 1..=1000u64 {
            chain.step().unwrap();
            assert_eq!(chain.trades_done(), step);
            assert_eq!(chain.network().degree_sequences(), margins);
        }
    }

    #[test]
    fn chain_is_deterministic_per_seed() {
        let start = net(&[&[0], &[2], &[1, 2]], 3);
        let mut a = TradeChain::new(start.clone(), 123);
        let mut b = TradeChain::new(start, 123);
        a.run(500).unwrap();
        b.run(500).unwrap();
        assert_eq!(a.network(), b.network());
    }

    #[test]
    fn fastball_and_curveball_agree_exactly() {
        let start = net(&[&[0, 1, 4], &[1, 2, 5], &[0, 3], &[2, 4, 5, 6]], 7);
        let mut fast = TradeChain::with_algorithm(start.clone(), 42, TradeAlgorithm::Fastball);
        let mut curve = TradeChain::with_algorithm(start, 42, TradeAlgorithm::Curveball);
        for _ in 0..200 {
            fast.step().unwrap();
            curve.step().unwrap();
            assert_eq!(fast.network(), curve.network());
        }
    }

    #[test]
    fn single_trade_can_reach_a_different_member() {
        // One trade from the toy start must sometimes produce another
        // universe member at distance 4/9.
        let start = net(&[&[0], &[2], &[1, 2]], 3);
        let mut moved = false;
        for seed in 0..200 {
            let mut chain = TradeChain::new(start.clone(), seed);
            chain.run(1).unwrap();
            if chain.network() != &start {
                let d = start.distance(chain.network()).unwrap();
                assert_eq!((d.differing(), d.cells()), (4, 9));
                moved = true;
            }
        }
        assert!(moved, "no single trade left the starting network");
    }

    #[test]
    fn zero_trades_rejected_and_chain_unchanged() {
        let start = net(&[&[0], &[2], &[1, 2]], 3);
        let mut chain = TradeChain::new(start.clone(), 5);
        assert!(matches!(chain.run(0), Err(Error::RejectedInput(_))));
        assert_eq!(chain.network(), &start);
        assert_eq!(chain.trades_done(), 0);
    }

    #[test]
    fn degenerate_network_cannot_step() {
        let mut chain = TradeChain::new(net(&[&[0, 1]], 2), 5);
        assert!(matches!(
            chain.step(),
            Err(Error::DegenerateNetwork { top_count: 1 })
        ));
    }

    #[test]
    fn trades_preserve_simplicity() {
        let start = net(&[&[0, 1, 2], &[1, 3], &[0, 2, 3], &[2]], 4);
        let mut chain = TradeChain::new(start, 8);
        for _ in 0..2000 {
            chain.step().unwrap();
            for list in chain.network().neighbors() {
                assert!(list.windows(2).all(|w| w[0] < w[1]), "list not strictly sorted");
            }
        }
    }

    #[test]
    fn margins_survive_mixed_degrees_with_zeros() {
        // Zero-degree nodes are legal; they just never hold anything to trade.
        let start = net(&[&[], &[0, 1, 2, 3], &[1]], 4);
        let margins = start.degree_sequences();
        assert_eq!(margins, DegreeSequencePair::new(vec![0, 4, 1], vec![1, 2, 1, 1]));
        let mut chain = TradeChain::new(start, 21);
        chain.run(500).unwrap();
        assert_eq!(chain.network().degree_sequences(), margins);
    }
}
