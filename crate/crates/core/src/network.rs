//! Bipartite networks with fixed margins: representation, distance,
//! canonical identity, and degree-sequence feasibility.
//!
//! A network is stored as one sorted neighbor list per top node, holding
//! bottom-node indices. All mutation goes through the trade engine, which
//! restores sortedness after every step.

use crate::error::{Error, Result};

/// The pair of degree sequences (margins) of a bipartite network.
///
/// `top[i]` is the degree of top node `i`, `bottom[j]` the degree of bottom
/// node `j`. The pair need not be realizable; see [`is_realizable`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DegreeSequencePair {
    pub top: Vec<usize>,
    pub bottom: Vec<usize>,
}

impl DegreeSequencePair {
    pub fn new(top: Vec<usize>, bottom: Vec<usize>) -> Self {
        Self { top, bottom }
    }

    /// Total degree on each side; equal for any realizable pair.
    pub fn top_sum(&self) -> usize {
        self.top.iter().sum()
    }

    pub fn bottom_sum(&self) -> usize {
        self.bottom.iter().sum()
    }
}

impl std::fmt::Display for DegreeSequencePair {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let join = |s: &[usize]| {
            s.iter()
                .map(|d| d.to_string())
                .collect::<Vec<_>>()
                .join(",")
        };
        write!(f, "{{{}}}/{{{}}}", join(&self.top), join(&self.bottom))
    }
}

/// A simple bipartite network with binary incidence.
///
/// Ordering is lexicographic over the neighbor lists, which is the canonical
/// order used when enumerating a universe of networks.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BipartiteNetwork {
    bottom_count: usize,
    neighbors: Vec<Vec<u32>>,
}

impl BipartiteNetwork {
    /// Build a network from per-top-node neighbor lists.
    ///
    /// Lists may arrive in any internal order; they are sorted on
    /// construction. Duplicate or out-of-range indices are rejected.
    pub fn from_neighbor_lists(
        mut neighbors: Vec<Vec<u32>>,
        bottom_count: usize,
    ) -> Result<Self> {
        for (top, list) in neighbors.iter_mut().enumerate() {
            list.sort_unstable();
            for pair in list.windows(2) {
                if pair[0] == pair[1] {
                    return Err(Error::InvalidNeighborList {
                        top,
                        reason: format!("duplicate neighbor {}", pair[0]),
                    });
                }
            }
            if let Some(&last) = list.last() {
                if last as usize >= bottom_count {
                    return Err(Error::InvalidNeighborList {
                        top,
                        reason: format!(
                            "neighbor {last} out of range (bottom count {bottom_count})"
                        ),
                    });
                }
            }
        }
        Ok(Self {
            bottom_count,
            neighbors,
        })
    }

    /// Construction bypass for callers that guarantee sorted, deduplicated,
    /// in-range lists (the trade engine and the enumerator).
    pub(crate) fn from_sorted_lists_unchecked(
        neighbors: Vec<Vec<u32>>,
        bottom_count: usize,
    ) -> Self {
        debug_assert!(neighbors.iter().all(|l| {
            l.windows(2).all(|w| w[0] < w[1])
                && l.last().is_none_or(|&x| (x as usize) < bottom_count)
        }));
        Self {
            bottom_count,
            neighbors,
        }
    }

    pub fn top_count(&self) -> usize {
        self.neighbors.len()
    }

    pub fn bottom_count(&self) -> usize {
        self.bottom_count
    }

    pub fn edge_count(&self) -> usize {
        self.neighbors.iter().map(Vec::len).sum()
    }

    pub fn neighbors(&self) -> &[Vec<u32>] {
        &self.neighbors
    }

    pub(crate) fn neighbors_mut(&mut self) -> &mut [Vec<u32>] {
        &mut self.neighbors
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.top_count() == other.top_count() && self.bottom_count == other.bottom_count
    }

    /// The margins of this network.
    pub fn degree_sequences(&self) -> DegreeSequencePair {
        let top = self.neighbors.iter().map(Vec::len).collect();
        let mut bottom = vec![0usize; self.bottom_count];
        for list in &self.neighbors {
            for &j in list {
                bottom[j as usize] += 1;
            }
        }
        DegreeSequencePair::new(top, bottom)
    }

    /// Packed row-major incidence bits; equal keys iff identical matrices.
    pub fn canonical_key(&self) -> CanonicalKey {
        let bits = self.top_count() * self.bottom_count;
        let mut words = vec![0u64; bits.div_ceil(64)];
        for (i, list) in self.neighbors.iter().enumerate() {
            for &j in list {
                let cell = i * self.bottom_count + j as usize;
                words[cell / 64] |= 1u64 << (63 - (cell % 64));
            }
        }
        CanonicalKey { bits, words }
    }

    /// Normalized Hamming distance: differing incidence cells over all cells.
    ///
    /// Computed as the sum of per-row symmetric-difference sizes, so the cost
    /// is proportional to the edge count rather than the cell count.
    pub fn distance(&self, other: &Self) -> Result<Distance> {
        if !self.same_shape(other) {
            return Err(Error::DimensionMismatch {
                expected_top: self.top_count(),
                expected_bottom: self.bottom_count,
                got_top: other.top_count(),
                got_bottom: other.bottom_count,
            });
        }
        let differing = self
            .neighbors
            .iter()
            .zip(&other.neighbors)
            .map(|(a, b)| symmetric_difference_size(a, b))
            .sum();
        Ok(Distance {
            differing,
            cells: (self.top_count() * self.bottom_count) as u64,
        })
    }
}

/// |A Δ B| for two sorted duplicate-free slices, via a single merge pass.
fn symmetric_difference_size(a: &[u32], b: &[u32]) -> u64 {
    let mut shared = 0usize;
    let (mut x, mut y) = (0usize, 0usize);
    while x < a.len() && y < b.len() {
        match a[x].cmp(&b[y]) {
            std::cmp::Ordering::Less => x += 1,
            std::cmp::Ordering::Greater => y += 1,
            std::cmp::Ordering::Equal => {
                shared += 1;
                x += 1;
                y += 1;
            }
        }
    }
    (a.len() + b.len() - 2 * shared) as u64
}

/// Identity of an incidence matrix as a packed bit vector.
///
/// Bit `i * bottom_count + j` is cell `(i, j)`, packed most-significant
/// first, so comparing keys word by word compares the row-major bit strings
/// lexicographically.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CanonicalKey {
    bits: usize,
    words: Vec<u64>,
}

impl CanonicalKey {
    pub fn bit_len(&self) -> usize {
        self.bits
    }

    pub fn bit(&self, index: usize) -> bool {
        assert!(index < self.bits);
        self.words[index / 64] >> (63 - (index % 64)) & 1 == 1
    }
}

/// Distance between two equal-shape networks, kept as an exact fraction
/// `differing / cells` so that equality and ordering carry no rounding.
#[derive(Debug, Clone, Copy)]
pub struct Distance {
    differing: u64,
    cells: u64,
}

impl Distance {
    pub fn differing(&self) -> u64 {
        self.differing
    }

    pub fn cells(&self) -> u64 {
        self.cells
    }

    /// The distance as a real number in [0, 1].
    pub fn value(&self) -> f64 {
        if self.cells == 0 {
            0.0
        } else {
            self.differing as f64 / self.cells as f64
        }
    }

    pub fn is_zero(&self) -> bool {
        self.differing == 0
    }
}

impl PartialEq for Distance {
    fn eq(&self, other: &Self) -> bool {
        // Cross-multiplied exact comparison; 0-cell distances compare as 0.
        u128::from(self.differing) * u128::from(other.cells)
            == u128::from(other.differing) * u128::from(self.cells)
    }
}

impl Eq for Distance {}

impl PartialOrd for Distance {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Distance {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        let lhs = u128::from(self.differing) * u128::from(other.cells);
        let rhs = u128::from(other.differing) * u128::from(self.cells);
        lhs.cmp(&rhs)
    }
}

/// Gale–Ryser feasibility: does any binary matrix have these margins?
///
/// With the top sequence sorted non-increasingly, the pair is realizable iff
/// the side sums agree and for every `k`,
/// `top[0] + .. + top[k-1] <= sum_j min(bottom[j], k)`.
pub fn is_realizable(pair: &DegreeSequencePair) -> bool {
    if pair.top_sum() != pair.bottom_sum() {
        return false;
    }
    let m = pair.top.len();
    if m == 0 {
        return true; // zero edges on both sides
    }
    let mut sorted_top = pair.top.clone();
    sorted_top.sort_unstable_by(|a, b| b.cmp(a));

    // count_ge[k] = number of bottom degrees >= k, for k in 1..=m
    let mut hist = vec![0usize; m + 1];
    for &b in &pair.bottom {
        hist[b.min(m)] += 1;
    }
    let mut count_ge = vec![0usize; m + 2];
    for k in (1..=m).rev() {
        count_ge[k] = count_ge[k + 1] + hist[k];
    }

    let mut lhs = 0usize;
    let mut rhs = 0usize; // sum_j min(bottom[j], k), built incrementally
    for k in 1..=m {
        lhs += sorted_top[k - 1];
        rhs += count_ge[k];
        if lhs > rhs {
            return false;
        }
    }
    true
}
