//! Brute-force enumeration of small network universes and the validation
//! harness built on top of it.
//!
//! For margins whose universe is small enough to list exhaustively, a sample
//! can be tested directly: does it cover every member, and are the member
//! counts consistent with a uniform draw? A sample passing both is random in
//! the operational sense used throughout this crate.

use crate::error::{Error, Result};
use crate::network::{
    is_realizable, BipartiteNetwork, CanonicalKey, Distance, DegreeSequencePair,
};
use crate::rng::derive_seed;
use crate::stats::{chi_squared_uniformity, pearson_correlation};
use crate::stopping::{sample_with_stopping_rule, StoppingConfig};
use rayon::prelude::*;
use std::collections::HashMap;

/// Default ceiling on universe size; enumeration past this aborts.
pub const DEFAULT_ENUMERATION_CAP: usize = 1_000_000;

/// Significance level of the validation protocol's uniformity test. Fixed:
/// the stopping rule's own alpha may vary without changing what counts as a
/// uniform sample.
pub const VALIDATION_ALPHA: f64 = 0.05;

/// Universe filter used by [`margin_pair_family`]: small enough to validate
/// against, large enough for uniformity to be non-trivial.
const FAMILY_MIN_CARDINALITY: usize = 2;
const FAMILY_MAX_CARDINALITY: usize = 100;

/// Every network with a given pair of degree sequences.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetworkUniverse {
    pair: DegreeSequencePair,
    members: Vec<BipartiteNetwork>,
}

impl NetworkUniverse {
    pub fn pair(&self) -> &DegreeSequencePair {
        &self.pair
    }

    /// Members in ascending neighbor-list lexicographic order.
    pub fn members(&self) -> &[BipartiteNetwork] {
        &self.members
    }

    pub fn cardinality(&self) -> usize {
        self.members.len()
    }

    /// The lexicographically first member, the canonical starting network.
    pub fn first(&self) -> Option<&BipartiteNetwork> {
        self.members.first()
    }

    /// Map from canonical key to member position.
    pub fn index_by_key(&self) -> HashMap<CanonicalKey, usize> {
        self.members
            .iter()
            .enumerate()
            .map(|(i, m)| (m.canonical_key(), i))
            .collect()
    }

    pub fn contains(&self, network: &BipartiteNetwork) -> bool {
        self.members.binary_search(network).is_ok()
    }
}

/// List every network realizing `pair`, in ascending lexicographic order.
///
/// Exhaustive backtracking, row by row: each top node takes a combination of
/// still-available bottom nodes, and a partial assignment is abandoned as
/// soon as the remaining rows cannot realize the residual column sums.
/// Finding more than `cap` members aborts with an error.
pub fn enumerate_universe(
    pair: &DegreeSequencePair,
    cap: usize,
) -> Result<NetworkUniverse> {
    if cap == 0 {
        return Err(Error::RejectedInput(
            "enumeration cap must be at least 1".into(),
        ));
    }
    let mut members = Vec::new();
    if is_realizable(pair) {
        let mut residual = pair.bottom.clone();
        let mut rows: Vec<Vec<u32>> = Vec::with_capacity(pair.top.len());
        extend_rows(pair, 0, &mut residual, &mut rows, &mut members, cap)?;
    }
    Ok(NetworkUniverse {
        pair: pair.clone(),
        members,
    })
}

/// Recurse over rows `row..`; `residual` holds undistributed column sums.
fn extend_rows(
    pair: &DegreeSequencePair,
    row: usize,
    residual: &mut Vec<usize>,
    rows: &mut Vec<Vec<u32>>,
    members: &mut Vec<BipartiteNetwork>,
    cap: usize,
) -> Result<()> {
    if row == pair.top.len() {
        debug_assert!(residual.iter().all(|&r| r == 0));
        if members.len() == cap {
            return Err(Error::UniverseTooLarge {
                cap,
                at_least: cap + 1,
            });
        }
        members.push(BipartiteNetwork::from_sorted_lists_unchecked(
            rows.clone(),
            pair.bottom.len(),
        ));
        return Ok(());
    }
    let mut chosen = Vec::with_capacity(pair.top[row]);
    choose_columns(pair, row, pair.top[row], 0, &mut chosen, residual, rows, members, cap)
}

/// Pick the next column of row `row`, ascending, so complete rows appear in
/// lexicographic order and therefore so do complete networks.
#[allow(clippy::too_many_arguments)]
fn choose_columns(
    pair: &DegreeSequencePair,
    row: usize,
    need: usize,
    from: usize,
    chosen: &mut Vec<u32>,
    residual: &mut Vec<usize>,
    rows: &mut Vec<Vec<u32>>,
    members: &mut Vec<BipartiteNetwork>,
    cap: usize,
) -> Result<()> {
    if need == 0 {
        if residual_realizable(&pair.top[row + 1..], residual) {
            rows.push(chosen.clone());
            extend_rows(pair, row + 1, residual, rows, members, cap)?;
            rows.pop();
        }
        return Ok(());
    }
    let columns = residual.len();
    for col in from..columns {
        if residual[col] == 0 || columns - col < need {
            continue;
        }
        residual[col] -= 1;
        chosen.push(col as u32);
        choose_columns(pair, row, need - 1, col + 1, chosen, residual, rows, members, cap)?;
        chosen.pop();
        residual[col] += 1;
    }
    Ok(())
}

/// Can the remaining rows still realize the residual column sums?
fn residual_realizable(remaining_top: &[usize], residual: &[usize]) -> bool {
    is_realizable(&DegreeSequencePair::new(
        remaining_top.to_vec(),
        residual.to_vec(),
    ))
}

/// Distances from `start` to every universe member, ascending. Contains
/// exactly one zero entry: the universe is exhaustive, so `start` is in it.
pub fn exact_distance_distribution(
    start: &BipartiteNetwork,
    universe: &NetworkUniverse,
) -> Result<Vec<Distance>> {
    if &start.degree_sequences() != universe.pair() {
        return Err(Error::RejectedInput(format!(
            "start has margins {}, universe has {}",
            start.degree_sequences(),
            universe.pair()
        )));
    }
    let mut distances = universe
        .members()
        .iter()
        .map(|m| start.distance(m))
        .collect::<Result<Vec<_>>>()?;
    distances.sort_unstable();
    Ok(distances)
}

/// Test a sample against its enumerated universe.
///
/// `covered`: every member appears at least once. `uniform`: the per-member
/// counts, zeros included, pass a chi-squared uniformity test at `alpha`.
/// `random`: both.
pub fn validate_sample(
    networks: &[BipartiteNetwork],
    universe: &NetworkUniverse,
    alpha: f64,
) -> Result<(bool, bool, bool)> {
    if networks.is_empty() {
        return Err(Error::RejectedInput("sample is empty".into()));
    }
    let index = universe.index_by_key();
    let mut counts = vec![0u64; universe.cardinality()];
    for network in networks {
        if &network.degree_sequences() != universe.pair() {
            return Err(Error::RejectedInput(format!(
                "sampled network has margins {}, universe has {}",
                network.degree_sequences(),
                universe.pair()
            )));
        }
        let position = index
            .get(&network.canonical_key())
            .copied()
            .ok_or_else(|| {
                Error::RejectedInput("sampled network is outside the universe".into())
            })?;
        counts[position] += 1;
    }
    let covered = counts.iter().all(|&c| c > 0);
    // A one-member universe is uniform by definition.
    let uniform = if counts.len() < 2 {
        true
    } else {
        chi_squared_uniformity(&counts)?.p_value > alpha
    };
    Ok((covered, uniform, covered && uniform))
}

/// Aggregate outcome of repeated sample-and-validate runs on one pair.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationSummary {
    pub pair: DegreeSequencePair,
    pub cardinality: usize,
    pub reps: usize,
    pub fraction_random: f64,
    pub mean_trades: f64,
    pub fraction_covered: f64,
    pub fraction_uniform: f64,
}

/// Repeatedly sample with the stopping rule and validate, all reps starting
/// from the lexicographically first universe member with independently
/// derived seeds.
pub fn run_validation_experiment(
    pair: &DegreeSequencePair,
    reps: usize,
    cfg: &StoppingConfig,
    seed: u64,
) -> Result<ValidationSummary> {
    run_validation_experiment_capped(pair, reps, cfg, seed, DEFAULT_ENUMERATION_CAP)
}

/// [`run_validation_experiment`] with an explicit enumeration cap.
pub fn run_validation_experiment_capped(
    pair: &DegreeSequencePair,
    reps: usize,
    cfg: &StoppingConfig,
    seed: u64,
    cap: usize,
) -> Result<ValidationSummary> {
    if reps == 0 {
        return Err(Error::RejectedInput("rep count must be at least 1".into()));
    }
    cfg.validate()?;
    let universe = enumerate_universe(pair, cap)?;
    let start = universe.first().ok_or(Error::InfeasibleMargins)?.clone();

    struct RepOutcome {
        covered: bool,
        uniform: bool,
        random: bool,
        trades: u64,
    }
    let outcomes = (0..reps)
        .into_par_iter()
        .map(|rep| {
            let report =
                sample_with_stopping_rule(&start, cfg, derive_seed(seed, rep as u64))?;
            let (covered, uniform, random) =
                validate_sample(&report.networks, &universe, VALIDATION_ALPHA)?;
            Ok(RepOutcome {
                covered,
                uniform,
                random,
                trades: report.trades_performed,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let count = |f: fn(&RepOutcome) -> bool| outcomes.iter().filter(|o| f(o)).count();
    let total_trades: u128 = outcomes.iter().map(|o| o.trades as u128).sum();
    Ok(ValidationSummary {
        pair: pair.clone(),
        cardinality: universe.cardinality(),
        reps,
        fraction_random: count(|o| o.random) as f64 / reps as f64,
        mean_trades: total_trades as f64 / reps as f64,
        fraction_covered: count(|o| o.covered) as f64 / reps as f64,
        fraction_uniform: count(|o| o.uniform) as f64 / reps as f64,
    })
}

/// Validation results over several pairs, with the association between
/// top-node count and trades needed.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSummary {
    pub rows: Vec<ValidationSummary>,
    /// Pairs whose experiment failed, with the error text.
    pub skipped: Vec<(DegreeSequencePair, String)>,
    /// Pearson correlation of top-node count against mean trades; absent
    /// unless the rows span at least two distinct top-node counts.
    pub correlation_top_vs_trades: Option<f64>,
}

/// Run the validation experiment over each pair. A pair that fails is
/// recorded and skipped rather than aborting the sweep.
pub fn run_sweep(
    pairs: &[DegreeSequencePair],
    reps: usize,
    cfg: &StoppingConfig,
    seed: u64,
) -> Result<SweepSummary> {
    run_sweep_capped(pairs, reps, cfg, seed, DEFAULT_ENUMERATION_CAP)
}

/// [`run_sweep`] with an explicit enumeration cap.
pub fn run_sweep_capped(
    pairs: &[DegreeSequencePair],
    reps: usize,
    cfg: &StoppingConfig,
    seed: u64,
    cap: usize,
) -> Result<SweepSummary> {
    if pairs.is_empty() {
        return Err(Error::RejectedInput("sweep needs at least one pair".into()));
    }
    let mut rows = Vec::new();
    let mut skipped = Vec::new();
    for (index, pair) in pairs.iter().enumerate() {
        match run_validation_experiment_capped(
            pair,
            reps,
            cfg,
            derive_seed(seed, index as u64),
            cap,
        ) {
            Ok(summary) => rows.push(summary),
            Err(err) => skipped.push((pair.clone(), err.to_string())),
        }
    }

    let tops: Vec<f64> = rows.iter().map(|r| r.pair.top.len() as f64).collect();
    let trades: Vec<f64> = rows.iter().map(|r| r.mean_trades).collect();
    let distinct_tops = {
        let mut t: Vec<usize> = rows.iter().map(|r| r.pair.top.len()).collect();
        t.sort_unstable();
        t.dedup();
        t.len()
    };
    let correlation_top_vs_trades = if distinct_tops >= 2 {
        Some(pearson_correlation(&tops, &trades)?)
    } else {
        None
    };
    Ok(SweepSummary {
        rows,
        skipped,
        correlation_top_vs_trades,
    })
}

/// Ten small margin pairs with known universe sizes, spanning universes
/// from 5 to 93 members. Useful as a standard sweep input.
pub fn small_margin_suite() -> Vec<DegreeSequencePair> {
    [
        (vec![1, 1, 2], vec![1, 1, 2]),
        (vec![1, 2, 3], vec![1, 1, 2, 2]),
        (vec![2, 2, 3], vec![1, 1, 1, 2, 2]),
        (vec![3, 3, 3], vec![1, 1, 1, 2, 2, 2]),
        (vec![1, 4, 6], vec![1, 1, 1, 2, 2, 2, 2]),
        (vec![1, 5, 6], vec![1, 1, 1, 1, 2, 2, 2, 2]),
        (vec![1, 2, 2, 2], vec![1, 1, 2, 3]),
        (vec![1, 1, 2, 3], vec![1, 1, 1, 2, 2]),
        (vec![1, 1, 3, 5], vec![1, 1, 1, 2, 2, 3]),
        (vec![2, 2, 4, 4, 4], vec![2, 2, 4, 4, 4]),
    ]
    .into_iter()
    .map(|(top, bottom)| DegreeSequencePair::new(top, bottom))
    .collect()
}

/// Expected universe cardinalities of [`small_margin_suite`], same order.
pub fn small_margin_suite_cardinalities() -> Vec<usize> {
    vec![5, 8, 31, 93, 19, 52, 27, 68, 26, 72]
}

/// Every margin pair with side lengths up to the given bounds, positive
/// non-decreasing degrees, and a universe in `[2, 100)`. Reconstructs a
/// small-universe scope criterion when no explicit pair list is given.
pub fn margin_pair_family(max_top: usize, max_bottom: usize) -> Vec<DegreeSequencePair> {
    let mut out = Vec::new();
    for top_len in 2..=max_top {
        for bottom_len in 2..=max_bottom {
            for top in non_decreasing_sequences(top_len, bottom_len) {
                let top_sum: usize = top.iter().sum();
                for bottom in non_decreasing_sequences(bottom_len, top_len) {
                    if bottom.iter().sum::<usize>() != top_sum {
                        continue;
                    }
                    let pair = DegreeSequencePair::new(top.clone(), bottom);
                    if !is_realizable(&pair) {
                        continue;
                    }
                    if let Ok(universe) =
                        enumerate_universe(&pair, FAMILY_MAX_CARDINALITY)
                    {
                        let n = universe.cardinality();
                        if (FAMILY_MIN_CARDINALITY..FAMILY_MAX_CARDINALITY).contains(&n)
                        {
                            out.push(pair);
                        }
                    }
                }
            }
        }
    }
    out
}

/// All non-decreasing sequences of `len` values in `1..=max_part`.
fn non_decreasing_sequences(len: usize, max_part: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(len);
    fn recurse(
        len: usize,
        max_part: usize,
        from: usize,
        current: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if current.len() == len {
            out.push(current.clone());
            return;
        }
        for part in from..=max_part {
            current.push(part);
            recurse(len, max_part, part, current, out);
            current.pop();
        }
    }
    recurse(len, max_part, 1, &mut current, &mut out);
    out
}
