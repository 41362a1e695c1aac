//! Ensemble sampling with the distance-distribution stopping rule.
//!
//! A fixed-size ensemble of chains starts from a common network and all
//! chains advance in lockstep, `n` trades per round. After each round the
//! profile of distances to the starting network is assembled; once two
//! consecutive profiles are statistically indistinguishable under a
//! two-sample KS test, trading stops and the ensemble is the sample.

use crate::error::{Error, Result};
use crate::network::{BipartiteNetwork, CanonicalKey, Distance};
use crate::rng::{derive_seed, RngState};
use crate::stats::{ks_two_sample, ks_two_sample_permutation, KsResult};
use crate::trade::{TradeAlgorithm, TradeChain};
use rayon::prelude::*;
use std::collections::HashSet;

/// How the stopping test computes its p-value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum KsMethod {
    /// Asymptotic Kolmogorov tail, as in the standard test. Conservative on
    /// heavily tied distance data, which is what the rule relies on.
    #[default]
    Asymptotic,
    /// Pooled permutation test, for sensitivity analysis.
    Permutation { rounds: u32 },
}

/// Parameters of the stopping rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StoppingConfig {
    /// Number of chains, and therefore sampled networks.
    pub sample_size: usize,
    /// Trades between checkpoints; `None` means twice the top-node count.
    pub interval: Option<u64>,
    /// Stop at the first checkpoint whose KS p-value exceeds this.
    pub alpha: f64,
    /// Hard cap on trades; reaching it without stabilizing is an error.
    pub max_trades: u64,
    pub algorithm: TradeAlgorithm,
    pub ks_method: KsMethod,
}

impl Default for StoppingConfig {
    fn default() -> Self {
        Self {
            sample_size: 1000,
            interval: None,
            alpha: 0.05,
            max_trades: 1_000_000,
            algorithm: TradeAlgorithm::default(),
            ks_method: KsMethod::default(),
        }
    }
}

impl StoppingConfig {
    pub fn validate(&self) -> Result<()> {
        if self.sample_size < 2 {
            return Err(Error::RejectedInput("sample size must be at least 2".into()));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::RejectedInput(format!(
                "alpha must lie strictly between 0 and 1, got {}",
                self.alpha
            )));
        }
        if self.interval == Some(0) {
            return Err(Error::RejectedInput(
                "checkpoint interval must be at least 1".into(),
            ));
        }
        if self.max_trades == 0 {
            return Err(Error::RejectedInput("trade cap must be at least 1".into()));
        }
        Ok(())
    }

    /// The checkpoint interval for a given network.
    pub fn effective_interval(&self, top_count: usize) -> u64 {
        self.interval.unwrap_or(((2 * top_count) as u64).max(1))
    }
}

/// The distances between every ensemble member and the starting network
/// after `t` trades.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceProfile {
    pub t: u64,
    values: Vec<Distance>,
}

impl DistanceProfile {
    pub fn new(t: u64, values: Vec<Distance>) -> Self {
        Self { t, values }
    }

    pub fn values(&self) -> &[Distance] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.values.iter().map(Distance::value).collect()
    }
}

/// Distances from `start` to each member of `ensemble`, order preserved.
pub fn distance_profile(
    start: &BipartiteNetwork,
    ensemble: &[BipartiteNetwork],
    t: u64,
) -> Result<DistanceProfile> {
    let values = ensemble
        .iter()
        .map(|net| start.distance(net))
        .collect::<Result<Vec<_>>>()?;
    Ok(DistanceProfile::new(t, values))
}

/// Everything a stopping-rule run produces.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleReport {
    /// Common trade count of all chains when the rule fired.
    pub trades_performed: u64,
    /// The sampled networks, one per chain, in chain order.
    pub networks: Vec<BipartiteNetwork>,
    /// `(t, KS result)` for every checkpoint comparison that was made.
    pub ks_trace: Vec<(u64, KsResult)>,
    /// The distance profile at the stopping checkpoint.
    pub final_profile: DistanceProfile,
    /// Number of distinct networks in the sample.
    pub unique_count: usize,
}

/// A lockstep ensemble of trade chains sharing a starting network.
///
/// Per-chain seeds are derived from the master seed and the chain index, so
/// results are independent of how chains are scheduled across threads.
pub struct Ensemble {
    start: BipartiteNetwork,
    chains: Vec<TradeChain>,
}

impl Ensemble {
    pub fn new(
        start: BipartiteNetwork,
        sample_size: usize,
        seed: u64,
        algorithm: TradeAlgorithm,
    ) -> Self {
        let chains = (0..sample_size)
            .map(|idx| {
                TradeChain::with_algorithm(
                    start.clone(),
                    derive_seed(seed, idx as u64),
                    algorithm,
                )
            })
            .collect();
        Self { start, chains }
    }

    pub fn start(&self) -> &BipartiteNetwork {
        &self.start
    }

    /// Common trade count across chains.
    pub fn trades(&self) -> u64 {
        self.chains.first().map_or(0, TradeChain::trades_done)
    }

    /// Advance every chain by `n` trades.
    pub fn advance(&mut self, n: u64) -> Result<()> {
        self.chains.par_iter_mut().try_for_each(|c| c.run(n))
    }

    /// Distances from the start to every chain's current network.
    pub fn profile(&self) -> Result<DistanceProfile> {
        let values = self
            .chains
            .par_iter()
            .map(|c| self.start.distance(c.network()))
            .collect::<Result<Vec<_>>>()?;
        Ok(DistanceProfile::new(self.trades(), values))
    }

    pub fn networks(&self) -> impl Iterator<Item = &BipartiteNetwork> {
        self.chains.iter().map(TradeChain::network)
    }

    pub fn into_networks(self) -> Vec<BipartiteNetwork> {
        self.chains.into_iter().map(TradeChain::into_network).collect()
    }
}

/// Count distinct networks by canonical key.
pub fn unique_network_count(networks: &[BipartiteNetwork]) -> usize {
    let keys: HashSet<CanonicalKey> =
        networks.iter().map(BipartiteNetwork::canonical_key).collect();
    keys.len()
}

/// Run the stopping rule: trade in rounds of `n`, checkpoint the distance
/// profile, and stop at the first checkpoint `t` where the KS test finds
/// `D_t` and `D_{t-n}` indistinguishable (`p > alpha`).
pub fn sample_with_stopping_rule(
    start: &BipartiteNetwork,
    cfg: &StoppingConfig,
    seed: u64,
) -> Result<SampleReport> {
    sample_with_stopping_rule_observed(start, cfg, seed, |_| {})
}

/// Same as [`sample_with_stopping_rule`], invoking `on_checkpoint` with each
/// per-checkpoint profile as it is assembled. Only the two most recent
/// profiles are retained internally; the observer is the way to capture the
/// full history.
pub fn sample_with_stopping_rule_observed(
    start: &BipartiteNetwork,
    cfg: &StoppingConfig,
    seed: u64,
    mut on_checkpoint: impl FnMut(&DistanceProfile),
) -> Result<SampleReport> {
    cfg.validate()?;
    let top_count = start.top_count();
    if top_count < 2 {
        // With fewer than two top nodes every row is forced by the margins,
        // so the universe has exactly one member and no trade is possible.
        // The trivial sample is returned as-is.
        let profile = DistanceProfile::new(
            0,
            vec![start.distance(start)?; cfg.sample_size],
        );
        return Ok(SampleReport {
            trades_performed: 0,
            networks: vec![start.clone(); cfg.sample_size],
            ks_trace: Vec::new(),
            final_profile: profile,
            unique_count: 1,
        });
    }

    let interval = cfg.effective_interval(top_count);
    let mut ensemble = Ensemble::new(start.clone(), cfg.sample_size, seed, cfg.algorithm);
    // Dedicated generator for the permutation variant, disjoint from every
    // chain seed index.
    let mut ks_rng = RngState::derived(seed, u64::MAX);
    let mut previous: Option<DistanceProfile> = None;
    let mut trace: Vec<(u64, KsResult)> = Vec::new();

    loop {
        let t = ensemble.trades() + interval;
        if t > cfg.max_trades {
            return Err(Error::NonConvergence {
                trades: ensemble.trades(),
                trace,
            });
        }
        ensemble.advance(interval)?;
        let profile = ensemble.profile()?;
        debug_assert_eq!(profile.t, t);
        on_checkpoint(&profile);

        if let Some(prev) = &previous {
            let ks = match cfg.ks_method {
                KsMethod::Asymptotic => ks_two_sample(&profile.to_f64(), &prev.to_f64())?,
                KsMethod::Permutation { rounds } => ks_two_sample_permutation(
                    &profile.to_f64(),
                    &prev.to_f64(),
                    rounds,
                    ks_rng.rng(),
                )?,
            };
            trace.push((t, ks));
            if ks.p_value > cfg.alpha {
                let networks = ensemble.into_networks();
                let unique_count = unique_network_count(&networks);
                return Ok(SampleReport {
                    trades_performed: t,
                    networks,
                    ks_trace: trace,
                    final_profile: profile,
                    unique_count,
                });
            }
        }
        previous = Some(profile);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn net(lists: &[&[u32]], bottom: usize) -> BipartiteNetwork {
        BipartiteNetwork::from_neighbor_lists(
            lists.iter().map(|l| l.to_vec()).collect(),
            bottom,
        )
        .unwrap()
    }

    fn toy_start() -> BipartiteNetwork {
        net(&[&[0], &[2], &[1, 2]], 3)
    }

    fn small_cfg() -> StoppingConfig {
        StoppingConfig {
            sample_size: 200,
            ..StoppingConfig::default()
        }
    }

    #[test]
    fn config_validation() {
        assert!(StoppingConfig::default().validate().is_ok());
        for bad in [
            StoppingConfig {
                sample_size: 1,
                ..StoppingConfig::default()
            },
            StoppingConfig {
                alpha: 0.0,
                ..StoppingConfig::default()
            },
            StoppingConfig {
                alpha: 1.0,
                ..StoppingConfig::default()
            },
            StoppingConfig {
                interval: Some(0),
                ..StoppingConfig::default()
            },
            StoppingConfig {
                max_trades: 0,
                ..StoppingConfig::default()
            },
        ] {
            assert!(bad.validate().is_err(), "{bad:?} should be rejected");
        }
    }

    #[test]
    fn default_interval_is_twice_top_count() {
        let cfg = StoppingConfig::default();
        assert_eq!(cfg.effective_interval(3), 6);
        assert_eq!(
            StoppingConfig {
                interval: Some(10),
                ..cfg
            }
            .effective_interval(3),
            10
        );
    }

    #[test]
    fn profile_of_copies_is_all_zeros() {
        let start = toy_start();
        let ensemble = vec![start.clone(); 4];
        let profile = distance_profile(&start, &ensemble, 0).unwrap();
        assert_eq!(profile.len(), 4);
        assert!(profile.values().iter().all(Distance::is_zero));
    }

    #[test]
    fn profile_of_toy_universe_matches_exact_distances() {
        let start = toy_start();
        let members = vec![
            toy_start(),
            net(&[&[1], &[2], &[0, 2]], 3),
            net(&[&[2], &[0], &[1, 2]], 3),
            net(&[&[2], &[1], &[0, 2]], 3),
            net(&[&[2], &[2], &[0, 1]], 3),
        ];
        let profile = distance_profile(&start, &members, 0).unwrap();
        let mut counts: Vec<u64> = profile.values().iter().map(Distance::differing).collect();
        counts.sort_unstable();
        assert_eq!(counts, vec![0, 4, 4, 4, 6]);
    }

    #[test]
    fn profile_rejects_shape_mismatch() {
        let start = toy_start();
        let other = net(&[&[0]], 2);
        assert!(distance_profile(&start, &[other], 0).is_err());
    }

    #[test]
    fn single_member_profile_is_length_one() {
        let start = toy_start();
        let profile = distance_profile(&start, &[start.clone()], 3).unwrap();
        assert_eq!(profile.len(), 1);
        assert_eq!(profile.t, 3);
    }

    #[test]
    fn single_member_universe_stops_at_second_checkpoint() {
        // {2,2}/{2,2} admits exactly one network: trades swap nothing, so
        // the first comparison already sees two identical profiles.
        let start = net(&[&[0, 1], &[0, 1]], 2);
        let report =
            sample_with_stopping_rule(&start, &small_cfg(), 17).unwrap();
        let interval = small_cfg().effective_interval(2);
        assert_eq!(report.trades_performed, 2 * interval);
        assert_eq!(report.ks_trace.len(), 1);
        assert_eq!(report.ks_trace[0].1.statistic, 0.0);
        assert!(report.final_profile.values().iter().all(Distance::is_zero));
        assert_eq!(report.unique_count, 1);
    }

    #[test]
    fn stop_at_first_passing_checkpoint() {
        let report = sample_with_stopping_rule(&toy_start(), &small_cfg(), 5).unwrap();
        let (last, rest) = report.ks_trace.split_last().unwrap();
        assert!(last.1.p_value > small_cfg().alpha);
        for (_, ks) in rest {
            assert!(ks.p_value <= small_cfg().alpha);
        }
        assert_eq!(last.0, report.trades_performed);
        let interval = small_cfg().effective_interval(3);
        assert_eq!(report.trades_performed % interval, 0);
    }

    #[test]
    fn every_sampled_network_keeps_the_margins() {
        let start = toy_start();
        let margins = start.degree_sequences();
        let report = sample_with_stopping_rule(&start, &small_cfg(), 2).unwrap();
        assert_eq!(report.networks.len(), small_cfg().sample_size);
        for member in &report.networks {
            assert_eq!(member.degree_sequences(), margins);
        }
    }

    #[test]
    fn identical_inputs_give_identical_reports() {
        let a = sample_with_stopping_rule(&toy_start(), &small_cfg(), 99).unwrap();
        let b = sample_with_stopping_rule(&toy_start(), &small_cfg(), 99).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn cap_reached_is_an_error_with_trace() {
        let cfg = StoppingConfig {
            max_trades: 6, // one checkpoint fits, the second does not
            ..small_cfg()
        };
        match sample_with_stopping_rule(&toy_start(), &cfg, 1) {
            Err(Error::NonConvergence { trades, trace }) => {
                assert_eq!(trades, 6);
                assert!(trace.is_empty());
            }
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }

    #[test]
    fn degenerate_single_top_node_returns_trivial_sample() {
        let start = net(&[&[0, 1]], 2);
        let report = sample_with_stopping_rule(&start, &small_cfg(), 4).unwrap();
        assert_eq!(report.trades_performed, 0);
        assert_eq!(report.unique_count, 1);
        assert_eq!(report.networks.len(), small_cfg().sample_size);
        assert!(report.ks_trace.is_empty());
    }

    #[test]
    fn observer_sees_every_checkpoint() {
        let mut checkpoints = Vec::new();
        let report = sample_with_stopping_rule_observed(
            &toy_start(),
            &small_cfg(),
            10,
            |profile| checkpoints.push(profile.t),
        )
        .unwrap();
        let interval = small_cfg().effective_interval(3);
        let expected: Vec<u64> = (1..=report.trades_performed / interval)
            .map(|r| r * interval)
            .collect();
        assert_eq!(checkpoints, expected);
    }

    #[test]
    fn permutation_method_also_stabilizes() {
        let cfg = StoppingConfig {
            ks_method: KsMethod::Permutation { rounds: 99 },
            ..small_cfg()
        };
        let report = sample_with_stopping_rule(&toy_start(), &cfg, 3).unwrap();
        assert!(report.ks_trace.last().unwrap().1.p_value > cfg.alpha);
    }
}
