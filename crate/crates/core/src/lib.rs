//! Random sampling of bipartite networks with fixed degree sequences.
//!
//! The sampler randomizes a starting network with degree-preserving trades:
//! two top nodes pool the bottom nodes they do not share and redistribute
//! them uniformly at random. Run long enough, a chain of trades lands on
//! every network with the same margins with equal probability. The open
//! question in practice is how long is long enough; this crate answers it
//! empirically with a stopping rule. An ensemble of chains advances in
//! lockstep while the distribution of their distances from the start is
//! tracked, and trading stops once that distribution stabilizes between
//! consecutive checkpoints under a two-sample Kolmogorov-Smirnov test.
//!
//! For small margins the full universe of networks can be enumerated, which
//! turns "is this sample random?" into a checkable question: does the sample
//! cover every universe member, and are its member counts uniform under a
//! chi-squared test? The [`oracle`] module implements both the enumeration
//! and that validation harness; [`datasets`] supplies classic margins and
//! file formats.
//!
//! ```
//! use trade_sampler::{sample_with_stopping_rule, realize, DegreeSequencePair, StoppingConfig};
//!
//! let pair = DegreeSequencePair::new(vec![1, 1, 2], vec![1, 1, 2]);
//! let start = realize(&pair).unwrap();
//! let cfg = StoppingConfig { sample_size: 100, ..StoppingConfig::default() };
//! let report = sample_with_stopping_rule(&start, &cfg, 7).unwrap();
//! assert_eq!(report.networks.len(), 100);
//! assert!(report.networks.iter().all(|n| n.degree_sequences() == pair));
//! ```

pub mod datasets;
pub mod error;
pub mod network;
pub mod oracle;
pub mod rng;
pub mod stats;
pub mod stopping;
pub mod trade;

pub use datasets::{builtin, load_edgelist, load_incidence, realize, NamedDataset};
pub use error::{Error, Result};
pub use network::{
    is_realizable, BipartiteNetwork, CanonicalKey, DegreeSequencePair, Distance,
};
pub use oracle::{
    enumerate_universe, exact_distance_distribution, run_sweep, run_validation_experiment,
    validate_sample, NetworkUniverse, SweepSummary, ValidationSummary,
};
pub use stats::{
    chi_squared_uniformity, ks_two_sample, pearson_correlation, ChiSquaredResult, KsResult,
};
pub use stopping::{
    distance_profile, sample_with_stopping_rule, sample_with_stopping_rule_observed,
    DistanceProfile, Ensemble, KsMethod, SampleReport, StoppingConfig,
};
pub use trade::{trade, trade_with, TradeAlgorithm, TradeChain};
