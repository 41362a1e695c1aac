//! Crate-wide error type.

use crate::stats::KsResult;
use thiserror::Error;

/// Errors surfaced by the library.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Networks with different shapes were combined.
    #[error("dimension mismatch: {expected_top}x{expected_bottom} vs {got_top}x{got_bottom}")]
    DimensionMismatch {
        expected_top: usize,
        expected_bottom: usize,
        got_top: usize,
        got_bottom: usize,
    },

    /// A neighbor list failed validation during construction.
    #[error("invalid neighbor list for top node {top}: {reason}")]
    InvalidNeighborList { top: usize, reason: String },

    /// A top-node index was outside `0..top_count`.
    #[error("top node index {index} out of range (top count {count})")]
    NodeOutOfRange { index: usize, count: usize },

    /// The two nodes of a trade must be distinct.
    #[error("cannot trade node {index} with itself")]
    IdenticalNodes { index: usize },

    /// The network admits no trades (fewer than two top nodes).
    #[error("degenerate network: {top_count} top node(s), trades need at least 2")]
    DegenerateNetwork { top_count: usize },

    /// The distance distribution never stabilized under the trade cap.
    /// Carries the full KS trace so the run can still be inspected.
    #[error("no convergence after {trades} trades (cap reached); {} checkpoints compared", trace.len())]
    NonConvergence {
        trades: u64,
        trace: Vec<(u64, KsResult)>,
    },

    /// Enumeration found more members than the configured cap.
    #[error("universe has at least {at_least} members, over the cap of {cap}")]
    UniverseTooLarge { cap: usize, at_least: usize },

    /// No binary matrix realizes the requested margins.
    #[error("no bipartite network realizes these degree sequences")]
    InfeasibleMargins,

    /// A built-in dataset name was not recognized.
    #[error("unknown dataset {name:?}; available: {}", available.join(", "))]
    UnknownDataset {
        name: String,
        available: Vec<String>,
    },

    /// A data file failed to parse.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// An operating-system failure while reading or writing a file.
    /// Stored as text so the error type stays cloneable.
    #[error("i/o error: {0}")]
    Io(String),

    /// Preconditions on a plain value were not met (empty sample, zero reps, ...).
    #[error("rejected input: {0}")]
    RejectedInput(String),
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
