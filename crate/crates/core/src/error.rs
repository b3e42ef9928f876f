use thiserror::Error;

use crate::agp::UpgTraceEntry;

/// Errors raised by oracles, subroutines and solvers.
///
/// Budget exhaustion is never an error; it is reported through
/// [`Termination`](crate::Termination).
#[derive(Debug, Error)]
pub enum SloError {
    #[error("non-finite {what}{}", index.map(|i| format!(" at coordinate {i}")).unwrap_or_default())]
    NonFinite {
        what: &'static str,
        index: Option<usize>,
    },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("direction is not gradient related: <g,d> = {slope:e}, required <= {bound:e}")]
    NotGradientRelated { slope: f64, bound: f64 },

    #[error("line search exceeded {backtracks} backtracks (last step {last_delta:e})")]
    BacktrackLimit { backtracks: usize, last_delta: f64 },

    #[error("lipschitz estimation failed: every sampled pair was degenerate")]
    DegenerateSamples,

    #[error("no negative-curvature pair found for flag {flag}; the gradient constant is under-estimated or rounding in f exceeds the predicted decrease")]
    NcPairMissing { flag: u8 },

    #[error("negative-curvature pair has zero displacement")]
    DegenerateNcPair,

    #[error("AGP-UPG exceeded its safety cap of {cap} iterations")]
    UpgSafetyCap {
        cap: usize,
        trace: Box<Vec<UpgTraceEntry>>,
    },

    #[error("tensor with {entries} entries exceeds the cap of {cap}")]
    SizeLimit { entries: usize, cap: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = SloError> = std::result::Result<T, E>;
