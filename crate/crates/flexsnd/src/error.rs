use thiserror::Error;

use crate::graph::EdgeId;

pub type Result<T> = std::result::Result<T, Error>;

/// Witness that a solution is not flex-connected: deleting the unsafe set `removed`
/// leaves pair `pair` with fewer than `p` edge-disjoint paths, certified by `cut_side`.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct InfeasibilityWitness {
    pub removed: Vec<EdgeId>,
    pub pair: usize,
    pub cut_side: Vec<usize>,
    pub crossing: usize,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("infeasible: pair {} loses connectivity (crossing {}) after removing {:?}", .0.pair, .0.crossing, .0.removed)]
    Infeasible(InfeasibilityWitness),

    #[error("augmentation LP infeasible: no candidate edge crosses a violated cut (pair {pair}, cut side {cut_side:?})")]
    LpInfeasible { pair: usize, cut_side: Vec<usize> },

    #[error("enumeration guard exceeded in {what}: needed {needed}, limit {limit}")]
    GuardExceeded {
        what: String,
        needed: u128,
        limit: u128,
    },

    #[error("input is not a metric: {0}")]
    NonMetric(String),

    #[error("embedding congestion target missed: achieved {achieved:.4}, target {target:.4}")]
    EmbedCongestion { achieved: f64, target: f64 },

    #[error("stage retries exhausted after {attempts} attempts (stage {stage})")]
    RetriesExhausted { stage: usize, attempts: usize },

    #[error("iteration cap reached in {0}")]
    IterationCap(String),

    #[error("internal invariant broken: {0}")]
    Internal(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}
