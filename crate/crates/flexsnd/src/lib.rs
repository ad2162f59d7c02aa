//! Network design library for flexible connectivity: a graph is given with
//! *safe* and *unsafe* edges, and each terminal pair must stay `p`-edge-connected
//! after the removal of any `q` unsafe edges. The library provides the
//! augmentation LP with constraint generation, capacitated tree-embedding
//! distributions, oblivious tree rounding, a stage-by-stage solver that combines
//! them, and brute-force oracles for validating everything at small scale.

pub mod embed;
pub mod error;
pub mod frt;
pub mod graph;
pub mod instance;
pub mod lp;
pub mod oracle;
pub mod pipeline;
pub mod rounding;
pub mod rng;
pub mod scalar;
pub mod simplex;
pub mod verify;

pub use error::{Error, Result};
pub use graph::{CapacityMap, Cut, Edge, EdgeId, FlexGraph};
pub use scalar::Scalar;

/// Concrete scalar used by the solver pipeline. The numeric kernels
/// (max-flow, simplex, tree flow) are generic over [`Scalar`]; everything
/// above them fixes this alias.
pub type Cap = f64;

/// Additive tolerance for flow-value comparisons.
pub const EPS_FLOW: Cap = 1e-9;
/// Tolerance for LP objective and variable bounds.
pub const EPS_LP: Cap = 1e-7;
/// Slack used when deciding whether a cut constraint is violated.
pub const EPS_SEP: Cap = 1e-6;
