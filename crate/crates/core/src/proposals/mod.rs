//! Proposal generators for fusion moves.

mod approx;
mod forest;
mod ga;
mod random;
mod tree;

pub use approx::{approximate_edges, restrict_energy, EdgeSubset, Restrict};
pub use forest::{random_spanning_forest, st_proposal};
pub use ga::{default_k, optimize_ga, optimize_ga_split, GaProposal, GaStep};
pub use random::random_proposal;
pub use tree::tree_optimize;
