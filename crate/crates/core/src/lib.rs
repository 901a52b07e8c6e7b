//! Pairwise MRF energy minimization with fusion moves.
//!
//! The main entry point is [`solvers::solve`]; problem generators live in [`models`].

pub mod energy;
pub mod error;
pub mod image;
pub mod maxflow;
pub mod models;
pub mod moves;
pub mod proposals;
pub mod qpbo;
pub mod solvers;

pub use energy::{
    edge_is_submodular, relative_energy, term_is_metric, unary_strength, BinaryEnergy,
    DiscreteEnergy, GraphTopology, Labeling, RelativeScale,
};
pub use error::{MrfError, Result};
pub use image::{salt_pepper, GrayImage};
pub use qpbo::{qpbo_solve, PartialLabeling, QpboSolution};
pub use solvers::{solve, Algorithm, SolverConfig, SolverTrace};
