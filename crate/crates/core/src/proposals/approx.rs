//! Graph approximation by random edge deletion.

use rand::seq::index;
use rand::Rng;

use crate::energy::{BinaryEnergy, DiscreteEnergy};
use crate::error::{invalid, Result};

/// Kept edges, as strictly increasing indices into a parent edge list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeSubset {
    kept: Vec<usize>,
}

impl EdgeSubset {
    pub fn new(mut kept: Vec<usize>, edge_count: usize) -> Result<Self> {
        kept.sort_unstable();
        if kept.windows(2).any(|w| w[0] == w[1]) {
            return invalid("edge subset contains a duplicate index");
        }
        if kept.last().is_some_and(|&e| e >= edge_count) {
            return invalid(format!(
                "edge subset index out of range for {edge_count} edges"
            ));
        }
        Ok(Self { kept })
    }

    pub fn all(edge_count: usize) -> Self {
        Self {
            kept: (0..edge_count).collect(),
        }
    }

    pub fn empty() -> Self {
        Self { kept: Vec::new() }
    }

    pub fn indices(&self) -> &[usize] {
        &self.kept
    }

    pub fn len(&self) -> usize {
        self.kept.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kept.is_empty()
    }
}

/// Uniformly random subset of `round(rho * edge_count)` edges, drawn without replacement.
pub fn approximate_edges<R: Rng + ?Sized>(edge_count: usize, rho: f64, rng: &mut R) -> EdgeSubset {
    assert!(
        (0.0..=1.0).contains(&rho),
        "rho must lie in [0, 1], got {rho}"
    );
    let size = ((rho * edge_count as f64).round() as usize).min(edge_count);
    if size == edge_count {
        return EdgeSubset::all(edge_count);
    }
    let mut kept = index::sample(rng, edge_count, size).into_vec();
    kept.sort_unstable();
    EdgeSubset { kept }
}

/// Energies that can drop pairwise terms outside an edge subset.
pub trait Restrict: Sized {
    fn restrict(&self, subset: &EdgeSubset) -> Self;
}

impl Restrict for DiscreteEnergy {
    fn restrict(&self, subset: &EdgeSubset) -> Self {
        assert!(subset.kept.last().is_none_or(|&e| e < self.edge_count()));
        self.restricted(&subset.kept)
    }
}

impl Restrict for BinaryEnergy {
    fn restrict(&self, subset: &EdgeSubset) -> Self {
        assert!(subset.kept.last().is_none_or(|&e| e < self.edge_count()));
        self.restricted(&subset.kept)
    }
}

pub fn restrict_energy<E: Restrict>(energy: &E, subset: &EdgeSubset) -> E {
    energy.restrict(subset)
}
