//! Random spanning forests and tree-restricted proposals.

use rand::Rng;

use super::approx::{EdgeSubset, Restrict};
use super::tree::tree_optimize;
use crate::energy::{DiscreteEnergy, GraphTopology, Labeling};

pub(crate) struct DisjointSets {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl DisjointSets {
    pub(crate) fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    pub(crate) fn find(&mut self, mut v: usize) -> usize {
        while self.parent[v] != v {
            self.parent[v] = self.parent[self.parent[v]];
            v = self.parent[v];
        }
        v
    }

    /// Merges the sets of `a` and `b`; false if they were already joined.
    pub(crate) fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
        true
    }
}

/// Minimum spanning forest under i.i.d. `U(0,1)` edge weights (Kruskal).
pub fn random_spanning_forest<R: Rng + ?Sized>(
    topology: &GraphTopology,
    rng: &mut R,
) -> EdgeSubset {
    let weights: Vec<f64> = (0..topology.edge_count()).map(|_| rng.random()).collect();
    let mut order: Vec<usize> = (0..topology.edge_count()).collect();
    order.sort_by(|&a, &b| weights[a].total_cmp(&weights[b]).then(a.cmp(&b)));
    let mut sets = DisjointSets::new(topology.node_count());
    let mut kept: Vec<usize> = order
        .into_iter()
        .filter(|&e| {
            let (p, q) = topology.edge(e);
            sets.union(p, q)
        })
        .collect();
    kept.sort_unstable();
    EdgeSubset::new(kept, topology.edge_count()).expect("forest edges are valid indices")
}

/// Exact minimizer of the energy restricted to a random spanning forest.
pub fn st_proposal<R: Rng + ?Sized>(energy: &DiscreteEnergy, rng: &mut R) -> Labeling {
    let forest = random_spanning_forest(energy.topology(), rng);
    tree_optimize(&energy.restrict(&forest)).expect("spanning forest is acyclic")
}
