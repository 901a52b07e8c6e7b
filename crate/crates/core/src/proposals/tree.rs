//! Exact min-sum dynamic programming on forests.

use std::collections::VecDeque;

use super::forest::DisjointSets;
use crate::energy::{argmin, DiscreteEnergy, Labeling};
use crate::error::{MrfError, Result};

/// Global minimizer of an energy whose edges form a forest.
///
/// Each tree is rooted at its smallest node. Min-marginal messages flow from
/// the leaves to the root, then labels are fixed root-first; ties go to the
/// smaller label.
pub fn tree_optimize(energy: &DiscreteEnergy) -> Result<Labeling> {
    let n = energy.node_count();
    let l = energy.label_count();
    let lambda = energy.lambda();
    let topo = energy.topology();

    let mut sets = DisjointSets::new(n);
    for &(p, q) in topo.edges() {
        if !sets.union(p, q) {
            return Err(MrfError::Cyclic(q));
        }
    }

    let adj = topo.adjacency();
    // parent[v] = (parent node, edge index); roots have none.
    let mut parent: Vec<Option<(usize, usize)>> = vec![None; n];
    let mut seen = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut queue = VecDeque::new();
    for root in 0..n {
        if seen[root] {
            continue;
        }
        seen[root] = true;
        queue.push_back(root);
        while let Some(u) = queue.pop_front() {
            order.push(u);
            for &(v, e) in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    parent[v] = Some((u, e));
                    queue.push_back(v);
                }
            }
        }
    }

    // Pairwise cost with the child's label first.
    let cost = |child: usize, e: usize, a: usize, b: usize| {
        let t = energy.pairwise(e);
        let (p, _) = topo.edge(e);
        lambda
            * if p == child {
                t[a * l + b]
            } else {
                t[b * l + a]
            }
    };

    let mut belief = energy.unary_table().to_vec();
    let mut message = vec![0.0; l];
    for &v in order.iter().rev() {
        let Some((u, e)) = parent[v] else { continue };
        for (b, m) in message.iter_mut().enumerate() {
            *m = (0..l)
                .map(|a| belief[v * l + a] + cost(v, e, a, b))
                .fold(f64::INFINITY, f64::min);
        }
        for b in 0..l {
            belief[u * l + b] += message[b];
        }
    }

    let mut labels = vec![0usize; n];
    let mut scratch = vec![0.0; l];
    for &v in &order {
        labels[v] = match parent[v] {
            None => argmin(&belief[v * l..(v + 1) * l]),
            Some((u, e)) => {
                let xu = labels[u];
                for (a, s) in scratch.iter_mut().enumerate() {
                    *s = belief[v * l + a] + cost(v, e, a, xu);
                }
                argmin(&scratch)
            }
        };
    }
    Ok(Labeling::new(labels))
}
