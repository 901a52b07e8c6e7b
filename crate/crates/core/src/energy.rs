//! Pairwise energy model.
//!
//! An energy over labelings `x` of a graph `G = (V, E)` is
//!
//! ```text
//! E(x) = sum_p unary_p(x_p) + lambda * sum_{(p,q) in E} pairwise_pq(x_p, x_q) + constant
//! ```
//!
//! Labels are `0..L`. Pairwise tables are stored row-major with the row indexed
//! by the label of the lower endpoint `p` of the edge `(p, q)`, `p < q`.

use std::ops::Deref;
use std::sync::Arc;

use crate::error::{invalid, MrfError, Result};

/// Node set size plus an undirected edge list with `p < q` on every edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphTopology {
    node_count: usize,
    edges: Vec<(usize, usize)>,
}

impl GraphTopology {
    pub fn new(node_count: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        if node_count == 0 {
            return invalid("node_count must be positive");
        }
        for &(p, q) in &edges {
            if p >= q {
                return invalid(format!("edge ({p}, {q}) must satisfy p < q"));
            }
            if q >= node_count {
                return invalid(format!(
                    "edge ({p}, {q}) out of range for {node_count} nodes"
                ));
            }
        }
        let mut sorted = edges.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return invalid("duplicate edge in topology");
        }
        Ok(Self { node_count, edges })
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge(&self, e: usize) -> (usize, usize) {
        self.edges[e]
    }

    /// Per-node list of `(neighbor, edge index)`.
    pub fn adjacency(&self) -> Vec<Vec<(usize, usize)>> {
        let mut adj = vec![Vec::new(); self.node_count];
        for (e, &(p, q)) in self.edges.iter().enumerate() {
            adj[p].push((q, e));
            adj[q].push((p, e));
        }
        adj
    }
}

/// One label per node.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Labeling(Vec<usize>);

impl Labeling {
    pub fn new(labels: Vec<usize>) -> Self {
        Self(labels)
    }

    pub fn zeros(node_count: usize) -> Self {
        Self(vec![0; node_count])
    }

    pub fn constant(node_count: usize, label: usize) -> Self {
        Self(vec![label; node_count])
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn as_mut_slice(&mut self) -> &mut [usize] {
        &mut self.0
    }

    pub fn into_vec(self) -> Vec<usize> {
        self.0
    }

    /// Checks the labeling against a node count and label count.
    pub fn validate(&self, node_count: usize, label_count: usize) -> Result<()> {
        if self.0.len() != node_count {
            return invalid(format!(
                "labeling has {} entries, expected {node_count}",
                self.0.len()
            ));
        }
        if let Some((p, &l)) = self.0.iter().enumerate().find(|(_, &l)| l >= label_count) {
            return invalid(format!(
                "label {l} at node {p} exceeds label count {label_count}"
            ));
        }
        Ok(())
    }
}

impl Deref for Labeling {
    type Target = [usize];

    fn deref(&self) -> &[usize] {
        &self.0
    }
}

impl From<Vec<usize>> for Labeling {
    fn from(v: Vec<usize>) -> Self {
        Self(v)
    }
}

/// Multi-label pairwise energy with a uniform label count.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteEnergy {
    topology: Arc<GraphTopology>,
    label_count: usize,
    unary: Vec<f64>,
    pairwise: Vec<f64>,
    lambda: f64,
    constant: f64,
}

impl DiscreteEnergy {
    /// Builds an energy. `unary` holds `node_count * L` entries, `pairwise`
    /// holds `edge_count * L * L` entries aligned with `topology.edges()`.
    ///
    /// Edges are stored sorted by `(p, q)` so evaluation order does not depend
    /// on the order in which they were supplied.
    pub fn new(
        topology: GraphTopology,
        label_count: usize,
        unary: Vec<f64>,
        pairwise: Vec<f64>,
        lambda: f64,
    ) -> Result<Self> {
        if label_count == 0 {
            return invalid("label count must be positive");
        }
        let n = topology.node_count();
        let m = topology.edge_count();
        let l2 = label_count * label_count;
        if unary.len() != n * label_count {
            return invalid(format!(
                "unary has {} entries, expected {}",
                unary.len(),
                n * label_count
            ));
        }
        if pairwise.len() != m * l2 {
            return invalid(format!(
                "pairwise has {} entries, expected {}",
                pairwise.len(),
                m * l2
            ));
        }
        if !lambda.is_finite() || lambda < 0.0 {
            return invalid(format!(
                "lambda must be finite and nonnegative, got {lambda}"
            ));
        }
        if unary.iter().chain(pairwise.iter()).any(|v| !v.is_finite()) {
            return invalid("cost tables contain a non-finite entry");
        }

        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by_key(|&e| topology.edges[e]);
        let (topology, pairwise) = if order.iter().enumerate().all(|(i, &e)| i == e) {
            (topology, pairwise)
        } else {
            let edges = order.iter().map(|&e| topology.edges[e]).collect();
            let mut sorted = Vec::with_capacity(pairwise.len());
            for &e in &order {
                sorted.extend_from_slice(&pairwise[e * l2..(e + 1) * l2]);
            }
            (
                GraphTopology {
                    node_count: n,
                    edges,
                },
                sorted,
            )
        };

        Ok(Self {
            topology: Arc::new(topology),
            label_count,
            unary,
            pairwise,
            lambda,
            constant: 0.0,
        })
    }

    /// Assembles an energy from parts already known to be consistent.
    pub(crate) fn from_parts(
        topology: Arc<GraphTopology>,
        label_count: usize,
        unary: Vec<f64>,
        pairwise: Vec<f64>,
        lambda: f64,
        constant: f64,
    ) -> Self {
        debug_assert_eq!(unary.len(), topology.node_count() * label_count);
        debug_assert_eq!(
            pairwise.len(),
            topology.edge_count() * label_count * label_count
        );
        Self {
            topology,
            label_count,
            unary,
            pairwise,
            lambda,
            constant,
        }
    }

    pub fn with_constant(mut self, constant: f64) -> Result<Self> {
        if !constant.is_finite() {
            return invalid("constant must be finite");
        }
        self.constant = constant;
        Ok(self)
    }

    pub fn topology(&self) -> &GraphTopology {
        &self.topology
    }

    pub(crate) fn shared_topology(&self) -> &Arc<GraphTopology> {
        &self.topology
    }

    pub fn node_count(&self) -> usize {
        self.topology.node_count()
    }

    pub fn edge_count(&self) -> usize {
        self.topology.edge_count()
    }

    pub fn label_count(&self) -> usize {
        self.label_count
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn constant(&self) -> f64 {
        self.constant
    }

    pub fn unary(&self, p: usize) -> &[f64] {
        let l = self.label_count;
        &self.unary[p * l..(p + 1) * l]
    }

    /// Row-major `L x L` table of edge `e`.
    pub fn pairwise(&self, e: usize) -> &[f64] {
        let l2 = self.label_count * self.label_count;
        &self.pairwise[e * l2..(e + 1) * l2]
    }

    pub fn unary_table(&self) -> &[f64] {
        &self.unary
    }

    pub fn pairwise_table(&self) -> &[f64] {
        &self.pairwise
    }

    /// Energy of `x`; fails when `x` does not fit this energy.
    pub fn evaluate(&self, x: &Labeling) -> Result<f64> {
        x.validate(self.node_count(), self.label_count)?;
        Ok(self.energy_of(x))
    }

    /// Energy of a labeling assumed valid. Sums nodes then edges in storage order.
    pub fn energy_of(&self, x: &[usize]) -> f64 {
        let l = self.label_count;
        let mut unary_sum = 0.0;
        for (p, &xp) in x.iter().enumerate() {
            unary_sum += self.unary[p * l + xp];
        }
        let mut pair_sum = 0.0;
        for (e, &(p, q)) in self.topology.edges.iter().enumerate() {
            pair_sum += self.pairwise[e * l * l + x[p] * l + x[q]];
        }
        unary_sum + self.lambda * pair_sum + self.constant
    }

    /// Reparameterization with the same energy on every labeling in which all
    /// unary minima and all pairwise row and column minima are zero. The
    /// coupling weight is folded into the pairwise tables (`lambda = 1`).
    pub fn to_normal_form(&self) -> DiscreteEnergy {
        let l = self.label_count;
        let l2 = l * l;
        let mut unary = self.unary.clone();
        let mut pairwise: Vec<f64> = self.pairwise.iter().map(|v| v * self.lambda).collect();
        let mut constant = self.constant;

        for _ in 0..64 {
            let mut changed = false;
            for (e, &(p, q)) in self.topology.edges.iter().enumerate() {
                let table = &mut pairwise[e * l2..(e + 1) * l2];
                for i in 0..l {
                    let row = &mut table[i * l..(i + 1) * l];
                    let m = row.iter().copied().fold(f64::INFINITY, f64::min);
                    if m != 0.0 {
                        row.iter_mut().for_each(|v| *v -= m);
                        unary[p * l + i] += m;
                        changed = true;
                    }
                }
                for j in 0..l {
                    let m = (0..l)
                        .map(|i| table[i * l + j])
                        .fold(f64::INFINITY, f64::min);
                    if m != 0.0 {
                        (0..l).for_each(|i| table[i * l + j] -= m);
                        unary[q * l + j] += m;
                        changed = true;
                    }
                }
            }
            for p in 0..self.node_count() {
                let row = &mut unary[p * l..(p + 1) * l];
                let m = row.iter().copied().fold(f64::INFINITY, f64::min);
                if m != 0.0 {
                    row.iter_mut().for_each(|v| *v -= m);
                    constant += m;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }

        DiscreteEnergy::from_parts(self.topology.clone(), l, unary, pairwise, 1.0, constant)
    }

    /// Keeps only the listed edges (indices into this energy's edge list,
    /// strictly increasing). Unaries, lambda and the constant are unchanged.
    pub(crate) fn restricted(&self, kept: &[usize]) -> DiscreteEnergy {
        let l2 = self.label_count * self.label_count;
        let edges = kept.iter().map(|&e| self.topology.edges[e]).collect();
        let mut pairwise = Vec::with_capacity(kept.len() * l2);
        for &e in kept {
            pairwise.extend_from_slice(self.pairwise(e));
        }
        let topology = GraphTopology {
            node_count: self.node_count(),
            edges,
        };
        DiscreteEnergy::from_parts(
            Arc::new(topology),
            self.label_count,
            self.unary.clone(),
            pairwise,
            self.lambda,
            self.constant,
        )
    }

    /// Per-node unary argmin, ties toward the smaller label.
    pub fn unary_argmin(&self) -> Labeling {
        let labels = (0..self.node_count())
            .map(|p| argmin(self.unary(p)))
            .collect();
        Labeling(labels)
    }
}

pub(crate) fn argmin(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v < values[best] {
            best = i;
        }
    }
    best
}

/// Mean normal-form unary cost divided by mean normal-form pairwise cost.
/// Lower values mean a harder, more coupling-dominated problem.
pub fn unary_strength(energy: &DiscreteEnergy) -> Result<f64> {
    if energy.edge_count() == 0 {
        return Err(MrfError::UndefinedStrength("energy has no edges".into()));
    }
    let normal = energy.to_normal_form();
    let mean_unary = normal.unary.iter().sum::<f64>() / normal.unary.len() as f64;
    let mean_pairwise = normal.pairwise.iter().sum::<f64>() / normal.pairwise.len() as f64;
    if mean_pairwise == 0.0 {
        return Err(MrfError::UndefinedStrength(
            "mean pairwise cost is zero".into(),
        ));
    }
    Ok(mean_unary / mean_pairwise)
}

/// Whether a row-major `L x L` table satisfies
/// `t(a,a) + t(b,c) <= t(a,c) + t(b,a)` for every label triple.
/// Expansion moves on such a term are always submodular.
pub fn term_is_metric(table: &[f64], label_count: usize) -> bool {
    let l = label_count;
    assert_eq!(table.len(), l * l, "table size does not match label count");
    let t = |i: usize, j: usize| table[i * l + j];
    (0..l).all(|a| (0..l).all(|b| (0..l).all(|c| t(a, a) + t(b, c) <= t(a, c) + t(b, a))))
}

/// `t00 + t11 <= t01 + t10` on a row-major 2x2 table.
pub fn table_is_submodular(table: &[f64]) -> bool {
    table[0] + table[3] <= table[1] + table[2]
}

/// Two-label energy produced by an expansion or fusion reduction. Node `p`
/// at binary value `y` stands for multi-label `candidates[p][y]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryEnergy {
    energy: DiscreteEnergy,
    candidates: Vec<[usize; 2]>,
}

impl BinaryEnergy {
    pub fn new(energy: DiscreteEnergy, candidates: Vec<[usize; 2]>) -> Result<Self> {
        if energy.label_count() != 2 {
            return invalid(format!(
                "binary energy needs 2 labels, got {}",
                energy.label_count()
            ));
        }
        if candidates.len() != energy.node_count() {
            return invalid("provenance must cover every node");
        }
        Ok(Self { energy, candidates })
    }

    /// Wraps a two-label energy with the identity provenance `[0, 1]`.
    pub fn from_energy(energy: DiscreteEnergy) -> Result<Self> {
        let n = energy.node_count();
        Self::new(energy, vec![[0, 1]; n])
    }

    pub(crate) fn from_parts(energy: DiscreteEnergy, candidates: Vec<[usize; 2]>) -> Self {
        debug_assert_eq!(energy.label_count(), 2);
        Self { energy, candidates }
    }

    pub fn energy(&self) -> &DiscreteEnergy {
        &self.energy
    }

    pub fn candidates(&self) -> &[[usize; 2]] {
        &self.candidates
    }

    pub fn node_count(&self) -> usize {
        self.energy.node_count()
    }

    pub fn edge_count(&self) -> usize {
        self.energy.edge_count()
    }

    pub fn evaluate(&self, y: &Labeling) -> Result<f64> {
        self.energy.evaluate(y)
    }

    /// Maps a binary labeling back to the multi-label candidates.
    pub fn decode(&self, y: &[usize]) -> Labeling {
        Labeling(y.iter().zip(&self.candidates).map(|(&b, c)| c[b]).collect())
    }

    pub fn restricted(&self, kept: &[usize]) -> BinaryEnergy {
        BinaryEnergy {
            energy: self.energy.restricted(kept),
            candidates: self.candidates.clone(),
        }
    }

    pub(crate) fn into_parts(self) -> (DiscreteEnergy, Vec<[usize; 2]>) {
        (self.energy, self.candidates)
    }
}

/// Submodularity of one edge of a binary energy.
pub fn edge_is_submodular(binary: &BinaryEnergy, edge: usize) -> bool {
    table_is_submodular(binary.energy().pairwise(edge))
}

/// Normalization used when reporting energies across solvers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RelativeScale {
    /// `100 * (value - best) / (zero_ref - best)`: best maps to 0, the zero labeling to 100.
    Affine,
    /// `value / zero_ref`.
    Ratio,
}

pub fn relative_energy(value: f64, best: f64, zero_ref: f64, scale: RelativeScale) -> Result<f64> {
    match scale {
        RelativeScale::Affine => {
            let span = zero_ref - best;
            if span == 0.0 || !span.is_finite() {
                return Err(MrfError::DegenerateDenominator);
            }
            Ok(100.0 * (value - best) / span)
        }
        RelativeScale::Ratio => {
            if zero_ref == 0.0 || !zero_ref.is_finite() {
                return Err(MrfError::DegenerateDenominator);
            }
            Ok(value / zero_ref)
        }
    }
}
