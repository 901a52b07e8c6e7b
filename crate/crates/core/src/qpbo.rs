//! Roof-duality (QPBO) partial optimization of binary pairwise energies.
//!
//! Every variable `p` gets two graph nodes, `p` and its negation `p'`. Each
//! term of the energy is rewritten as a nonnegative combination of products of
//! literals and every product is split in half over the two mirrored arcs
//! that encode it. A minimum cut of the doubled graph gives the roof-dual lower
//! bound. Variables whose literal node is reachable from the source in the
//! residual graph receive a persistent label; the rest stay unlabeled. When
//! every term is submodular the cut itself is optimal and labels every node.

use crate::energy::{BinaryEnergy, DiscreteEnergy, Labeling};
use crate::error::{invalid, Result};
use crate::maxflow::FlowNetwork;

/// Per-node value in `{0, 1, unlabeled}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartialLabeling(Vec<Option<bool>>);

impl PartialLabeling {
    pub fn new(values: Vec<Option<bool>>) -> Self {
        Self(values)
    }

    pub fn unlabeled(node_count: usize) -> Self {
        Self(vec![None; node_count])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, p: usize) -> Option<bool> {
        self.0[p]
    }

    pub fn values(&self) -> &[Option<bool>] {
        &self.0
    }

    pub fn labeled_count(&self) -> usize {
        self.0.iter().filter(|v| v.is_some()).count()
    }

    /// Fraction of labeled nodes; 1 for an empty labeling.
    pub fn labeling_rate(&self) -> f64 {
        if self.0.is_empty() {
            return 1.0;
        }
        self.labeled_count() as f64 / self.0.len() as f64
    }

    /// Binary labeling with unlabeled nodes set to `fill`.
    pub fn complete(&self, fill: bool) -> Labeling {
        Labeling::new(
            self.0
                .iter()
                .map(|v| usize::from(v.unwrap_or(fill)))
                .collect(),
        )
    }

    /// Copies the labeled entries over a reference binary labeling.
    pub fn overwrite(&self, reference: &[usize]) -> Labeling {
        Labeling::new(
            self.0
                .iter()
                .zip(reference)
                .map(|(v, &r)| v.map_or(r, usize::from))
                .collect(),
        )
    }
}

pub fn labeling_rate(partial: &PartialLabeling) -> f64 {
    partial.labeling_rate()
}

#[derive(Debug, Clone, PartialEq)]
pub struct QpboSolution {
    pub partial: PartialLabeling,
    pub lower_bound: f64,
}

/// Runs QPBO on a binary energy.
pub fn qpbo_solve(binary: &BinaryEnergy) -> QpboSolution {
    solve_two_label(binary.energy())
}

/// Runs QPBO on a plain energy, which must have exactly two labels.
pub fn qpbo_solve_energy(energy: &DiscreteEnergy) -> Result<QpboSolution> {
    if energy.label_count() != 2 {
        return invalid(format!(
            "QPBO needs a two-label energy, got {} labels",
            energy.label_count()
        ));
    }
    Ok(solve_two_label(energy))
}

fn solve_two_label(energy: &DiscreteEnergy) -> QpboSolution {
    let n = energy.node_count();
    let lambda = energy.lambda();
    let neg = |p: usize| p + n;

    let mut constant = energy.constant();
    // Coefficient of x_p in the linear part.
    let mut linear = vec![0.0; n];
    for (p, lin) in linear.iter_mut().enumerate() {
        let u = energy.unary(p);
        constant += u[0];
        *lin = u[1] - u[0];
    }

    let mut net = FlowNetwork::new(2 * n);
    let mut submodular = true;
    for (e, &(p, q)) in energy.topology().edges().iter().enumerate() {
        let t = energy.pairwise(e);
        let (a, b, c, d) = (lambda * t[0], lambda * t[1], lambda * t[2], lambda * t[3]);
        constant += a;
        linear[p] += c - a;
        // Classify on the unscaled table so the decision matches `edge_is_submodular`.
        if t[0] + t[3] <= t[1] + t[2] {
            // a + (c-a) x_p + (d-c) x_q + w (1-x_p) x_q
            linear[q] += d - c;
            let w = 0.5 * (b + c - a - d);
            if w > 0.0 {
                net.add_edge(p, q, w, 0.0);
                net.add_edge(neg(q), neg(p), w, 0.0);
            }
        } else {
            // a + (c-a) x_p + (b-a) x_q + w x_p x_q
            submodular = false;
            linear[q] += b - a;
            let w = 0.5 * (a + d - b - c);
            if w <= 0.0 {
                continue;
            }
            net.add_edge(neg(q), p, w, 0.0);
            net.add_edge(neg(p), q, w, 0.0);
        }
    }

    for (p, &c) in linear.iter().enumerate() {
        if c > 0.0 {
            // c x_p: paid when p is on the sink side, or p' on the source side.
            net.add_terminal(p, 0.5 * c, 0.0);
            net.add_terminal(neg(p), 0.0, 0.5 * c);
        } else if c < 0.0 {
            // c x_p = c + |c| (1 - x_p)
            constant += c;
            net.add_terminal(p, 0.0, -0.5 * c);
            net.add_terminal(neg(p), -0.5 * c, 0.0);
        }
    }

    let flow = net.max_flow();
    let partial = if submodular {
        // The two copies decouple and the first one alone is a min cut of the
        // energy, so every node gets its label from that side (ties go to 1).
        (0..n).map(|p| Some(!flow.source_side[p])).collect()
    } else {
        (0..n)
            .map(|p| match (flow.source_side[p], flow.source_side[neg(p)]) {
                (true, false) => Some(false),
                (false, true) => Some(true),
                _ => None,
            })
            .collect()
    };

    QpboSolution {
        partial: PartialLabeling(partial),
        lower_bound: constant + flow.value,
    }
}
