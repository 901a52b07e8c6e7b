//! Binary move reductions: expansion and fusion, applying QPBO output, and
//! truncation of non-submodular terms.

use crate::energy::{BinaryEnergy, DiscreteEnergy, Labeling};
use crate::error::{invalid, Result};
use crate::qpbo::{qpbo_solve, PartialLabeling};

/// Binary energy over `y` where node `p` takes `candidates[p][y_p]`.
fn reduce(energy: &DiscreteEnergy, candidates: Vec<[usize; 2]>) -> BinaryEnergy {
    let l = energy.label_count();
    let mut unary = Vec::with_capacity(2 * candidates.len());
    for (p, c) in candidates.iter().enumerate() {
        let u = energy.unary(p);
        unary.push(u[c[0]]);
        unary.push(u[c[1]]);
    }
    let topo = energy.shared_topology();
    let mut pairwise = Vec::with_capacity(4 * topo.edge_count());
    for (e, &(p, q)) in topo.edges().iter().enumerate() {
        let t = energy.pairwise(e);
        let (cp, cq) = (candidates[p], candidates[q]);
        pairwise.push(t[cp[0] * l + cq[0]]);
        pairwise.push(t[cp[0] * l + cq[1]]);
        pairwise.push(t[cp[1] * l + cq[0]]);
        pairwise.push(t[cp[1] * l + cq[1]]);
    }
    let reduced = DiscreteEnergy::from_parts(
        topo.clone(),
        2,
        unary,
        pairwise,
        energy.lambda(),
        energy.constant(),
    );
    BinaryEnergy::from_parts(reduced, candidates)
}

/// Expansion move: each node keeps its current label (`y = 0`) or switches to `alpha` (`y = 1`).
pub fn build_expansion(
    energy: &DiscreteEnergy,
    current: &Labeling,
    alpha: usize,
) -> Result<BinaryEnergy> {
    current.validate(energy.node_count(), energy.label_count())?;
    if alpha >= energy.label_count() {
        return invalid(format!(
            "expansion label {alpha} exceeds label count {}",
            energy.label_count()
        ));
    }
    Ok(reduce(
        energy,
        current.iter().map(|&c| [c, alpha]).collect(),
    ))
}

/// Fusion move: each node keeps its current label (`y = 0`) or takes the proposal's (`y = 1`).
pub fn build_fusion(
    energy: &DiscreteEnergy,
    current: &Labeling,
    proposal: &Labeling,
) -> Result<BinaryEnergy> {
    current.validate(energy.node_count(), energy.label_count())?;
    proposal.validate(energy.node_count(), energy.label_count())?;
    Ok(reduce(
        energy,
        current
            .iter()
            .zip(proposal.iter())
            .map(|(&c, &p)| [c, p])
            .collect(),
    ))
}

/// Takes the proposal label where QPBO chose 1 and keeps the current label elsewhere.
pub fn apply_partial(
    current: &Labeling,
    proposal: &Labeling,
    partial: &PartialLabeling,
) -> Labeling {
    assert_eq!(current.len(), proposal.len());
    assert_eq!(current.len(), partial.len());
    Labeling::new(
        current
            .iter()
            .zip(proposal.iter())
            .zip(partial.values())
            .map(|((&c, &p), v)| if *v == Some(true) { p } else { c })
            .collect(),
    )
}

/// Solves a binary move with QPBO, fixing unlabeled nodes to `y = 0`, and decodes it.
pub(crate) fn solve_move(binary: &BinaryEnergy) -> (Labeling, f64) {
    let sol = qpbo_solve(binary);
    let rate = sol.partial.labeling_rate();
    let y = sol.partial.complete(false);
    (binary.decode(&y), rate)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FuseOutcome {
    pub labeling: Labeling,
    pub energy: f64,
    /// Energy of the proposal on the original problem.
    pub proposal_energy: f64,
    /// Fraction of nodes QPBO labeled in the fusion subproblem.
    pub labeling_rate: f64,
}

/// Fuses `current` with `proposal`. The result never has higher energy than `current`.
pub fn fuse(
    energy: &DiscreteEnergy,
    current: &Labeling,
    proposal: &Labeling,
) -> Result<FuseOutcome> {
    let binary = build_fusion(energy, current, proposal)?;
    let (fused, labeling_rate) = solve_move(&binary);
    let current_energy = energy.energy_of(current);
    let fused_energy = energy.energy_of(&fused);
    // Persistency makes this hold exactly up to rounding in the cut.
    let (labeling, energy_value) = if fused_energy <= current_energy {
        (fused, fused_energy)
    } else {
        (current.clone(), current_energy)
    };
    Ok(FuseOutcome {
        labeling,
        energy: energy_value,
        proposal_energy: energy.energy_of(proposal),
        labeling_rate,
    })
}

/// Makes every pairwise term submodular by raising `t01` and `t10` by half
/// the violation each. Submodular terms are left untouched.
pub fn truncate_to_submodular(binary: &BinaryEnergy) -> BinaryEnergy {
    let (energy, candidates) = binary.clone().into_parts();
    let mut pairwise = energy.pairwise_table().to_vec();
    for t in pairwise.chunks_exact_mut(4) {
        let violation = (t[0] + t[3]) - (t[1] + t[2]);
        if violation > 0.0 {
            t[1] += 0.5 * violation;
            t[2] += 0.5 * violation;
            // Rounding can leave the sum a hair short.
            while t[0] + t[3] > t[1] + t[2] {
                t[2] = t[2].next_up();
            }
        }
    }
    let truncated = DiscreteEnergy::from_parts(
        energy.shared_topology().clone(),
        2,
        energy.unary_table().to_vec(),
        pairwise,
        energy.lambda(),
        energy.constant(),
    );
    BinaryEnergy::from_parts(truncated, candidates)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::{edge_is_submodular, GraphTopology};

    fn tiny(l: usize) -> DiscreteEnergy {
        let topo = GraphTopology::new(3, vec![(0, 1), (1, 2), (0, 2)]).unwrap();
        let unary = (0..3 * l).map(|k| ((k * 7) % 5) as f64 * 0.3).collect();
        let pairwise = (0..3 * l * l)
            .map(|k| ((k * 11) % 7) as f64 * 0.25 - 0.6)
            .collect();
        DiscreteEnergy::new(topo, l, unary, pairwise, 1.5).unwrap()
    }

    fn all_binary(n: usize) -> impl Iterator<Item = Labeling> {
        (0..1usize << n).map(move |bits| Labeling::new((0..n).map(|p| (bits >> p) & 1).collect()))
    }

    #[test]
    fn expansion_on_all_alpha_is_constant() {
        let e = tiny(3);
        let cur = Labeling::constant(3, 2);
        let b = build_expansion(&e, &cur, 2).unwrap();
        let values: Vec<f64> = all_binary(3).map(|y| b.evaluate(&y).unwrap()).collect();
        assert!(values.iter().all(|&v| v == values[0]));
    }

    #[test]
    fn expansion_matches_original_energy() {
        let e = tiny(3);
        let cur = Labeling::new(vec![0, 1, 2]);
        let b = build_expansion(&e, &cur, 1).unwrap();
        for y in all_binary(3) {
            let x = b.decode(&y);
            assert_eq!(b.evaluate(&y).unwrap(), e.evaluate(&x).unwrap());
        }
    }

    #[test]
    fn expansion_without_edges_has_no_pairwise() {
        let topo = GraphTopology::new(2, vec![]).unwrap();
        let e = DiscreteEnergy::new(topo, 3, vec![0.5; 6], vec![], 1.0).unwrap();
        let b = build_expansion(&e, &Labeling::zeros(2), 1).unwrap();
        assert_eq!(b.edge_count(), 0);
    }

    #[test]
    fn expansion_rejects_bad_alpha() {
        let e = tiny(3);
        assert!(build_expansion(&e, &Labeling::zeros(3), 3).is_err());
    }

    #[test]
    fn fusion_with_constant_proposal_is_expansion() {
        let e = tiny(4);
        let cur = Labeling::new(vec![3, 0, 1]);
        let f = build_fusion(&e, &cur, &Labeling::constant(3, 2)).unwrap();
        let x = build_expansion(&e, &cur, 2).unwrap();
        assert_eq!(f, x);
    }

    #[test]
    fn fusion_with_itself_is_constant() {
        let e = tiny(3);
        let cur = Labeling::new(vec![1, 2, 0]);
        let f = build_fusion(&e, &cur, &cur).unwrap();
        let v0 = f.evaluate(&Labeling::zeros(3)).unwrap();
        assert!(all_binary(3).all(|y| f.evaluate(&y).unwrap() == v0));
    }

    #[test]
    fn fusion_dimension_mismatch() {
        let e = tiny(3);
        assert!(build_fusion(&e, &Labeling::zeros(3), &Labeling::zeros(2)).is_err());
    }

    #[test]
    fn apply_partial_rules() {
        let cur = Labeling::new(vec![0, 1, 2]);
        let pro = Labeling::new(vec![3, 4, 5]);
        assert_eq!(
            apply_partial(&cur, &pro, &PartialLabeling::unlabeled(3)),
            cur
        );
        assert_eq!(
            apply_partial(&cur, &pro, &PartialLabeling::new(vec![Some(true); 3])),
            pro
        );
        let mixed = PartialLabeling::new(vec![Some(true), None, Some(false)]);
        assert_eq!(apply_partial(&cur, &pro, &mixed).as_slice(), &[3, 1, 2]);
    }

    #[test]
    fn fuse_identity() {
        let e = tiny(3);
        let cur = Labeling::new(vec![2, 0, 1]);
        let out = fuse(&e, &cur, &cur).unwrap();
        assert_eq!(out.labeling, cur);
        assert_eq!(out.energy, e.evaluate(&cur).unwrap());
    }

    fn binary_with_table(t: [f64; 4]) -> BinaryEnergy {
        let topo = GraphTopology::new(2, vec![(0, 1)]).unwrap();
        BinaryEnergy::from_energy(
            DiscreteEnergy::new(topo, 2, vec![0.0; 4], t.to_vec(), 1.0).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn truncation_rules() {
        let sub = binary_with_table([0.0, 1.0, 1.0, 0.0]);
        assert_eq!(truncate_to_submodular(&sub), sub);
        let zero = binary_with_table([0.0; 4]);
        assert_eq!(truncate_to_submodular(&zero), zero);

        let anti = binary_with_table([1.0, 0.0, 0.0, 1.0]);
        let t = truncate_to_submodular(&anti);
        assert_eq!(t.energy().pairwise(0), &[1.0, 1.0, 1.0, 1.0]);
        assert!(edge_is_submodular(&t, 0));
    }

    #[test]
    fn truncation_survives_awkward_rounding() {
        let b = binary_with_table([0.1, 0.0, 0.2, 0.7]);
        let t = truncate_to_submodular(&b);
        assert!(edge_is_submodular(&t, 0));
    }
}
