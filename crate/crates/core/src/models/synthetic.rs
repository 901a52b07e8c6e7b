use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::grid::Structure;
use crate::energy::DiscreteEnergy;
use crate::error::{invalid, MrfError, Result};

/// One instance of the synthetic multi-label test bed.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub structure: Structure,
    /// Grid side, or node count for `Full`.
    pub size: usize,
    pub label_count: usize,
    pub lambda: f64,
    /// Probability that an edge gets a non-metric (negative) coupling.
    pub non_metric_rate: f64,
    pub seed: u64,
    /// Use exactly `round(rate * m)` non-metric edges instead of i.i.d. draws.
    pub exact_count: bool,
}

impl SyntheticSpec {
    pub fn new(
        structure: Structure,
        size: usize,
        label_count: usize,
        lambda: f64,
        non_metric_rate: f64,
    ) -> Self {
        Self {
            structure,
            size,
            label_count,
            lambda,
            non_metric_rate,
            seed: 0,
            exact_count: false,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_exact_count(mut self, exact: bool) -> Self {
        self.exact_count = exact;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.non_metric_rate) {
            return invalid(format!(
                "non-metric rate {} outside [0, 1]",
                self.non_metric_rate
            ));
        }
        if self.structure == Structure::Grid4 && self.non_metric_rate == 1.0 {
            return invalid("a 4-connected grid cannot be 100% non-metric");
        }
        if self.size < 2 {
            return invalid("size must be at least 2");
        }
        if self.label_count < 2 {
            return invalid("need at least 2 labels");
        }
        if !self.lambda.is_finite() {
            return invalid("lambda must be finite");
        }
        Ok(())
    }

    /// Test-bed name, e.g. `1-50-GRID8` for λ = 1 and a 50% non-metric rate.
    pub fn name(&self) -> String {
        format!(
            "{}-{}-{}",
            self.lambda,
            (self.non_metric_rate * 100.0).round(),
            self.structure
        )
    }
}

/// Unary costs i.i.d. `U(0,1)`; pairwise `0` on the diagonal and `s * gamma` off it,
/// one `gamma ~ U(0,1)` per edge and `s = -1` at the non-metric rate.
pub fn gen_synthetic(spec: &SyntheticSpec) -> Result<DiscreteEnergy> {
    spec.validate()?;
    let topo = spec.structure.topology(spec.size)?;
    let (n, m, l) = (topo.node_count(), topo.edge_count(), spec.label_count);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    let unary: Vec<f64> = (0..n * l).map(|_| rng.random::<f64>()).collect();
    let gammas: Vec<f64> = (0..m).map(|_| rng.random::<f64>()).collect();
    let negative: Vec<bool> = if spec.exact_count {
        let count = ((spec.non_metric_rate * m as f64).round() as usize).min(m);
        let mut flags = vec![false; m];
        for e in index::sample(&mut rng, m, count) {
            flags[e] = true;
        }
        flags
    } else {
        (0..m)
            .map(|_| rng.random::<f64>() < spec.non_metric_rate)
            .collect()
    };

    let mut pairwise = Vec::with_capacity(m * l * l);
    for (&gamma, &neg) in gammas.iter().zip(&negative) {
        let off = if neg { -gamma } else { gamma };
        for i in 0..l {
            for j in 0..l {
                pairwise.push(if i == j { 0.0 } else { off });
            }
        }
    }
    DiscreteEnergy::new(topo, l, unary, pairwise, spec.lambda)
}

/// Binary instance on a `side x side` 4-grid whose unary strength equals `target_strength`.
///
/// Each node pays `k ~ U(0,1)` on one label chosen by a coin flip; each edge pays
/// `s * gamma` when its ends disagree, `gamma ~ U(0,1)`, `s` uniform on `{-1, +1}`.
pub fn gen_binary_characterization<R: Rng + ?Sized>(
    side: usize,
    target_strength: f64,
    rng: &mut R,
) -> Result<DiscreteEnergy> {
    if side < 2 {
        return invalid("side must be at least 2");
    }
    if !(target_strength > 0.0 && target_strength.is_finite()) {
        return invalid("target strength must be positive");
    }
    let topo = Structure::Grid4.topology(side)?;
    let (n, m) = (topo.node_count(), topo.edge_count());

    let mut unary = Vec::with_capacity(2 * n);
    for _ in 0..n {
        let k: f64 = rng.random();
        if rng.random::<bool>() {
            unary.extend([0.0, k]);
        } else {
            unary.extend([k, 0.0]);
        }
    }
    let mut pairwise = Vec::with_capacity(4 * m);
    for _ in 0..m {
        let gamma: f64 = rng.random();
        let off = if rng.random::<bool>() { gamma } else { -gamma };
        pairwise.extend([0.0, off, off, 0.0]);
    }

    let mean_unary = unary.iter().sum::<f64>() / unary.len() as f64;
    let mean_pair = pairwise.iter().map(|v| v.abs()).sum::<f64>() / pairwise.len() as f64;
    if mean_pair == 0.0 {
        return Err(MrfError::DegenerateDenominator);
    }
    let lambda = mean_unary / (target_strength * mean_pair);
    DiscreteEnergy::new(topo, 2, unary, pairwise, lambda)
}
