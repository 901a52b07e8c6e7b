//! Proposals from expansion moves on randomly edge-approximated energies.

use rand::{Rng, RngCore};

use super::approx::{approximate_edges, Restrict};
use crate::energy::{DiscreteEnergy, Labeling};
use crate::moves::{build_expansion, solve_move};

/// Number of inner expansion steps per proposal: `min(5, L)`.
pub fn default_k(label_count: usize) -> usize {
    label_count.min(5)
}

/// One inner step of [`optimize_ga`].
#[derive(Debug, Clone, PartialEq)]
pub struct GaStep {
    pub alpha: usize,
    pub rho: f64,
    pub kept_edges: usize,
    pub labeling_rate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaProposal {
    pub labeling: Labeling,
    pub steps: Vec<GaStep>,
}

/// Runs `k` expansion steps from `x`, each on a fresh random approximation of
/// the expansion energy that keeps `round(rho * |E|)` edges with
/// `rho ~ U(0,1)`. Unlabeled nodes keep their label. The original energy may
/// go up along the way.
pub fn optimize_ga<R: Rng + ?Sized>(
    energy: &DiscreteEnergy,
    x: &Labeling,
    k: usize,
    rng: &mut R,
) -> GaProposal {
    optimize_ga_impl(energy, x, k, &mut OneStream(rng))
}

/// Like [`optimize_ga`] with expansion labels drawn from `label_rng` and
/// `rho` plus edge subsets drawn from `approx_rng`.
pub fn optimize_ga_split<R1: Rng + ?Sized, R2: Rng + ?Sized>(
    energy: &DiscreteEnergy,
    x: &Labeling,
    k: usize,
    label_rng: &mut R1,
    approx_rng: &mut R2,
) -> GaProposal {
    optimize_ga_impl(energy, x, k, &mut TwoStreams(label_rng, approx_rng))
}

trait Streams {
    fn alpha(&mut self, label_count: usize) -> usize;
    fn approx(&mut self) -> &mut dyn RngCore;
}

struct OneStream<'a, R: ?Sized>(&'a mut R);

impl<R: Rng + ?Sized> Streams for OneStream<'_, R> {
    fn alpha(&mut self, label_count: usize) -> usize {
        self.0.random_range(0..label_count)
    }

    fn approx(&mut self) -> &mut dyn RngCore {
        &mut self.0
    }
}

struct TwoStreams<'a, R1: ?Sized, R2: ?Sized>(&'a mut R1, &'a mut R2);

impl<R1: Rng + ?Sized, R2: Rng + ?Sized> Streams for TwoStreams<'_, R1, R2> {
    fn alpha(&mut self, label_count: usize) -> usize {
        self.0.random_range(0..label_count)
    }

    fn approx(&mut self) -> &mut dyn RngCore {
        &mut self.1
    }
}

fn optimize_ga_impl(
    energy: &DiscreteEnergy,
    x: &Labeling,
    k: usize,
    streams: &mut dyn Streams,
) -> GaProposal {
    assert!(k >= 1, "K must be at least 1");
    let mut x = x.clone();
    let mut steps = Vec::with_capacity(k);
    for _ in 0..k {
        let alpha = streams.alpha(energy.label_count());
        let binary = build_expansion(energy, &x, alpha).expect("labeling fits the energy");
        let rho: f64 = streams.approx().random();
        let subset = approximate_edges(energy.edge_count(), rho, streams.approx());
        let (next, labeling_rate) = solve_move(&binary.restrict(&subset));
        steps.push(GaStep {
            alpha,
            rho,
            kept_edges: subset.len(),
            labeling_rate,
        });
        x = next;
    }
    GaProposal { labeling: x, steps }
}
