#![allow(dead_code)]

use mrf_core::{DiscreteEnergy, GraphTopology, Labeling};
use rand::Rng;

/// Every labeling of `n` nodes with `l` labels, node 0 most significant.
pub fn all_labelings(n: usize, l: usize) -> Vec<Labeling> {
    let total = l.pow(n as u32);
    (0..total)
        .map(|mut k| {
            let mut x = vec![0; n];
            for p in (0..n).rev() {
                x[p] = k % l;
                k /= l;
            }
            Labeling::new(x)
        })
        .collect()
}

pub fn random_labeling<R: Rng>(rng: &mut R, n: usize, l: usize) -> Labeling {
    Labeling::new((0..n).map(|_| rng.random_range(0..l)).collect())
}

/// Random graph where each pair is linked with probability `density`.
pub fn random_edges<R: Rng>(rng: &mut R, n: usize, density: f64) -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    for p in 0..n {
        for q in p + 1..n {
            if rng.random::<f64>() < density {
                edges.push((p, q));
            }
        }
    }
    edges
}

/// Tables with entries uniform in `[-1, 1)`; no structure imposed.
pub fn random_energy<R: Rng>(
    rng: &mut R,
    n: usize,
    l: usize,
    edges: Vec<(usize, usize)>,
) -> DiscreteEnergy {
    let m = edges.len();
    let unary = (0..n * l).map(|_| rng.random_range(-1.0..1.0)).collect();
    let pairwise = (0..m * l * l)
        .map(|_| rng.random_range(-1.0..1.0))
        .collect();
    let lambda = rng.random_range(0.5..2.0);
    DiscreteEnergy::new(
        GraphTopology::new(n, edges).unwrap(),
        l,
        unary,
        pairwise,
        lambda,
    )
    .unwrap()
}

/// Binary energy whose every table satisfies `t00 + t11 <= t01 + t10`.
pub fn random_submodular<R: Rng>(
    rng: &mut R,
    n: usize,
    edges: Vec<(usize, usize)>,
) -> DiscreteEnergy {
    let m = edges.len();
    let unary = (0..2 * n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mut pairwise = Vec::with_capacity(4 * m);
    for _ in 0..m {
        let (a, b, c): (f64, f64, f64) = (
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        );
        let d = b + c - a - rng.random_range(0.0..1.0);
        pairwise.extend([a, b, c, d]);
    }
    DiscreteEnergy::new(
        GraphTopology::new(n, edges).unwrap(),
        2,
        unary,
        pairwise,
        1.0,
    )
    .unwrap()
}

/// Random forest in which every node's parent has a smaller index.
// Lazy `then` keeps the parent draw conditional, which the fixed seeds rely on.
#[allow(clippy::filter_map_bool_then)]
pub fn random_heap_forest<R: Rng>(rng: &mut R, n: usize, detach: f64) -> Vec<(usize, usize)> {
    (1..n)
        .filter_map(|q| (rng.random::<f64>() >= detach).then(|| (rng.random_range(0..q), q)))
        .collect()
}

/// Energy with small integer costs, so ties are common and sums are exact.
pub fn integer_energy<R: Rng>(
    rng: &mut R,
    n: usize,
    l: usize,
    edges: Vec<(usize, usize)>,
) -> DiscreteEnergy {
    let m = edges.len();
    let unary = (0..n * l).map(|_| rng.random_range(0..4) as f64).collect();
    let pairwise = (0..m * l * l)
        .map(|_| rng.random_range(-2..3) as f64)
        .collect();
    DiscreteEnergy::new(
        GraphTopology::new(n, edges).unwrap(),
        l,
        unary,
        pairwise,
        1.0,
    )
    .unwrap()
}

/// Binary instance in the style of the synthetic test bed: unaries `U(0,1)`,
/// off-diagonal couplings `+-gamma`.
pub fn frustrated_energy<R: Rng>(
    rng: &mut R,
    n: usize,
    l: usize,
    edges: Vec<(usize, usize)>,
    lambda: f64,
) -> DiscreteEnergy {
    let m = edges.len();
    let unary = (0..n * l).map(|_| rng.random::<f64>()).collect();
    let mut pairwise = Vec::with_capacity(m * l * l);
    for _ in 0..m {
        let g: f64 = rng.random();
        let off = if rng.random::<bool>() { g } else { -g };
        for i in 0..l {
            for j in 0..l {
                pairwise.push(if i == j { 0.0 } else { off });
            }
        }
    }
    DiscreteEnergy::new(
        GraphTopology::new(n, edges).unwrap(),
        l,
        unary,
        pairwise,
        lambda,
    )
    .unwrap()
}

pub fn grid_edges(side: usize) -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    for r in 0..side {
        for c in 0..side {
            let p = r * side + c;
            if c + 1 < side {
                edges.push((p, p + 1));
            }
            if r + 1 < side {
                edges.push((p, p + side));
            }
        }
    }
    edges
}
