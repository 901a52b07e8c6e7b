mod common;

use common::*;
use mrf_core::energy::unary_strength;
use mrf_core::moves::{build_expansion, fuse, truncate_to_submodular};
use mrf_core::proposals::{approximate_edges, restrict_energy, EdgeSubset};
use mrf_core::qpbo::qpbo_solve;
use mrf_core::{edge_is_submodular, term_is_metric, BinaryEnergy, DiscreteEnergy, GraphTopology};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn instance(seed: u64, n: usize, l: usize, density: f64) -> DiscreteEnergy {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let edges = random_edges(&mut rng, n, density);
    random_energy(&mut rng, n, l, edges)
}

proptest! {
    #![proptest_config(ProptestConfig {
        cases: 64,
        failure_persistence: None,
        ..ProptestConfig::default()
    })]

    #[test]
    fn normal_form_preserves_energy(seed: u64, n in 1usize..=4, l in 1usize..=4, density in 0.0f64..1.0) {
        let e = instance(seed, n, l, density);
        let nf = e.to_normal_form();
        prop_assert_eq!(nf.lambda(), 1.0);
        for x in all_labelings(n, l) {
            let (a, b) = (e.evaluate(&x).unwrap(), nf.evaluate(&x).unwrap());
            prop_assert!((a - b).abs() < 1e-9, "{} vs {}", a, b);
        }
        for p in 0..n {
            let m = nf.unary(p).iter().cloned().fold(f64::INFINITY, f64::min);
            prop_assert!((0.0..=1e-12).contains(&m));
        }
        for k in 0..nf.edge_count() {
            let t = nf.pairwise(k);
            for i in 0..l {
                let row = (0..l).map(|j| t[i * l + j]).fold(f64::INFINITY, f64::min);
                let col = (0..l).map(|j| t[j * l + i]).fold(f64::INFINITY, f64::min);
                prop_assert!((0.0..=1e-12).contains(&row));
                prop_assert!((0.0..=1e-12).contains(&col));
            }
        }
    }

    #[test]
    fn edge_order_does_not_matter(seed: u64, n in 2usize..=6, l in 2usize..=3) {
        let e = instance(seed, n, l, 0.6);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 1);
        let mut order: Vec<usize> = (0..e.edge_count()).collect();
        for i in (1..order.len()).rev() {
            order.swap(i, rng.random_range(0..=i));
        }
        let edges = order.iter().map(|&k| e.topology().edge(k)).collect();
        let pairwise = order.iter().flat_map(|&k| e.pairwise(k).to_vec()).collect();
        let shuffled = DiscreteEnergy::new(
            GraphTopology::new(n, edges).unwrap(), l, e.unary_table().to_vec(), pairwise, e.lambda(),
        ).unwrap();
        prop_assert_eq!(&shuffled, &e);
    }

    #[test]
    fn submodularity_agrees_with_metric_test(a in -2.0f64..2.0, b in -2.0f64..2.0) {
        let table = [0.0, a, b, 0.0];
        let topo = GraphTopology::new(2, vec![(0, 1)]).unwrap();
        let e = DiscreteEnergy::new(topo, 2, vec![0.0; 4], table.to_vec(), 1.0).unwrap();
        let binary = BinaryEnergy::from_energy(e).unwrap();
        prop_assert_eq!(edge_is_submodular(&binary, 0), term_is_metric(&table, 2));
    }

    #[test]
    fn full_restriction_is_identity(seed: u64, n in 1usize..=5) {
        let e = instance(seed, n, 3, 0.5);
        let r = restrict_energy(&e, &EdgeSubset::all(e.edge_count()));
        prop_assert_eq!(&r, &e);
        let empty = restrict_energy(&e, &EdgeSubset::empty());
        for x in all_labelings(n, 3).iter().take(50) {
            let unary: f64 = x.iter().enumerate().map(|(p, &i)| e.unary(p)[i]).sum();
            prop_assert!((empty.evaluate(x).unwrap() - unary - e.constant()).abs() < 1e-12);
        }
    }

    #[test]
    fn approximation_size_rule(m in 0usize..500, rho in 0.0f64..=1.0, seed: u64) {
        let s = approximate_edges(m, rho, &mut ChaCha8Rng::seed_from_u64(seed));
        prop_assert_eq!(s.len(), (rho * m as f64).round() as usize);
        prop_assert!(s.indices().windows(2).all(|w| w[0] < w[1]));
        prop_assert!(s.indices().iter().all(|&k| k < m));
    }

    #[test]
    fn fusion_never_increases_energy(seed: u64, n in 1usize..=12, l in 2usize..=4) {
        let e = instance(seed, n, l, 0.4);
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(7));
        let cur = random_labeling(&mut rng, n, l);
        let pro = random_labeling(&mut rng, n, l);
        let out = fuse(&e, &cur, &pro).unwrap();
        prop_assert!(out.energy <= e.evaluate(&cur).unwrap() + 1e-9);
        prop_assert_eq!(out.energy, e.evaluate(&out.labeling).unwrap());
    }

    #[test]
    fn truncation_only_touches_violating_edges(seed: u64, n in 2usize..=8) {
        let e = instance(seed, n, 3, 0.6);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cur = random_labeling(&mut rng, n, 3);
        let b = build_expansion(&e, &cur, rng.random_range(0..3)).unwrap();
        let t = truncate_to_submodular(&b);
        for k in 0..b.edge_count() {
            prop_assert!(edge_is_submodular(&t, k));
            if edge_is_submodular(&b, k) {
                prop_assert_eq!(t.energy().pairwise(k), b.energy().pairwise(k));
            }
        }
        prop_assert_eq!(qpbo_solve(&t).partial.labeling_rate(), 1.0);
    }

    #[test]
    fn strength_scales_inversely_with_lambda(seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let e = frustrated_energy(&mut rng, 9, 2, grid_edges(3), 1.0);
        let doubled = DiscreteEnergy::new(
            e.topology().clone(), 2, e.unary_table().to_vec(), e.pairwise_table().to_vec(), 2.0,
        ).unwrap();
        let (a, b) = (unary_strength(&e).unwrap(), unary_strength(&doubled).unwrap());
        prop_assert!((a - 2.0 * b).abs() < 1e-9 * a.abs().max(1.0));
    }
}
