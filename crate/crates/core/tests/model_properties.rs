use proptest::prelude::*;
use rig_lab::model::{densify, sample_rig, InstanceFile, RigParams};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn planted_sets_are_cliques(n in 2usize..120, d in 1usize..12, p in 0.05f64..0.9, qf in 0.0f64..0.95, seed: u64) {
        let inst = sample_rig(RigParams::new(n, d, p, p * qf, seed)).unwrap();
        for s in inst.cliques() {
            prop_assert!(inst.graph.is_clique(&s));
        }
    }

    #[test]
    fn densify_keeps_edges_and_labels(n in 2usize..100, d in 1usize..8, p in 0.05f64..0.45, qf in 0.0f64..0.9, lift in 0.0f64..1.0, seed: u64) {
        let inst = sample_rig(RigParams::new(n, d, p, p * qf, seed)).unwrap();
        let p_prime = p + lift * (0.5 - p);
        let dense = densify(&inst, p_prime).unwrap();
        prop_assert_eq!(inst.clique_bits(), dense.clique_bits());
        for (u, v) in inst.graph.edges() {
            prop_assert!(dense.graph.has_edge(u, v));
        }
    }

    #[test]
    fn serialization_is_deterministic_and_round_trips(n in 1usize..60, d in 1usize..6, seed: u64) {
        let a = sample_rig(RigParams::new(n, d, 0.5, 0.1, seed)).unwrap();
        let b = sample_rig(RigParams::new(n, d, 0.5, 0.1, seed)).unwrap();
        let text = InstanceFile::from_instance(&a).to_json();
        prop_assert_eq!(&text, &InstanceFile::from_instance(&b).to_json());
        let back = InstanceFile::from_json(&text).unwrap().into_instance().unwrap();
        prop_assert_eq!(InstanceFile::from_instance(&back).to_json(), text);
    }
}

/// One fixed pair over 10⁵ seeds; χ² with one degree of freedom at significance 10⁻³.
#[test]
fn pair_marginal_is_p() {
    const CRITICAL: f64 = 10.828;
    for (d, p, q) in [(1, 0.5, 0.0), (16, 0.5, 0.2), (64, 0.3, 0.1)] {
        let trials = 100_000u64;
        let hits = (0..trials).filter(|&s| sample_rig(RigParams::new(2, d, p, q, s)).unwrap().graph.has_edge(0, 1)).count();
        let expected = p * trials as f64;
        let miss = (trials as f64 - expected, trials as f64 - hits as f64);
        let chi2 = (hits as f64 - expected).powi(2) / expected + (miss.1 - miss.0).powi(2) / miss.0;
        assert!(chi2 < CRITICAL, "d={d} p={p} q={q}: chi2 {chi2:.2}");
    }
}

#[test]
fn planted_sizes_concentrate() {
    for seed in 0..100 {
        let inst = sample_rig(RigParams::new(2000, 16, 0.5, 0.2, seed)).unwrap();
        let k = inst.k();
        for s in inst.cliques() {
            let size = s.len() as f64;
            assert!((0.8 * k..=1.2 * k).contains(&size), "seed {seed}: |S| = {size}, k = {k:.1}");
        }
    }
}
