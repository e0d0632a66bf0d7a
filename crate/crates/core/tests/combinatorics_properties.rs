use proptest::prelude::*;
use rig_lab::combinatorics::{balancedness, enumerate_maximal_cliques, maximal_cliques_by_subsets, BipartiteView};
use rig_lab::Graph;

fn graph(n: usize, bits: &[bool]) -> Graph {
    let mut g = Graph::empty(n);
    let mut it = bits.iter().cycle();
    for u in 0..n {
        for v in u + 1..n {
            if *it.next().unwrap() {
                g.add_edge(u, v);
            }
        }
    }
    g
}

fn subsets(m: usize, r: usize) -> Vec<Vec<usize>> {
    (0u32..1 << m).filter(|x| x.count_ones() as usize == r).map(|x| (0..m).filter(|&i| x >> i & 1 == 1).collect()).collect()
}

/// Direct double loop over admissible pairs, with no caching.
fn brute_balancedness(g: &Graph, left: &[usize], right: &[usize], p: f64, r: usize) -> f64 {
    let w = |u: usize, v: usize| if g.has_edge(u, v) { ((1.0 - p) / p).sqrt() } else { -(p / (1.0 - p)).sqrt() };
    let all = subsets(left.len(), r);
    let mut best: f64 = 0.0;
    for s in &all {
        for t in &all {
            let shared = s.iter().filter(|i| t.contains(i)).count();
            if 2 * (r - shared) < 3 {
                continue;
            }
            let corr: f64 = right
                .iter()
                .map(|&v| s.iter().map(|&i| w(left[i], v)).product::<f64>() * t.iter().map(|&i| w(left[i], v)).product::<f64>())
                .sum();
            best = best.max(corr.abs());
        }
    }
    best
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(60))]

    #[test]
    fn maximal_cliques_match_subset_filter(n in 1usize..13, bits in prop::collection::vec(any::<bool>(), 1..80), min in 1usize..5) {
        let g = graph(n, &bits);
        let mut fast = enumerate_maximal_cliques(&g, min, 100).unwrap();
        fast.sort();
        prop_assert_eq!(fast, maximal_cliques_by_subsets(&g, min));
    }

    #[test]
    fn balancedness_matches_double_loop(a in 3usize..7, b in 1usize..25, bits in prop::collection::vec(any::<bool>(), 1..200), p in 0.1f64..0.9, r in 1usize..3) {
        let g = graph(a + b, &bits);
        let left: Vec<usize> = (0..a).collect();
        let right: Vec<usize> = (a..a + b).collect();
        let h = BipartiteView::new(&g, left.clone(), right.clone()).unwrap();
        let fast = balancedness(&h, p, r, u64::MAX).unwrap();
        let slow = brute_balancedness(&g, &left, &right, p, r);
        prop_assert!((fast.delta_max - slow).abs() <= 1e-9 * (1.0 + slow), "{} vs {}", fast.delta_max, slow);

        // Reordering the left side does not change the maximum.
        let reversed: Vec<usize> = left.iter().rev().copied().collect();
        let h_rev = BipartiteView::new(&g, reversed, right).unwrap();
        let again = balancedness(&h_rev, p, r, u64::MAX).unwrap();
        prop_assert!((again.delta_max - fast.delta_max).abs() <= 1e-9 * (1.0 + slow));
    }
}
