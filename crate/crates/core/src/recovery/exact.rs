use std::time::Instant;

use log::warn;

use super::{sample_tuples, split_vertices, RecoveryParams, RecoveryReport, ResolvedParams, TupleTrace, TupleVerdict};
use crate::combinatorics::BipartiteView;
use crate::error::{Error, Result};
use crate::graph::{Bits, Graph};
use crate::sos::{build_biclique_axioms, solve, SolveOutcome};

/// Exact recovery: one biclique relaxation per sampled tuple, rounding at
/// `1 − √ε`, degree clean-up at `(1 − 5√ε)k`, and removal of contained sets.
pub fn exact_recovery(graph: &Graph, params: &RecoveryParams) -> Result<RecoveryReport> {
    let start = Instant::now();
    let n = graph.n();
    let res = params.resolve(n)?;
    let mut report = RecoveryReport::new("exact");
    if res.t_clamped {
        report.notes.push(format!("tuple length clamped from {} to {}", res.t_formula, res.t));
    }
    let (u_side, _) = split_vertices(n, params.seed);
    let in_u = Bits::from_indices(n, &u_side);
    let tuples = sample_tuples(n, res.t, res.num_tuples, params.seed);

    let mut found: Vec<Vec<usize>> = vec![];
    for tuple in tuples {
        let trace = process_tuple(graph, params, &res, &in_u, tuple)?;
        if trace.verdict == TupleVerdict::Skipped {
            warn!("tuple {:?} skipped: {}", trace.tuple, trace.reason);
        }
        if trace.verdict == TupleVerdict::Accepted {
            found.push(trace.candidate.clone());
        }
        report.traces.push(trace);
    }
    let skipped = report.count(TupleVerdict::Skipped);
    if skipped > 0 {
        report.notes.push(format!("{skipped} tuples skipped"));
    }
    report.sets = remove_contained(found);
    report.resolved = Some(res);
    report.wall_time = start.elapsed();
    Ok(report)
}

fn process_tuple(
    graph: &Graph,
    params: &RecoveryParams,
    res: &ResolvedParams,
    in_u: &Bits,
    tuple: Vec<usize>,
) -> Result<TupleTrace> {
    let common = graph.common_neighbors(&tuple);
    let (left, right): (Vec<usize>, Vec<usize>) = common.iter().partition(|&v| in_u.contains(v));
    let k_bip = res.k_bip;
    if (left.len() as f64) < k_bip || (right.len() as f64) < k_bip {
        let reason = format!("common neighbourhood sides {}+{} below window {:.2}", left.len(), right.len(), k_bip);
        return Ok(TupleTrace::new(tuple, TupleVerdict::Infeasible, reason));
    }
    let h = BipartiteView::new(graph, left, right)?;
    let (keep_l, keep_r) = if params.peel { peel(&h, k_bip) } else { (vec![true; h.left.len()], vec![true; h.right.len()]) };
    let live_l = keep_l.iter().filter(|&&x| x).count();
    let live_r = keep_r.iter().filter(|&&x| x).count();
    if (live_l as f64) < k_bip || (live_r as f64) < k_bip {
        let reason = format!("peeled residual {live_l}+{live_r} below window {k_bip:.2}");
        return Ok(TupleTrace::new(tuple, TupleVerdict::Infeasible, reason));
    }

    let a = h.left.len();
    let (marginals, how) = if params.witness_shortcut && is_window_biclique(&h, &keep_l, &keep_r, live_l, live_r, k_bip) {
        let m: Vec<f64> = keep_l.iter().chain(&keep_r).map(|&k| if k { 1.0 } else { 0.0 }).collect();
        (m, "complete residual biclique".to_string())
    } else {
        let sys = build_biclique_axioms(&h, k_bip);
        let pins: Vec<(u32, bool)> = keep_l
            .iter()
            .chain(&keep_r)
            .enumerate()
            .filter(|(_, &k)| !k)
            .map(|(i, _)| (i as u32, false))
            .collect();
        match solve(&sys, res.sos_degree, None, &pins, &params.solver) {
            Ok(SolveOutcome::Feasible(mu)) => (mu.marginals(), format!("degree-{} relaxation", res.sos_degree)),
            Ok(SolveOutcome::Infeasible(_)) => {
                return Ok(TupleTrace::new(tuple, TupleVerdict::Infeasible, "relaxation infeasible"));
            }
            Err(e @ (Error::SizeBudget(_) | Error::NonConvergence(_))) => {
                return Ok(TupleTrace::new(tuple, TupleVerdict::Skipped, e.to_string()));
            }
            Err(e) => return Err(e),
        }
    };

    let cut = 1.0 - params.epsilon.sqrt();
    let mut rounded: Vec<usize> = marginals
        .iter()
        .enumerate()
        .filter(|&(_, &m)| m >= cut)
        .map(|(i, _)| if i < a { h.left[i] } else { h.right[i - a] })
        .collect();
    rounded.sort_unstable();

    let threshold = (1.0 - 5.0 * params.epsilon.sqrt()) * params.k;
    let cleaned = clean_up(graph, &rounded, threshold);
    let min_size = (1.0 - params.epsilon) * params.k;
    let mut trace = TupleTrace::new(tuple, TupleVerdict::Accepted, how);
    trace.rounded = rounded;
    if (cleaned.len() as f64) < min_size {
        trace.verdict = TupleVerdict::Discarded;
        trace.reason = format!("{}; cleaned set has {} < {:.2} vertices", trace.reason, cleaned.len(), min_size);
    } else if !graph.is_clique(&cleaned) {
        trace.verdict = TupleVerdict::Discarded;
        trace.reason = format!("{}; cleaned set is not a clique", trace.reason);
    }
    trace.candidate = cleaned;
    Ok(trace)
}

/// Repeatedly drop vertices with fewer than `k_bip` live neighbours on the other side.
fn peel(h: &BipartiteView, k_bip: f64) -> (Vec<bool>, Vec<bool>) {
    let (a, b) = (h.left.len(), h.right.len());
    let mut keep_l = vec![true; a];
    let mut keep_r = vec![true; b];
    let e = |i: usize, j: usize| h.has_edge(h.left[i], h.right[j]);
    let mut deg_l: Vec<usize> = (0..a).map(|i| (0..b).filter(|&j| e(i, j)).count()).collect();
    let mut deg_r: Vec<usize> = (0..b).map(|j| (0..a).filter(|&i| e(i, j)).count()).collect();
    let mut stack: Vec<(bool, usize)> = vec![];
    for i in 0..a {
        if (deg_l[i] as f64) < k_bip {
            keep_l[i] = false;
            stack.push((true, i));
        }
    }
    for j in 0..b {
        if (deg_r[j] as f64) < k_bip {
            keep_r[j] = false;
            stack.push((false, j));
        }
    }
    while let Some((is_left, x)) = stack.pop() {
        if is_left {
            for j in 0..b {
                if keep_r[j] && e(x, j) {
                    deg_r[j] -= 1;
                    if (deg_r[j] as f64) < k_bip {
                        keep_r[j] = false;
                        stack.push((false, j));
                    }
                }
            }
        } else {
            for i in 0..a {
                if keep_l[i] && e(i, x) {
                    deg_l[i] -= 1;
                    if (deg_l[i] as f64) < k_bip {
                        keep_l[i] = false;
                        stack.push((true, i));
                    }
                }
            }
        }
    }
    (keep_l, keep_r)
}

fn is_window_biclique(h: &BipartiteView, keep_l: &[bool], keep_r: &[bool], live_l: usize, live_r: usize, k_bip: f64) -> bool {
    let upper = 2.0 * k_bip;
    if live_l as f64 > upper || live_r as f64 > upper {
        return false;
    }
    (0..keep_l.len())
        .filter(|&i| keep_l[i])
        .all(|i| (0..keep_r.len()).filter(|&j| keep_r[j]).all(|j| h.has_edge(h.left[i], h.right[j])))
}

/// Remove members with fewer than `threshold` neighbours in the set, then add every
/// outside vertex with at least `threshold` neighbours in what remains.
pub(crate) fn clean_up(graph: &Graph, set: &[usize], threshold: f64) -> Vec<usize> {
    let n = graph.n();
    let snapshot = Bits::from_indices(n, set);
    let kept: Vec<usize> = set.iter().copied().filter(|&v| graph.degree_into(v, &snapshot) as f64 >= threshold).collect();
    let kept_bits = Bits::from_indices(n, &kept);
    let mut out = kept.clone();
    out.extend((0..n).filter(|&v| !kept_bits.contains(v) && graph.degree_into(v, &kept_bits) as f64 >= threshold));
    out.sort_unstable();
    out
}

/// Deduplicate and drop every set contained in another one; the result is sorted.
pub(crate) fn remove_contained(mut sets: Vec<Vec<usize>>) -> Vec<Vec<usize>> {
    sets.sort();
    sets.dedup();
    let keep: Vec<bool> = (0..sets.len())
        .map(|i| !(0..sets.len()).any(|j| j != i && sets[j].len() > sets[i].len() && is_sorted_subset(&sets[i], &sets[j])))
        .collect();
    sets.into_iter().zip(keep).filter(|(_, k)| *k).map(|(s, _)| s).collect()
}

fn is_sorted_subset(a: &[usize], b: &[usize]) -> bool {
    let mut j = 0;
    for &x in a {
        while j < b.len() && b[j] < x {
            j += 1;
        }
        if j == b.len() || b[j] != x {
            return false;
        }
        j += 1;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combinatorics::enumerate_maximal_cliques;
    use crate::model::{apply_monotone_adversary, sample_rig, MonotoneStrategy, RigParams};
    use crate::rng;
    use rand::Rng;

    #[test]
    fn contained_sets_are_removed() {
        let sets = vec![vec![1, 2, 3], vec![1, 2], vec![4, 5], vec![1, 2, 3], vec![2, 3, 4]];
        assert_eq!(remove_contained(sets), vec![vec![1, 2, 3], vec![2, 3, 4], vec![4, 5]]);
    }

    #[test]
    fn clean_up_uses_snapshot_then_reduced_set() {
        // K4 on {0,1,2,3}, vertex 4 adjacent to 0,1,2, vertex 5 isolated.
        let g = Graph::from_edges(6, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3), (4, 0), (4, 1), (4, 2)]);
        assert_eq!(clean_up(&g, &[0, 1, 2, 3, 5], 3.0), vec![0, 1, 2, 3, 4]);
        assert_eq!(clean_up(&g, &[0, 1, 2, 5], 3.0), Vec::<usize>::new());
        assert_eq!(clean_up(&g, &[0, 1, 2, 3], 3.0), vec![0, 1, 2, 3, 4]);
        assert_eq!(clean_up(&g, &[0, 1, 2, 3], 3.5), Vec::<usize>::new());
    }

    #[test]
    fn peeling_keeps_the_dense_core() {
        let mut g = Graph::empty(8);
        for &u in &[0, 1, 2] {
            for &v in &[4, 5, 6] {
                g.add_edge(u, v);
            }
        }
        g.add_edge(3, 4);
        g.add_edge(7, 0);
        let h = BipartiteView::new(&g, vec![0, 1, 2, 3], vec![4, 5, 6, 7]).unwrap();
        let (l, r) = peel(&h, 2.0);
        assert_eq!(l, vec![true, true, true, false]);
        assert_eq!(r, vec![true, true, true, false]);
    }

    fn single_label(seed: u64, q: f64) -> crate::model::RigInstance {
        sample_rig(RigParams::new(120, 1, 0.5, q, seed)).unwrap()
    }

    fn params_for(k: f64, seed: u64) -> RecoveryParams {
        RecoveryParams { k, epsilon: 0.0025, p: 0.5, d: 1, t: Some(2), num_tuples: Some(60), seed, ..Default::default() }
    }

    #[test]
    fn single_clique_is_recovered() {
        let inst = single_label(3, 0.0);
        let truth = inst.cliques();
        let k = truth[0].len() as f64 * 0.9;
        let report = exact_recovery(&inst.graph, &params_for(k, 11)).unwrap();
        assert_eq!(report.sets, truth);
        assert!(report.count(TupleVerdict::Accepted) > 0);
    }

    #[test]
    fn monotone_deletions_leave_the_output_unchanged() {
        let inst = single_label(5, 0.3);
        let truth = inst.cliques();
        let k = truth[0].len() as f64 * 0.9;
        let before = exact_recovery(&inst.graph, &params_for(k, 2)).unwrap();
        let (inst2, _) = apply_monotone_adversary(&inst, &MonotoneStrategy::Fraction { f: 0.5 }, 8).unwrap();
        assert_ne!(inst.graph, inst2.graph);
        let after = exact_recovery(&inst2.graph, &params_for(k, 2)).unwrap();
        assert_eq!(before.sets, truth);
        assert_eq!(after.sets, before.sets);
    }

    #[test]
    fn erdos_renyi_above_clique_number_gives_nothing() {
        let n = 200;
        let mut r = rng::stream(17, rng::EXPERIMENT);
        let mut g = Graph::empty(n);
        for u in 0..n {
            for v in u + 1..n {
                if r.gen::<bool>() {
                    g.add_edge(u, v);
                }
            }
        }
        let omega = enumerate_maximal_cliques(&g, 2, usize::MAX).unwrap().iter().map(|c| c.len()).max().unwrap();
        let params = RecoveryParams {
            k: omega as f64 + 1.0,
            epsilon: 0.0025,
            p: 0.5,
            d: 1,
            t: Some(2),
            num_tuples: Some(40),
            seed: 1,
            ..Default::default()
        };
        let report = exact_recovery(&g, &params).unwrap();
        assert!(report.sets.is_empty());
        assert_eq!(report.traces.len(), 40);
    }
}
