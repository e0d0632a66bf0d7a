use std::time::Instant;

use log::warn;
use serde::{Deserialize, Serialize};

use super::{sample_tuples, split_vertices, RecoveryParams, RecoveryReport, TupleTrace, TupleVerdict};
use crate::error::{Error, Result};
use crate::graph::{Bits, Graph};
use crate::sos::{build_robust_axioms, solve, Poly, RobustOptions, SolveOutcome};

/// Robust recovery: per tuple `T`, maximise `Ẽ[|w|]` over the robust system with
/// `w_T = 1`, round at `1 − ρ`, discard small sets, then prune near-duplicates.
///
/// Each side's window is `k̃/2`, so that `|w|` ranges over `[k̃, 2k̃]`.
pub fn approx_recovery(graph: &Graph, params: &RecoveryParams) -> Result<RecoveryReport> {
    let start = Instant::now();
    let n = graph.n();
    let res = params.resolve(n)?;
    let mut report = RecoveryReport::new("approx");
    if res.t_clamped {
        report.notes.push(format!("tuple length clamped from {} to {}", res.t_formula, res.t));
    }
    let (u_side, v_side) = split_vertices(n, params.seed);
    let budget = params.eps_deg * params.k;
    let sys = build_robust_axioms(graph, &u_side, &v_side, res.k_tilde / 2.0, budget, RobustOptions::default())?;
    let objective = Poly::sum_of(0..n as u32);
    let min_size = (1.0 - 5.0 * params.eps_node / res.rho) * params.k;

    let mut kept: Vec<Vec<usize>> = vec![];
    for tuple in sample_tuples(n, res.t, res.num_tuples, params.seed) {
        let pins: Vec<(u32, bool)> = tuple.iter().map(|&v| (v as u32, true)).collect();
        let trace = match solve(&sys, res.sos_degree, Some(&objective), &pins, &params.solver) {
            Ok(SolveOutcome::Feasible(mu)) => {
                let rounded: Vec<usize> = mu
                    .marginals()
                    .iter()
                    .enumerate()
                    .filter(|&(_, &m)| m >= 1.0 - res.rho)
                    .map(|(v, _)| v)
                    .collect();
                let mut t = TupleTrace::new(tuple, TupleVerdict::Accepted, "");
                if (rounded.len() as f64) < min_size {
                    t.verdict = TupleVerdict::Discarded;
                    t.reason = format!("{} < {:.2} vertices above 1 - rho", rounded.len(), min_size);
                } else {
                    t.candidate = rounded.clone();
                    kept.push(rounded.clone());
                }
                t.rounded = rounded;
                t
            }
            Ok(SolveOutcome::Infeasible(_)) => TupleTrace::new(tuple, TupleVerdict::Infeasible, "relaxation infeasible"),
            Err(e @ (Error::SizeBudget(_) | Error::NonConvergence(_))) => {
                warn!("tuple {tuple:?} skipped: {e}");
                TupleTrace::new(tuple, TupleVerdict::Skipped, e.to_string())
            }
            Err(e) => return Err(e),
        };
        report.traces.push(trace);
    }

    let radius = if params.literal_prune { 10.0 * params.eps_deg / res.rho } else { 10.0 * params.eps_node / res.rho * params.k };
    report.notes.push(format!("pruning radius {radius:.4}"));
    let skipped = report.count(TupleVerdict::Skipped);
    if skipped > 0 {
        report.notes.push(format!("{skipped} tuples skipped"));
    }
    let mut sets = prune(kept, radius);
    sets.sort();
    report.sets = sets;
    report.resolved = Some(res);
    report.wall_time = start.elapsed();
    Ok(report)
}

/// In list order, each surviving set deletes every other surviving set (equal
/// copies included) within symmetric difference `radius`.
fn prune(sets: Vec<Vec<usize>>, radius: f64) -> Vec<Vec<usize>> {
    let mut alive = vec![true; sets.len()];
    for i in 0..sets.len() {
        if !alive[i] {
            continue;
        }
        for j in 0..sets.len() {
            if j != i && alive[j] && sym_diff(&sets[i], &sets[j]) as f64 <= radius {
                alive[j] = false;
            }
        }
    }
    sets.into_iter().zip(alive).filter(|(_, a)| *a).map(|(s, _)| s).collect()
}

fn sym_diff(a: &[usize], b: &[usize]) -> usize {
    let common = a.iter().filter(|x| b.binary_search(x).is_ok()).count();
    a.len() + b.len() - 2 * common
}

/// Outcome of checking `|S_T| ≥ k/2 ⇒ S_T ⊆ S_ℓ ∪ M for some ℓ` over a run's traces.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationCheck {
    /// Tuples whose rounded set reached `k/2`.
    pub checked: usize,
    /// Tuples whose rounded set escaped every `S_ℓ ∪ M`.
    pub violations: Vec<Vec<usize>>,
    pub holds: bool,
}

/// Check the rounded sets of every solved tuple against planted cliques and the
/// corrupted set `m`.
pub fn pseudo_concentration_check(report: &RecoveryReport, truth: &[Vec<usize>], m: &[usize], k: f64, n: usize) -> ConcentrationCheck {
    let covers: Vec<Bits> = truth
        .iter()
        .map(|s| {
            let mut b = Bits::from_indices(n, s);
            b.or_with(&Bits::from_indices(n, m));
            b
        })
        .collect();
    let mut checked = 0;
    let mut violations = vec![];
    for t in &report.traces {
        if !matches!(t.verdict, TupleVerdict::Accepted | TupleVerdict::Discarded) || (t.rounded.len() as f64) < k / 2.0 {
            continue;
        }
        checked += 1;
        if !covers.iter().any(|c| t.rounded.iter().all(|&v| c.contains(v))) {
            violations.push(t.tuple.clone());
        }
    }
    ConcentrationCheck { checked, holds: violations.is_empty(), violations }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{sample_rig, RigParams};

    #[test]
    fn pruning_keeps_first_representative() {
        let sets = vec![vec![1, 2, 3], vec![1, 2, 3, 4], vec![7, 8], vec![1, 2, 3]];
        assert_eq!(prune(sets.clone(), 0.0), vec![vec![1, 2, 3], vec![1, 2, 3, 4], vec![7, 8]]);
        assert_eq!(prune(sets, 1.0), vec![vec![1, 2, 3], vec![7, 8]]);
    }

    #[test]
    fn accepted_sets_lie_inside_planted_cliques() {
        let inst = sample_rig(RigParams::new(24, 2, 0.5, 0.0, 4)).unwrap();
        let truth = inst.cliques();
        let k = truth.iter().map(|s| s.len()).min().unwrap() as f64;
        let params = RecoveryParams {
            k,
            epsilon: 0.01,
            p: 0.5,
            d: 2,
            t: Some(1),
            num_tuples: Some(4),
            sos_degree: 2,
            seed: 3,
            ..Default::default()
        };
        let report = approx_recovery(&inst.graph, &params).unwrap();
        assert_eq!(report.traces.len(), 4);
        for t in report.traces.iter().filter(|t| t.verdict == TupleVerdict::Accepted) {
            assert!(truth.iter().any(|s| t.candidate.iter().all(|v| s.contains(v))), "{t:?}");
        }
        let check = pseudo_concentration_check(&report, &truth, &[], k, inst.n());
        assert!(check.holds, "{check:?}");
    }
}
