use std::collections::HashSet;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{sample_tuples, RecoveryReport, TupleTrace, TupleVerdict};
use crate::error::{Error, Result};
use crate::graph::{Bits, Graph};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SparseOptions {
    /// Accept neighbourhoods with `(1 − window)k ≤ |T ∪ N(T)| ≤ (1 + window)k`.
    pub window: f64,
    /// Maximum number of clique tuples visited by exhaustive enumeration.
    pub enumeration_budget: u64,
    /// Tuples drawn when the budget is exceeded.
    pub sample_count: usize,
    pub seed: u64,
}

impl Default for SparseOptions {
    fn default() -> Self {
        SparseOptions { window: 0.25, enumeration_budget: 50_000_000, sample_count: 1_000_000, seed: 0 }
    }
}

/// `⌈(1 + 2α)/ε′⌉` with `d = n^α` and `p = n^{−ε′}`.
pub fn sparse_t_default(n: usize, d: usize, p: f64) -> Result<usize> {
    if !(p > 0.0 && p < 1.0) || n < 2 || d == 0 {
        return Err(Error::Invalid(format!("need 0 < p < 1, n ≥ 2, d ≥ 1 (got p = {p}, n = {n}, d = {d})")));
    }
    let ln_n = (n as f64).ln();
    let alpha = (d as f64).ln() / ln_n;
    let eps = -p.ln() / ln_n;
    Ok(((1.0 + 2.0 * alpha) / eps - 1e-9).ceil().max(1.0) as usize)
}

pub fn sparse_recovery(graph: &Graph, k: f64, t: usize) -> Result<RecoveryReport> {
    sparse_recovery_with(graph, k, t, &SparseOptions::default())
}

/// Collect every distinct closed neighbourhood `T ∪ N(T)` of a `t`-clique `T`
/// that is complete and whose size lies in the window around `k`.
///
/// Tuples that are not cliques cannot have a complete closed neighbourhood, so
/// only cliques are enumerated. Past `enumeration_budget` the run restarts on
/// `sample_count` uniformly random tuples and says so in the notes.
pub fn sparse_recovery_with(graph: &Graph, k: f64, t: usize, opts: &SparseOptions) -> Result<RecoveryReport> {
    let start = Instant::now();
    if t == 0 || t > graph.n() {
        return Err(Error::Invalid(format!("tuple length must lie in [1, n], got {t}")));
    }
    if !(k > 0.0) || !(opts.window >= 0.0) {
        return Err(Error::Invalid(format!("need k > 0 and a nonnegative window (got k = {k})")));
    }
    let lo = (1.0 - opts.window) * k;
    let hi = (1.0 + opts.window) * k;
    let mut scan = Scan { graph, lo, hi, seen: HashSet::new(), report: RecoveryReport::new("sparse"), visited: 0 };

    let exhaustive = scan.enumerate(t, opts.enumeration_budget);
    if !exhaustive {
        scan.seen.clear();
        scan.report.traces.clear();
        scan.visited = 0;
        for tuple in sample_tuples(graph.n(), t, opts.sample_count, opts.seed) {
            if graph.is_clique(&tuple) {
                let common = graph.common_neighbors(&tuple);
                scan.visit(&tuple, common);
            }
        }
        scan.report.notes.push(format!(
            "enumeration budget {} exceeded; sampled {} random tuples instead",
            opts.enumeration_budget, opts.sample_count
        ));
    }
    let mut report = scan.report;
    report.notes.push(format!("{} clique tuples examined, window [{lo:.2}, {hi:.2}]", scan.visited));
    let mut sets: Vec<Vec<usize>> = report.traces.iter().map(|t| t.candidate.clone()).collect();
    sets.sort();
    report.sets = sets;
    report.wall_time = start.elapsed();
    Ok(report)
}

struct Scan<'g> {
    graph: &'g Graph,
    lo: f64,
    hi: f64,
    /// Closed neighbourhoods already judged, keyed by their bit words.
    seen: HashSet<Vec<u64>>,
    report: RecoveryReport,
    visited: u64,
}

impl Scan<'_> {
    /// Returns false when the budget ran out.
    fn enumerate(&mut self, t: usize, budget: u64) -> bool {
        let n = self.graph.n();
        let mut prefix = Vec::with_capacity(t);
        for v in 0..n {
            prefix.push(v);
            let ok = self.extend(&mut prefix, self.graph.row(v).clone(), t, budget);
            prefix.pop();
            if !ok {
                return false;
            }
        }
        true
    }

    fn extend(&mut self, prefix: &mut Vec<usize>, common: Bits, t: usize, budget: u64) -> bool {
        if prefix.len() == t {
            if self.visited >= budget {
                return false;
            }
            self.visited += 1;
            self.visit(&prefix.clone(), common);
            return true;
        }
        let last = *prefix.last().unwrap();
        let next: Vec<usize> = common.iter().filter(|&w| w > last).collect();
        for w in next {
            let mut c = common.clone();
            c.and_with(self.graph.row(w));
            prefix.push(w);
            let ok = self.extend(prefix, c, t, budget);
            prefix.pop();
            if !ok {
                return false;
            }
        }
        true
    }

    fn visit(&mut self, tuple: &[usize], mut closed: Bits) {
        for &u in tuple {
            closed.insert(u);
        }
        let size = closed.count() as f64;
        if size < self.lo || size > self.hi {
            return;
        }
        if !self.seen.insert(closed.words().to_vec()) {
            return;
        }
        let members = closed.to_vec();
        if self.graph.is_clique(&members) {
            let mut trace = TupleTrace::new(tuple.to_vec(), TupleVerdict::Accepted, "complete closed neighbourhood");
            trace.candidate = members;
            self.report.traces.push(trace);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{sample_rig, RigParams};

    #[test]
    fn single_sparse_clique_is_recovered() {
        let inst = sample_rig(RigParams::new(300, 1, 0.05, 0.0, 6)).unwrap();
        let truth = inst.cliques();
        let k = truth[0].len() as f64;
        let report = sparse_recovery(&inst.graph, k, 2).unwrap();
        assert_eq!(report.sets, truth);
    }

    #[test]
    fn no_complete_neighbourhood_gives_nothing() {
        // K_{3,3}: closed neighbourhoods of vertices are stars, those of edges are the edges.
        let mut g = Graph::empty(6);
        for u in 0..3 {
            for v in 3..6 {
                g.add_edge(u, v);
            }
        }
        for t in 1..=2 {
            let report = sparse_recovery_with(&g, 4.0, t, &SparseOptions { window: 0.25, ..Default::default() }).unwrap();
            assert!(report.sets.is_empty());
        }
    }

    #[test]
    fn budget_overflow_falls_back_to_sampling() {
        let g = Graph::complete(8);
        let opts = SparseOptions { window: 0.0, enumeration_budget: 3, sample_count: 10, seed: 1 };
        let report = sparse_recovery_with(&g, 8.0, 2, &opts).unwrap();
        assert_eq!(report.sets, vec![(0..8).collect::<Vec<_>>()]);
        assert!(report.notes[0].contains("sampled"));
    }

    #[test]
    fn default_t_formula() {
        // d = n^{1/4}, p = n^{-1/2}: ⌈1.5 / 0.5⌉ = 3.
        assert_eq!(sparse_t_default(10_000, 10, 0.01).unwrap(), 3);
    }
}
