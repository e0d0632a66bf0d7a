//! Clique enumeration, biclique witnesses and degree statistics.

use serde::{Deserialize, Serialize};

use super::balance::binomial;
use super::labels::for_each_subset;
use crate::error::{Error, Result};
use crate::graph::{Bits, Graph};
use crate::model::RigInstance;

/// Largest number of neighbours an outside vertex has in `set`, with the first maximiser.
pub fn max_degree_into_clique(graph: &Graph, set: &[usize]) -> (usize, Option<usize>) {
    let bits = Bits::from_indices(graph.n(), set);
    let mut best = (0, None);
    for v in (0..graph.n()).filter(|&v| !bits.contains(v)) {
        let d = graph.degree_into(v, &bits);
        if best.1.is_none() || d > best.0 {
            best = (d, Some(v));
        }
    }
    best
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BicliqueWitness {
    pub label: u32,
    /// `a` members of `S_label`.
    pub inside: Vec<usize>,
    /// `b` non-members adjacent to all of `inside`.
    pub outside: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessSearch {
    pub witness: Option<BicliqueWitness>,
    /// When true, `witness == None` certifies absence.
    pub exhaustive: bool,
}

/// Looks for `S ⊆ S_ℓ`, `T ∩ S_ℓ = ∅`, `|S| = a`, `|T| = b` with all of `S × T` present.
///
/// For each label the smaller side is enumerated exhaustively: a `b`-set `T`
/// works iff its common neighbourhood meets `S_ℓ` in at least `a` vertices, and
/// symmetrically for `S`. When both enumerations exceed `budget`, a greedy
/// search grows `T` one vertex at a time and the result is flagged incomplete.
pub fn find_biclique_witness(inst: &RigInstance, a: usize, b: usize, budget: f64) -> WitnessSearch {
    let g = &inst.graph;
    let n = inst.n();
    let mut exhaustive = true;
    for (l, members) in inst.cliques().iter().enumerate() {
        let inside = Bits::from_indices(n, members);
        let outside: Vec<usize> = (0..n).filter(|&v| !inside.contains(v)).collect();
        if members.len() < a || outside.len() < b {
            continue;
        }
        let by_t = binomial(outside.len(), b);
        let by_s = binomial(members.len(), a);
        let mut found = None;
        if by_t.min(by_s) <= budget {
            if by_t <= by_s {
                for_each_subset(outside.len(), b, |idx| {
                    let t: Vec<usize> = idx.iter().map(|&i| outside[i]).collect();
                    let mut common = g.common_neighbors(&t);
                    common.and_with(&inside);
                    if common.count() >= a {
                        found = Some((common.iter().take(a).collect(), t));
                        return false;
                    }
                    true
                });
            } else {
                for_each_subset(members.len(), a, |idx| {
                    let s: Vec<usize> = idx.iter().map(|&i| members[i]).collect();
                    let mut common = g.common_neighbors(&s);
                    common.minus(&inside);
                    if common.count() >= b {
                        found = Some((s, common.iter().take(b).collect()));
                        return false;
                    }
                    true
                });
            }
        } else {
            exhaustive = false;
            let mut t: Vec<usize> = Vec::new();
            let mut common = inside.clone();
            while t.len() < b {
                let next = outside
                    .iter()
                    .filter(|v| !t.contains(v))
                    .map(|&v| (g.degree_into(v, &common), v))
                    .max_by_key(|&(d, v)| (d, std::cmp::Reverse(v)));
                match next {
                    Some((_, v)) => {
                        common.and_with(g.row(v));
                        t.push(v);
                    }
                    None => break,
                }
            }
            if t.len() == b && common.count() >= a {
                t.sort_unstable();
                found = Some((common.iter().take(a).collect(), t));
            }
        }
        if let Some((s, t)) = found {
            return WitnessSearch {
                witness: Some(BicliqueWitness { label: l as u32, inside: s, outside: t }),
                exhaustive,
            };
        }
    }
    WitnessSearch { witness: None, exhaustive }
}

/// Maximal cliques with at least `min_size` vertices, each sorted, in sorted order.
///
/// Bron–Kerbosch with Tomita pivoting, run from each vertex of a degeneracy
/// order of the `(min_size - 1)`-core; branches that cannot reach `min_size`
/// are cut.
pub fn enumerate_maximal_cliques(graph: &Graph, min_size: usize, cap: usize) -> Result<Vec<Vec<usize>>> {
    let n = graph.n();
    if n > cap {
        return Err(Error::SizeBudget(format!("clique enumeration capped at n = {cap}, got {n}")));
    }
    let min_size = min_size.max(1);
    let mut alive = Bits::full(n);
    let mut changed = true;
    while changed {
        changed = false;
        for v in 0..n {
            if alive.contains(v) && graph.degree_into(v, &alive) + 1 < min_size {
                alive.remove(v);
                changed = true;
            }
        }
    }
    let order = degeneracy_order(graph, &alive);
    let mut out = Vec::new();
    let mut later = alive.clone();
    for &v in &order {
        later.remove(v);
        let mut p = graph.row(v).clone();
        p.and_with(&later);
        let mut x = graph.row(v).clone();
        x.and_with(&alive);
        x.minus(&later);
        let mut r = vec![v];
        expand(graph, &mut r, p, x, min_size, &mut out);
    }
    for c in out.iter_mut() {
        c.sort_unstable();
    }
    out.sort();
    out.dedup();
    Ok(out)
}

fn degeneracy_order(graph: &Graph, alive: &Bits) -> Vec<usize> {
    let mut left = alive.clone();
    let mut order = Vec::with_capacity(alive.count());
    while !left.is_empty() {
        let v = left.iter().min_by_key(|&v| (graph.degree_into(v, &left), v)).unwrap();
        order.push(v);
        left.remove(v);
    }
    order
}

fn expand(graph: &Graph, r: &mut Vec<usize>, mut p: Bits, mut x: Bits, min_size: usize, out: &mut Vec<Vec<usize>>) {
    if p.is_empty() {
        if x.is_empty() && r.len() >= min_size {
            out.push(r.clone());
        }
        return;
    }
    if r.len() + p.count() < min_size {
        return;
    }
    let pivot = p
        .iter()
        .chain(x.iter())
        .max_by_key(|&u| (graph.row(u).and_count(&p), std::cmp::Reverse(u)))
        .unwrap();
    let mut cand = p.clone();
    cand.minus(graph.row(pivot));
    for v in cand.iter() {
        let mut np = p.clone();
        np.and_with(graph.row(v));
        let mut nx = x.clone();
        nx.and_with(graph.row(v));
        r.push(v);
        expand(graph, r, np, nx, min_size, out);
        r.pop();
        p.remove(v);
        x.insert(v);
        if r.len() + p.count() < min_size {
            return;
        }
    }
}

/// Maximal cliques of size `≥ min_size` by filtering all vertex subsets; for tests only.
pub fn maximal_cliques_by_subsets(graph: &Graph, min_size: usize) -> Vec<Vec<usize>> {
    let n = graph.n();
    assert!(n <= 20, "subset oracle is exponential");
    let mut out = Vec::new();
    for mask in 1u32..(1 << n) {
        let set: Vec<usize> = (0..n).filter(|&i| mask >> i & 1 == 1).collect();
        if set.len() < min_size.max(1) || !graph.is_clique(&set) {
            continue;
        }
        let extendable = (0..n).any(|v| mask >> v & 1 == 0 && set.iter().all(|&u| graph.has_edge(u, v)));
        if !extendable {
            out.push(set);
        }
    }
    out.sort();
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SingleLabelReport {
    pub min_size: usize,
    pub cliques_found: usize,
    /// Large maximal cliques not contained in any `S_ℓ`.
    pub violations: Vec<Vec<usize>>,
}

/// Enumerates maximal cliques of size `≥ ⌈(1 - ε) k⌉` and flags those outside every `S_ℓ`.
pub fn single_label_check(inst: &RigInstance, epsilon: f64, cap: usize) -> Result<SingleLabelReport> {
    let min_size = ((1.0 - epsilon) * inst.k() - 1e-9).ceil().max(1.0) as usize;
    let cliques = enumerate_maximal_cliques(&inst.graph, min_size, cap)?;
    let truth = inst.clique_bits();
    let violations: Vec<Vec<usize>> = cliques
        .iter()
        .filter(|c| {
            let bits = Bits::from_indices(inst.n(), c);
            !truth.iter().any(|s| bits.is_subset(s))
        })
        .cloned()
        .collect();
    Ok(SingleLabelReport { min_size, cliques_found: cliques.len(), violations })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triangle_is_one_clique() {
        let g = Graph::from_edges(3, &[(0, 1), (1, 2), (0, 2)]);
        assert_eq!(enumerate_maximal_cliques(&g, 3, 400).unwrap(), vec![vec![0, 1, 2]]);
    }

    #[test]
    fn empty_graph_has_no_edges_as_cliques() {
        let g = Graph::empty(6);
        assert!(enumerate_maximal_cliques(&g, 2, 400).unwrap().is_empty());
    }

    #[test]
    fn five_cycle_gives_its_edges() {
        let g = Graph::from_edges(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (0, 4)]);
        let got = enumerate_maximal_cliques(&g, 2, 400).unwrap();
        assert_eq!(got, vec![vec![0, 1], vec![0, 4], vec![1, 2], vec![2, 3], vec![3, 4]]);
    }

    #[test]
    fn cap_is_enforced() {
        assert!(matches!(enumerate_maximal_cliques(&Graph::empty(10), 2, 9), Err(Error::SizeBudget(_))));
    }

    #[test]
    fn outside_degree_on_complete_host() {
        let g = Graph::complete(8);
        assert_eq!(max_degree_into_clique(&g, &[0, 1, 2]).0, 3);
    }
}
