//! Monotone and bounded adversaries.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::RigInstance;
use crate::error::{Error, Result};
use crate::graph::Bits;
use crate::rng;

/// Record of every modification made to an instance.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AdversaryLedger {
    /// Stages applied, in order (`"monotone"`, `"bounded"`).
    pub order: Vec<String>,
    /// Noise edges removed by the monotone adversary, `u < v`, sorted.
    pub monotone_deletions: Vec<(usize, usize)>,
    /// Pairs toggled by the bounded adversary, `u < v`, in application order.
    pub flips: Vec<(usize, usize)>,
    /// Per-vertex number of toggled incident pairs.
    pub corrupted_edges: Vec<usize>,
    /// The vertex set `M` whose neighbourhoods may be rewritten without limit.
    pub corrupted_vertices: Vec<usize>,
    pub eps_deg: f64,
    pub eps_node: f64,
}

impl AdversaryLedger {
    /// Per-vertex flip budget `⌊ε_deg k⌋`.
    pub fn degree_budget(eps_deg: f64, k: f64) -> usize {
        (eps_deg * k + 1e-9).floor() as usize
    }

    pub fn node_budget(eps_node: f64, k: f64) -> usize {
        (eps_node * k + 1e-9).floor() as usize
    }

    /// Vertices whose flip count reaches `ε_deg k`, together with `M`.
    pub fn heavy_vertices(&self, k: f64) -> Vec<usize> {
        let b = self.eps_deg * k;
        let mut out: Vec<usize> = self
            .corrupted_edges
            .iter()
            .enumerate()
            .filter(|&(_, &c)| c > 0 && c as f64 >= b)
            .map(|(v, _)| v)
            .collect();
        out.extend(&self.corrupted_vertices);
        out.sort_unstable();
        out.dedup();
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum MonotoneStrategy {
    /// Delete `round(f · #noise edges)` noise edges chosen uniformly.
    Fraction { f: f64 },
    /// Delete every noise edge incident to one of `targets`.
    Incident { targets: Vec<usize> },
    /// Delete exactly these edges; each must be a noise edge.
    Custom { edges: Vec<(usize, usize)> },
}

pub fn apply_monotone_adversary(
    inst: &RigInstance,
    strategy: &MonotoneStrategy,
    seed: u64,
) -> Result<(RigInstance, AdversaryLedger)> {
    let mut ledger = inst.ledger.clone().unwrap_or_default();
    if ledger.order.iter().any(|s| s == "bounded") {
        return Err(Error::Invalid("monotone deletions must precede bounded corruption".into()));
    }
    let n = inst.n();
    let noise: Vec<(usize, usize)> =
        inst.graph.edges().into_iter().filter(|&(u, v)| !inst.shares_label(u, v)).collect();
    let mut deleted = match strategy {
        MonotoneStrategy::Fraction { f } => {
            if !(0.0..=1.0).contains(f) {
                return Err(Error::Invalid(format!("deletion fraction must lie in [0,1], got {f}")));
            }
            let count = (f * noise.len() as f64).round() as usize;
            let mut r = rng::stream(seed, rng::ADVERSARY);
            rand::seq::index::sample(&mut r, noise.len(), count).into_iter().map(|i| noise[i]).collect()
        }
        MonotoneStrategy::Incident { targets } => {
            let t = Bits::from_indices(n, targets);
            noise.into_iter().filter(|&(u, v)| t.contains(u) || t.contains(v)).collect()
        }
        MonotoneStrategy::Custom { edges } => {
            let mut out = Vec::with_capacity(edges.len());
            for &(a, b) in edges {
                let (u, v) = (a.min(b), a.max(b));
                if u == v || v >= n {
                    return Err(Error::Invalid(format!("invalid edge {{{a},{b}}}")));
                }
                if inst.shares_label(u, v) {
                    return Err(Error::MonotoneViolation { u, v });
                }
                if !inst.graph.has_edge(u, v) {
                    return Err(Error::Invalid(format!("edge {{{u},{v}}} is not present")));
                }
                out.push((u, v));
            }
            out
        }
    };
    deleted.sort_unstable();
    deleted.dedup();
    let mut graph = inst.graph.clone();
    for &(u, v) in &deleted {
        graph.remove_edge(u, v);
    }
    if ledger.corrupted_edges.is_empty() {
        ledger.corrupted_edges = vec![0; n];
    }
    ledger.order.push("monotone".into());
    ledger.monotone_deletions.extend(deleted);
    ledger.monotone_deletions.sort_unstable();
    let out = RigInstance::new(inst.params, inst.q_up, inst.delta, inst.labels.clone(), graph, Some(ledger.clone()));
    Ok((out, ledger))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum BoundedStrategy {
    /// Toggle uniformly random pairs while both endpoints have budget left.
    RandomFlips {
        /// Flips per vertex to aim for; defaults to the full budget.
        per_vertex: Option<usize>,
    },
    /// Delete edges inside `S_label`, as many as the per-vertex budget allows.
    TargetedDeletion { label: usize },
    /// Rewrite the neighbourhoods of `count` random vertices to mimic a foreign community.
    Rewrite { count: usize },
}

struct Budget<'a> {
    counts: Vec<usize>,
    limit: usize,
    free: &'a Bits,
}

impl Budget<'_> {
    fn can(&self, u: usize, v: usize) -> bool {
        (self.free.contains(u) || self.counts[u] < self.limit)
            && (self.free.contains(v) || self.counts[v] < self.limit)
    }
}

/// Applies the strategies in order under shared budgets.
///
/// Every strategy is checked against the budgets before anything is modified.
pub fn apply_bounded_adversary(
    inst: &RigInstance,
    eps_deg: f64,
    eps_node: f64,
    strategies: &[BoundedStrategy],
    seed: u64,
) -> Result<(RigInstance, AdversaryLedger)> {
    if eps_deg < 0.0 || eps_node < 0.0 {
        return Err(Error::Invalid("budgets must be non-negative".into()));
    }
    let n = inst.n();
    let k = inst.k();
    let deg_budget = AdversaryLedger::degree_budget(eps_deg, k);
    let node_budget = AdversaryLedger::node_budget(eps_node, k);
    let rewrites: usize = strategies
        .iter()
        .map(|s| if let BoundedStrategy::Rewrite { count } = s { *count } else { 0 })
        .sum();
    if rewrites > node_budget {
        return Err(Error::AdversaryBudget(format!(
            "{rewrites} rewritten vertices exceed the node budget {node_budget}"
        )));
    }
    for s in strategies {
        match s {
            BoundedStrategy::RandomFlips { per_vertex: Some(c) } if *c > deg_budget => {
                return Err(Error::AdversaryBudget(format!(
                    "{c} flips per vertex exceed the degree budget {deg_budget}"
                )));
            }
            BoundedStrategy::TargetedDeletion { label } if *label >= inst.d() => {
                return Err(Error::Invalid(format!("label {label} out of range")));
            }
            _ => {}
        }
    }

    let mut ledger = inst.ledger.clone().unwrap_or_default();
    if ledger.corrupted_edges.is_empty() {
        ledger.corrupted_edges = vec![0; n];
    }
    ledger.eps_deg = eps_deg;
    ledger.eps_node = eps_node;
    let mut r = rng::stream(seed, rng::ADVERSARY + 0x100);

    // Pick M first so the other strategies can leave its members' budgets alone.
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut r);
    let mut m: Vec<usize> = order[..rewrites.min(n)].to_vec();
    m.sort_unstable();
    let free = Bits::from_indices(n, &m);
    let mut budget = Budget { counts: ledger.corrupted_edges.clone(), limit: deg_budget, free: &free };
    let mut graph = inst.graph.clone();
    let mut flips = Vec::new();
    let mut toggle = |g: &mut crate::graph::Graph, b: &mut Budget, u: usize, v: usize| {
        let present = g.has_edge(u, v);
        g.set_edge(u, v, !present);
        b.counts[u] += 1;
        b.counts[v] += 1;
        flips.push((u.min(v), u.max(v)));
    };

    let mut m_iter = m.iter().copied();
    let cliques = inst.cliques();
    for s in strategies {
        match s {
            BoundedStrategy::RandomFlips { per_vertex } => {
                let target = per_vertex.unwrap_or(deg_budget);
                if target == 0 || n < 2 {
                    continue;
                }
                let mut done = vec![0usize; n];
                let wanted = n * target / 2;
                let mut made = 0;
                let mut attempts = 0;
                while made < wanted && attempts < 50 * wanted + 100 {
                    attempts += 1;
                    let u = r.gen_range(0..n);
                    let v = r.gen_range(0..n);
                    if u == v || done[u] >= target || done[v] >= target || !budget.can(u, v) {
                        continue;
                    }
                    toggle(&mut graph, &mut budget, u, v);
                    done[u] += 1;
                    done[v] += 1;
                    made += 1;
                }
            }
            BoundedStrategy::TargetedDeletion { label } => {
                let s = &cliques[*label];
                let mut pairs: Vec<(usize, usize)> = Vec::new();
                for (i, &u) in s.iter().enumerate() {
                    for &v in &s[i + 1..] {
                        pairs.push((u, v));
                    }
                }
                pairs.shuffle(&mut r);
                for (u, v) in pairs {
                    if graph.has_edge(u, v) && budget.can(u, v) {
                        toggle(&mut graph, &mut budget, u, v);
                    }
                }
            }
            BoundedStrategy::Rewrite { count } => {
                for v in m_iter.by_ref().take(*count) {
                    let foreign: Vec<usize> =
                        (0..inst.d()).filter(|&l| !inst.label_mask(v).contains(l)).collect();
                    let target = if foreign.is_empty() {
                        Bits::new(n)
                    } else {
                        let l = foreign[r.gen_range(0..foreign.len())];
                        Bits::from_indices(n, &cliques[l])
                    };
                    for u in 0..n {
                        if u == v {
                            continue;
                        }
                        let want = target.contains(u);
                        if graph.has_edge(u, v) != want && budget.can(u, v) {
                            toggle(&mut graph, &mut budget, u, v);
                        }
                    }
                }
            }
        }
    }
    ledger.corrupted_edges = budget.counts;
    ledger.flips.extend(flips);
    let mut all_m = ledger.corrupted_vertices.clone();
    all_m.extend(m);
    all_m.sort_unstable();
    all_m.dedup();
    ledger.corrupted_vertices = all_m;
    ledger.order.push("bounded".into());
    let out = RigInstance::new(inst.params, inst.q_up, inst.delta, inst.labels.clone(), graph, Some(ledger.clone()));
    Ok((out, ledger))
}
