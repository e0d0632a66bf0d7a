//! Label-overlap statistics of vertex sets.

use serde::{Deserialize, Serialize};

use super::balance::binomial;
use crate::graph::Bits;
use crate::model::RigInstance;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabelSplit {
    pub label: u32,
    /// `S_ℓ \ R(Q)`.
    pub inner: Vec<usize>,
    /// `⋃_{ℓ' ∈ B_Q, ℓ' ≠ ℓ} S_ℓ' \ R(Q)`.
    pub outer: Vec<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LabelStats {
    /// Labels chosen by at least two members of `Q`.
    pub duplicates: Vec<u32>,
    /// Labels chosen by at least three members of `Q`.
    pub bad_labels: Vec<u32>,
    /// Union of `S_ℓ` over the bad labels.
    pub bad_union: Vec<usize>,
    /// Vertices holding at least two bad labels.
    pub overlap: Vec<usize>,
    pub splits: Vec<LabelSplit>,
}

/// Per-label multiplicities within `q`.
pub fn label_counts(inst: &RigInstance, q: &[usize]) -> Vec<usize> {
    let mut counts = vec![0; inst.d()];
    for &v in q {
        for &l in &inst.labels[v] {
            counts[l as usize] += 1;
        }
    }
    counts
}

pub fn label_stats(inst: &RigInstance, q: &[usize]) -> LabelStats {
    let counts = label_counts(inst, q);
    let duplicates: Vec<u32> = (0..inst.d() as u32).filter(|&l| counts[l as usize] >= 2).collect();
    let bad_labels: Vec<u32> = (0..inst.d() as u32).filter(|&l| counts[l as usize] >= 3).collect();
    if bad_labels.is_empty() {
        return LabelStats { duplicates, ..Default::default() };
    }
    let n = inst.n();
    let mut bad = Bits::new(inst.d());
    for &l in &bad_labels {
        bad.insert(l as usize);
    }
    let mut bad_union = Vec::new();
    let mut overlap = Bits::new(n);
    for v in 0..n {
        let c = inst.label_mask(v).and_count(&bad);
        if c >= 1 {
            bad_union.push(v);
        }
        if c >= 2 {
            overlap.insert(v);
        }
    }
    let splits = bad_labels
        .iter()
        .map(|&l| {
            let inner = (0..n).filter(|&v| inst.label_mask(v).contains(l as usize) && !overlap.contains(v)).collect();
            let outer = (0..n)
                .filter(|&v| {
                    !overlap.contains(v)
                        && bad_labels.iter().any(|&m| m != l && inst.label_mask(v).contains(m as usize))
                })
                .collect();
            LabelSplit { label: l, inner, outer }
        })
        .collect();
    LabelStats { duplicates, bad_labels, bad_union, overlap: overlap.to_vec(), splits }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EventViolation {
    /// Which of the three conditions failed (1, 2 or 3).
    pub condition: u8,
    pub witness: Vec<usize>,
    pub value: f64,
    pub bound: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EventReport {
    pub holds: bool,
    pub exhaustive: bool,
    pub violations: Vec<EventViolation>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EventConfig {
    /// Constant `C` of the duplicate bound `C t log n`.
    pub c_dup: f64,
    /// Constant in the label-count window `δd ± c log(n) sqrt(δd)`.
    pub c_count: f64,
    /// Largest number of subsets enumerated for conditions 2 and 3.
    pub subset_budget: u64,
}

impl Default for EventConfig {
    fn default() -> Self {
        EventConfig { c_dup: 10.0, c_count: 1.0, subset_budget: 10_000_000 }
    }
}

/// Checks the three conditions of the typical-labels event on `a`.
///
/// Duplicate and bad-label counts only grow with the set, and every `Q ⊆ A`
/// with `r ≤ |Q| ≤ 2r` is some `S ∪ R`, so conditions 2 and 3 reduce to the
/// subsets of `A` of size `min(2t, |A|)`.
pub fn check_event_e(inst: &RigInstance, a: &[usize], t: usize, b: usize, cfg: EventConfig) -> EventReport {
    let n = inst.n() as f64;
    let log_n = n.ln().max(1.0);
    let dd = inst.delta * inst.d() as f64;
    let half_width = cfg.c_count * log_n * dd.sqrt();
    let mut violations = Vec::new();
    for &v in a {
        let m = inst.labels[v].len() as f64;
        if (m - dd).abs() > half_width {
            violations.push(EventViolation { condition: 1, witness: vec![v], value: m, bound: half_width });
            break;
        }
    }
    let mut exhaustive = true;
    if t >= 2 && a.len() >= 2 {
        let size = (2 * t).min(a.len());
        let dup_bound = cfg.c_dup * t as f64 * log_n;
        let total = binomial(a.len(), size);
        if total > cfg.subset_budget as f64 {
            exhaustive = false;
        }
        let mut found2 = false;
        let mut found3 = false;
        let mut visited = 0u64;
        for_each_subset(a.len(), size, |idx| {
            if visited >= cfg.subset_budget {
                return false;
            }
            visited += 1;
            let q: Vec<usize> = idx.iter().map(|&i| a[i]).collect();
            let counts = label_counts(inst, &q);
            let dups = counts.iter().filter(|&&c| c >= 2).count() as f64;
            let bads = counts.iter().filter(|&&c| c >= 3).count() as f64;
            if !found2 && dups > dup_bound {
                found2 = true;
                violations.push(EventViolation { condition: 2, witness: q.clone(), value: dups, bound: dup_bound });
            }
            if !found3 && bads > b as f64 {
                found3 = true;
                violations.push(EventViolation { condition: 3, witness: q, value: bads, bound: b as f64 });
            }
            !(found2 && found3)
        });
    }
    violations.sort_by_key(|v| v.condition);
    EventReport { holds: violations.is_empty(), exhaustive, violations }
}

/// Calls `f` on each `r`-subset of `0..m` in lexicographic order until it returns false.
pub fn for_each_subset(m: usize, r: usize, mut f: impl FnMut(&[usize]) -> bool) {
    if r > m {
        return;
    }
    let mut idx: Vec<usize> = (0..r).collect();
    loop {
        if !f(&idx) {
            return;
        }
        let mut i = r;
        while i > 0 && idx[i - 1] == i - 1 + m - r {
            i -= 1;
        }
        if i == 0 {
            return;
        }
        idx[i - 1] += 1;
        for j in i..r {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Label assigned to each pair of the output set, `None` for the empty assignment.
pub type PairLabels = Vec<((usize, usize), Option<u32>)>;

/// Greedy construction of a duplicate-free subset of `k`, scanning in ascending index order.
pub fn duplicate_free_greedy(inst: &RigInstance, k: &[usize]) -> (Vec<usize>, PairLabels) {
    let mut remaining: Vec<usize> = k.to_vec();
    remaining.sort_unstable();
    remaining.dedup();
    let mut alive = vec![true; remaining.len()];
    let mut q: Vec<usize> = Vec::new();
    let mut g: PairLabels = Vec::new();
    let mut cursor = 0;
    loop {
        while cursor < remaining.len() && !alive[cursor] {
            cursor += 1;
        }
        if cursor == remaining.len() {
            break;
        }
        debug_assert!(greedy_invariant(inst, &q, &remaining, &alive));
        let v = remaining[cursor];
        alive[cursor] = false;
        let mut forbidden = Bits::new(inst.d());
        for &u in &q {
            let mut shared = inst.label_mask(u).clone();
            shared.and_with(inst.label_mask(v));
            let first = shared.iter().next().map(|l| l as u32);
            g.push(((u, v), first));
            forbidden.or_with(&shared);
        }
        if !forbidden.is_empty() {
            for (i, &w) in remaining.iter().enumerate() {
                if alive[i] && inst.label_mask(w).and_count(&forbidden) > 0 {
                    alive[i] = false;
                }
            }
        }
        q.push(v);
    }
    (q, g)
}

fn greedy_invariant(inst: &RigInstance, q: &[usize], remaining: &[usize], alive: &[bool]) -> bool {
    for (i, &u) in q.iter().enumerate() {
        for &u2 in &q[i + 1..] {
            let mut shared = inst.label_mask(u).clone();
            shared.and_with(inst.label_mask(u2));
            if shared.is_empty() {
                continue;
            }
            for (j, &v) in remaining.iter().enumerate() {
                if alive[j] && inst.label_mask(v).and_count(&shared) > 0 {
                    return false;
                }
            }
        }
    }
    true
}

/// Checks that `g` assigns every pair of `q` once, uses each label at most once,
/// and only uses labels shared by the pair.
pub fn is_duplicate_free(inst: &RigInstance, q: &[usize], g: &PairLabels) -> bool {
    let m = q.len();
    if g.len() != m * m.saturating_sub(1) / 2 {
        return false;
    }
    let mut seen_pairs = std::collections::BTreeSet::new();
    let mut used = std::collections::BTreeSet::new();
    for &((u, v), l) in g {
        if !q.contains(&u) || !q.contains(&v) || u == v || !seen_pairs.insert((u.min(v), u.max(v))) {
            return false;
        }
        if let Some(l) = l {
            if !used.insert(l) || !inst.labels[u].contains(&l) || !inst.labels[v].contains(&l) {
                return false;
            }
        }
    }
    true
}
