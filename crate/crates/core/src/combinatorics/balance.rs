//! Signed-weight correlations of bipartite graphs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;

/// A bipartite view `A ⊎ B` of a host graph; only `A × B` pairs are consulted.
#[derive(Clone, Debug)]
pub struct BipartiteView<'g> {
    pub left: Vec<usize>,
    pub right: Vec<usize>,
    pub host: &'g Graph,
}

impl<'g> BipartiteView<'g> {
    pub fn new(host: &'g Graph, left: Vec<usize>, right: Vec<usize>) -> Result<Self> {
        let n = host.n();
        let mut seen = vec![false; n];
        for &v in left.iter().chain(&right) {
            if v >= n {
                return Err(Error::Invalid(format!("vertex {v} out of range")));
            }
            if seen[v] {
                return Err(Error::Invalid(format!("vertex {v} repeated or on both sides")));
            }
            seen[v] = true;
        }
        Ok(BipartiteView { left, right, host })
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.host.has_edge(u, v)
    }
}

fn check_p(p: f64) -> Result<()> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Invalid(format!("centering probability must lie in (0,1), got {p}")));
    }
    Ok(())
}

#[inline]
fn weight(edge: bool, p: f64) -> f64 {
    if edge {
        ((1.0 - p) / p).sqrt()
    } else {
        -(p / (1.0 - p)).sqrt()
    }
}

/// Centred weight of the pair: positive on edges, negative otherwise, zero mean at density `p`.
pub fn pair_weight(h: &BipartiteView, p: f64, u: usize, v: usize) -> Result<f64> {
    check_p(p)?;
    Ok(weight(h.has_edge(u, v), p))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BalancednessReport {
    pub r: usize,
    pub p: f64,
    /// Largest absolute correlation over admissible pairs; 0 when none exist.
    pub delta_max: f64,
    /// Maximising pair `(S, R)` as positions into the left side's vertex list.
    pub argmax: Option<(Vec<usize>, Vec<usize>)>,
    pub pairs_evaluated: u64,
    /// False when the pair budget stopped the scan early.
    pub exhaustive: bool,
}

/// All `r`-subsets of `0..m` in lexicographic order.
pub fn combinations(m: usize, r: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if r > m {
        return out;
    }
    let mut idx: Vec<usize> = (0..r).collect();
    loop {
        out.push(idx.clone());
        let mut i = r;
        while i > 0 && idx[i - 1] == i - 1 + m - r {
            i -= 1;
        }
        if i == 0 {
            return out;
        }
        idx[i - 1] += 1;
        for j in i..r {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

pub fn binomial(m: usize, r: usize) -> f64 {
    if r > m {
        return 0.0;
    }
    let r = r.min(m - r);
    (0..r).fold(1.0, |acc, i| acc * (m - i) as f64 / (i + 1) as f64)
}

fn overlap(a: &[usize], b: &[usize]) -> usize {
    let (mut i, mut j, mut c) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                c += 1;
                i += 1;
                j += 1;
            }
        }
    }
    c
}

/// `u_S(v)` for every right vertex `v`, with factors multiplied in the order of `s`.
pub fn signed_product(h: &BipartiteView, p: f64, s: &[usize]) -> Vec<f64> {
    h.right
        .iter()
        .map(|&v| s.iter().fold(1.0, |acc, &i| acc * weight(h.has_edge(h.left[i], v), p)))
        .collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (x, y) in a.iter().zip(b) {
        acc += x * y;
    }
    acc
}

/// Exact `r`-fold balancedness by enumerating unordered pairs of `r`-subsets.
///
/// Pairs are visited as `(S_i, S_j)` with `i <= j` in lexicographic subset order;
/// once `pair_budget` pairs have been evaluated the scan stops and the report is
/// flagged non-exhaustive.
pub fn balancedness(h: &BipartiteView, p: f64, r: usize, pair_budget: u64) -> Result<BalancednessReport> {
    check_p(p)?;
    if r == 0 {
        return Err(Error::Invalid("fold parameter r must be at least 1".into()));
    }
    let subsets = combinations(h.left.len(), r);
    let cache_len = subsets.len() as f64 * h.right.len() as f64;
    let cached: Option<Vec<Vec<f64>>> =
        (cache_len <= 5e7).then(|| subsets.iter().map(|s| signed_product(h, p, s)).collect());
    let product = |i: usize| -> std::borrow::Cow<'_, [f64]> {
        match &cached {
            Some(c) => std::borrow::Cow::Borrowed(c[i].as_slice()),
            None => std::borrow::Cow::Owned(signed_product(h, p, &subsets[i])),
        }
    };
    let mut report = BalancednessReport { r, p, delta_max: 0.0, argmax: None, pairs_evaluated: 0, exhaustive: true };
    'outer: for i in 0..subsets.len() {
        let ui = product(i);
        for j in i..subsets.len() {
            if 2 * (r - overlap(&subsets[i], &subsets[j])) < 3 {
                continue;
            }
            if report.pairs_evaluated >= pair_budget {
                report.exhaustive = false;
                break 'outer;
            }
            report.pairs_evaluated += 1;
            let val = dot(&ui, &product(j)).abs();
            if report.argmax.is_none() || val > report.delta_max {
                report.delta_max = val;
                report.argmax = Some((subsets[i].clone(), subsets[j].clone()));
            }
        }
    }
    Ok(report)
}
