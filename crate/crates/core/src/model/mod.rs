//! Random intersection graphs: sampling, couplings and adversaries.

mod adversary;
mod io;

pub use adversary::{
    apply_bounded_adversary, apply_monotone_adversary, AdversaryLedger, BoundedStrategy,
    MonotoneStrategy,
};
pub use io::{InstanceFile, FORMAT_VERSION};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Bits, Graph};
use crate::rng::{self, PairNoise};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RigParams {
    pub n: usize,
    pub d: usize,
    /// Overall edge probability.
    pub p: f64,
    /// Noise edge probability between vertices without a common label.
    pub q: f64,
    pub seed: u64,
}

impl RigParams {
    pub fn new(n: usize, d: usize, p: f64, q: f64, seed: u64) -> Self {
        RigParams { n, d, p, q, seed }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.d == 0 {
            return Err(Error::Model(format!("need n >= 1 and d >= 1, got n={} d={}", self.n, self.d)));
        }
        check_probs(self.p, self.q)
    }

    /// `log d / log n`, the polynomial exponent of the label count.
    pub fn alpha(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        (self.d as f64).ln() / (self.n as f64).ln()
    }
}

fn check_probs(p: f64, q: f64) -> Result<()> {
    if !(0.0..1.0).contains(&q) || !(p < 1.0) || !(q < p) {
        return Err(Error::Model(format!("need 0 <= q < p < 1, got p={p} q={q}")));
    }
    Ok(())
}

/// Label inclusion probability that makes every pair adjacent with probability `p`.
pub fn delta_from_params(d: usize, p: f64, q: f64) -> Result<f64> {
    if d == 0 {
        return Err(Error::Model("d must be at least 1".into()));
    }
    check_probs(p, q)?;
    // ln((1 − q)/(1 − p)) without cancellation as q → p.
    let ratio = ((p - q) / (1.0 - p)).ln_1p();
    Ok((-(-ratio / d as f64).exp_m1()).sqrt())
}

/// Edge probability between two vertices with no common label in the densified coupling.
pub fn coupled_noise(p: f64, q: f64, p_prime: f64) -> f64 {
    1.0 - (1.0 - p_prime) * (1.0 - q) / (1.0 - p)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoSidedParams {
    pub n: usize,
    pub d: usize,
    /// Target overall edge probability.
    pub p: f64,
    /// Edge probability for pairs sharing a label.
    pub q_up: f64,
    /// Edge probability for pairs without a common label.
    pub q_down: f64,
    pub seed: u64,
}

impl TwoSidedParams {
    /// Membership probability solving `p = q_up (1 - (1-δ²)^d) + q_down (1-δ²)^d`.
    pub fn delta(&self) -> Result<f64> {
        let TwoSidedParams { n, d, p, q_up, q_down, .. } = *self;
        if n == 0 || d == 0 {
            return Err(Error::Model("need n >= 1 and d >= 1".into()));
        }
        if !(0.0..=1.0).contains(&q_down) || !(0.0..=1.0).contains(&q_up) || q_down > q_up {
            return Err(Error::Model(format!("need 0 <= q_down <= q_up <= 1, got {q_down}, {q_up}")));
        }
        if q_down == q_up {
            if p != q_up {
                return Err(Error::Model(format!("q_up = q_down = {q_up} forces p = {q_up}, got {p}")));
            }
            return Ok(0.0);
        }
        if !(q_down < p && p <= q_up) {
            return Err(Error::Model(format!("need q_down < p <= q_up, got p={p}")));
        }
        let keep = (q_up - p) / (q_up - q_down);
        Ok((1.0 - keep.powf(1.0 / d as f64)).max(0.0).sqrt())
    }
}

/// A sampled graph with its hidden labels.
#[derive(Clone, Debug, PartialEq)]
pub struct RigInstance {
    pub params: RigParams,
    /// Set only for two-sided instances; `params.q` then holds `q_down`.
    pub q_up: Option<f64>,
    pub delta: f64,
    /// Sorted label set `M_v` of every vertex.
    pub labels: Vec<Vec<u32>>,
    pub graph: Graph,
    pub ledger: Option<AdversaryLedger>,
    masks: Vec<Bits>,
}

impl RigInstance {
    pub fn new(
        params: RigParams,
        q_up: Option<f64>,
        delta: f64,
        labels: Vec<Vec<u32>>,
        graph: Graph,
        ledger: Option<AdversaryLedger>,
    ) -> Self {
        let masks = label_masks(params.d, &labels);
        RigInstance { params, q_up, delta, labels, graph, ledger, masks }
    }

    pub fn n(&self) -> usize {
        self.params.n
    }

    pub fn d(&self) -> usize {
        self.params.d
    }

    /// Expected clique size `δ n`.
    pub fn k(&self) -> f64 {
        self.delta * self.params.n as f64
    }

    #[inline]
    pub fn shares_label(&self, u: usize, v: usize) -> bool {
        self.masks[u].words().iter().zip(self.masks[v].words()).any(|(a, b)| a & b != 0)
    }

    pub fn label_mask(&self, v: usize) -> &Bits {
        &self.masks[v]
    }

    /// Ground-truth communities `S_ℓ`, each sorted.
    pub fn cliques(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.params.d];
        for (v, m) in self.labels.iter().enumerate() {
            for &l in m {
                out[l as usize].push(v);
            }
        }
        out
    }

    pub fn clique_bits(&self) -> Vec<Bits> {
        self.cliques().iter().map(|s| Bits::from_indices(self.n(), s)).collect()
    }

    pub fn corrupted_vertices(&self) -> Vec<usize> {
        self.ledger.as_ref().map(|l| l.corrupted_vertices.clone()).unwrap_or_default()
    }
}

fn label_masks(d: usize, labels: &[Vec<u32>]) -> Vec<Bits> {
    labels
        .iter()
        .map(|m| {
            let mut b = Bits::new(d);
            for &l in m {
                b.insert(l as usize);
            }
            b
        })
        .collect()
}

fn sample_labels(n: usize, d: usize, delta: f64, seed: u64) -> Vec<Vec<u32>> {
    (0..n)
        .map(|v| {
            let mut r = rng::stream(seed, rng::LABELS + v as u64);
            (0..d as u32).filter(|_| rng::unit(&mut r) < delta).collect()
        })
        .collect()
}

/// Neighbours `w > u` of vertex `u`; rows are independent of each other.
fn sample_row(
    inst_masks: &[Bits],
    seed: u64,
    u: usize,
    n: usize,
    p_shared: f64,
    p_noise: f64,
) -> Vec<usize> {
    let mut noise = PairNoise::row(seed, rng::NOISE, n, u);
    let mu = inst_masks[u].words();
    let mut out = Vec::new();
    for v in u + 1..n {
        let r = noise.next();
        let shared = mu.iter().zip(inst_masks[v].words()).any(|(a, b)| a & b != 0);
        let threshold = if shared { p_shared } else { p_noise };
        if r < threshold {
            out.push(v);
        }
    }
    out
}

fn assemble(n: usize, rows: impl Iterator<Item = (usize, Vec<usize>)>) -> Graph {
    let mut g = Graph::empty(n);
    for (u, row) in rows {
        for v in row {
            g.add_edge(u, v);
        }
    }
    g
}

pub fn sample_rig(params: RigParams) -> Result<RigInstance> {
    params.validate()?;
    let delta = delta_from_params(params.d, params.p, params.q)?;
    let labels = sample_labels(params.n, params.d, delta, params.seed);
    let masks = label_masks(params.d, &labels);
    let n = params.n;
    let graph = assemble(n, (0..n).map(|u| (u, sample_row(&masks, params.seed, u, n, 1.0, params.q))));
    Ok(RigInstance { params, q_up: None, delta, labels, graph, ledger: None, masks })
}

/// Samples only rows `rows`, in the given order; used to check order independence.
pub fn sample_rig_rows(params: RigParams, rows: &[usize]) -> Result<Graph> {
    params.validate()?;
    let delta = delta_from_params(params.d, params.p, params.q)?;
    let labels = sample_labels(params.n, params.d, delta, params.seed);
    let masks = label_masks(params.d, &labels);
    let n = params.n;
    Ok(assemble(n, rows.iter().map(|&u| (u, sample_row(&masks, params.seed, u, n, 1.0, params.q)))))
}

pub fn sample_two_sided(params: TwoSidedParams) -> Result<RigInstance> {
    let delta = params.delta()?;
    let TwoSidedParams { n, d, p, q_up, q_down, seed } = params;
    let labels = sample_labels(n, d, delta, seed);
    let masks = label_masks(d, &labels);
    let graph = assemble(n, (0..n).map(|u| (u, sample_row(&masks, seed, u, n, q_up, q_down))));
    let base = RigParams { n, d, p, q: q_down, seed };
    Ok(RigInstance { params: base, q_up: Some(q_up), delta, labels, graph, ledger: None, masks })
}

/// Adds noise edges so the overall density becomes `p_prime`, keeping every edge and label.
///
/// The pair `(u, v)` is present in the output iff it was present in the input or
/// its noise uniform falls below `q'`; for generator-made instances this is the
/// same uniform that decided the input edge, so the coupling is exact.
pub fn densify(inst: &RigInstance, p_prime: f64) -> Result<RigInstance> {
    if inst.ledger.is_some() {
        return Err(Error::Invalid("densify requires an instance untouched by adversaries".into()));
    }
    if inst.q_up.is_some() {
        return Err(Error::Invalid("densify applies to one-sided instances only".into()));
    }
    let RigParams { n, p, q, seed, .. } = inst.params;
    if p_prime < p {
        return Err(Error::Model(format!("densify needs p' >= p, got p'={p_prime} < p={p}")));
    }
    if p_prime > 0.5 {
        return Err(Error::Model(format!("densify supports p' <= 1/2, got {p_prime}")));
    }
    let q_prime = coupled_noise(p, q, p_prime);
    let mut graph = inst.graph.clone();
    if p_prime > p && q_prime > q {
        for u in 0..n {
            let mut noise = PairNoise::row(seed, rng::NOISE, n, u);
            for v in u + 1..n {
                let r = noise.next();
                if r < q_prime && !graph.has_edge(u, v) && !inst.shares_label(u, v) {
                    graph.add_edge(u, v);
                }
            }
        }
    }
    let params = RigParams { p: p_prime, q: q_prime, ..inst.params };
    Ok(RigInstance::new(params, None, inst.delta, inst.labels.clone(), graph, None))
}

/// A graph together with the cliques planted into it.
#[derive(Clone, Debug, PartialEq)]
pub struct Planted {
    pub graph: Graph,
    /// `K_1, …, K_d`, each sorted.
    pub cliques: Vec<Vec<usize>>,
}

fn plant(g: &mut Graph, set: &[usize]) {
    for (i, &u) in set.iter().enumerate() {
        for &v in &set[i + 1..] {
            g.add_edge(u, v);
        }
    }
}

/// `G(n, q)` with one clique on a `Binomial(n, δ)` vertex set planted into it.
pub fn sample_planted_base(n: usize, q: f64, delta: f64, seed: u64) -> Result<Planted> {
    if !(0.0..1.0).contains(&q) || !(0.0..=1.0).contains(&delta) {
        return Err(Error::Model(format!("need q in [0,1) and delta in [0,1], got {q}, {delta}")));
    }
    let mut coins = rng::stream(seed, rng::PLANT);
    let k1: Vec<usize> = (0..n).filter(|_| rng::unit(&mut coins) < delta).collect();
    let mut graph = Graph::empty(n);
    for u in 0..n {
        let mut noise = PairNoise::row(seed, rng::NOISE, n, u);
        for v in u + 1..n {
            if noise.next() < q {
                graph.add_edge(u, v);
            }
        }
    }
    plant(&mut graph, &k1);
    Ok(Planted { graph, cliques: vec![k1] })
}

/// Plants `d - 1` further independent `δ`-cliques on top of `base`.
pub fn plant_clique_reduction(base: &Planted, d: usize, delta: f64, seed: u64) -> Result<Planted> {
    if d == 0 || base.cliques.is_empty() {
        return Err(Error::Invalid("need d >= 1 and a base with its first clique".into()));
    }
    let n = base.graph.n();
    let mut out = base.clone();
    let mut coins = rng::stream(seed, rng::PLANT + 1);
    for _ in 1..d {
        let k: Vec<usize> = (0..n).filter(|_| rng::unit(&mut coins) < delta).collect();
        plant(&mut out.graph, &k);
        out.cliques.push(k);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn delta_single_label_half() {
        assert_abs_diff_eq!(delta_from_params(1, 0.5, 0.0).unwrap(), 0.5f64.sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn delta_hundred_labels() {
        let expect = (1.0 - (-(2f64).ln() / 100.0).exp()).sqrt();
        let got = delta_from_params(100, 0.5, 0.0).unwrap();
        assert_abs_diff_eq!(got, expect, epsilon = 1e-15);
        assert_abs_diff_eq!(got, 0.083112, epsilon = 1e-5);
    }

    #[test]
    fn delta_vanishes_as_noise_reaches_density() {
        let got = delta_from_params(10, 0.5, 0.5 - 1e-12).unwrap();
        assert!(got < 1e-5);
    }

    #[test]
    fn delta_rejects_inverted_probabilities() {
        assert!(matches!(delta_from_params(3, 0.2, 0.3), Err(Error::Model(_))));
        assert!(matches!(delta_from_params(3, 0.2, 0.2), Err(Error::Model(_))));
        assert!(matches!(delta_from_params(3, 1.0, 0.1), Err(Error::Model(_))));
    }

    #[test]
    fn coupled_noise_value() {
        assert_abs_diff_eq!(coupled_noise(0.3, 0.0, 0.5), 2.0 / 7.0, epsilon = 1e-15);
        assert_abs_diff_eq!(coupled_noise(0.3, 0.1, 0.3), 0.1, epsilon = 1e-15);
    }

    #[test]
    fn two_sided_reduces_to_one_sided_delta() {
        let ts = TwoSidedParams { n: 10, d: 7, p: 0.4, q_up: 1.0, q_down: 0.1, seed: 1 };
        assert_abs_diff_eq!(ts.delta().unwrap(), delta_from_params(7, 0.4, 0.1).unwrap(), epsilon = 1e-12);
    }

    #[test]
    fn two_sided_with_unit_up_matches_sampler() {
        let ts = TwoSidedParams { n: 60, d: 5, p: 0.4, q_up: 1.0, q_down: 0.1, seed: 3 };
        let a = sample_two_sided(ts).unwrap();
        let b = sample_rig(RigParams::new(60, 5, 0.4, 0.1, 3)).unwrap();
        assert_eq!(a.labels, b.labels);
        assert_eq!(a.graph, b.graph);
    }

    #[test]
    fn single_label_without_noise_is_one_clique() {
        let inst = sample_rig(RigParams::new(80, 1, 0.5, 0.0, 11)).unwrap();
        let s = &inst.cliques()[0];
        assert!(inst.graph.is_clique(s));
        assert_eq!(inst.graph.edge_count(), s.len() * (s.len().saturating_sub(1)) / 2);
    }

    #[test]
    fn rows_sampled_in_any_order_agree() {
        let params = RigParams::new(50, 6, 0.5, 0.2, 21);
        let seq = sample_rig(params).unwrap().graph;
        let rev: Vec<usize> = (0..50).rev().collect();
        assert_eq!(sample_rig_rows(params, &rev).unwrap(), seq);
    }

    #[test]
    fn densify_identity_at_same_density() {
        let inst = sample_rig(RigParams::new(40, 3, 0.3, 0.1, 2)).unwrap();
        let out = densify(&inst, 0.3).unwrap();
        assert_eq!(out.graph, inst.graph);
    }

    #[test]
    fn densify_rejects_lower_density() {
        let inst = sample_rig(RigParams::new(20, 3, 0.3, 0.1, 2)).unwrap();
        assert!(densify(&inst, 0.2).is_err());
    }

    #[test]
    fn reduction_with_one_label_is_identity() {
        let base = sample_planted_base(30, 0.2, 0.3, 4).unwrap();
        let out = plant_clique_reduction(&base, 1, 0.3, 4).unwrap();
        assert_eq!(out, base);
    }

    #[test]
    fn reduction_keeps_first_clique() {
        let base = sample_planted_base(30, 0.2, 0.3, 4).unwrap();
        let out = plant_clique_reduction(&base, 5, 0.3, 4).unwrap();
        assert_eq!(out.cliques[0], base.cliques[0]);
        assert_eq!(out.cliques.len(), 5);
        for k in &out.cliques {
            assert!(out.graph.is_clique(k));
        }
    }
}
