//! Recovery algorithms, refutation and scoring.
//!
//! [`exact_recovery`] and [`approx_recovery`] share the same skeleton: split the
//! vertices with a fair coin, sample `t`-tuples, solve one relaxation per tuple
//! and round its marginals. [`sparse_recovery`] reads cliques off common
//! neighbourhoods directly. Every run records a [`TupleTrace`] per tuple.

mod exact;
mod robust;
mod score;
mod sparse;
mod refute;

use std::time::Duration;

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;
use crate::sos::SolverOptions;

pub use exact::exact_recovery;
pub use refute::{default_refutation_slack, refute, RefutationReport, RefutationVerdict};
pub use robust::{approx_recovery, pseudo_concentration_check, ConcentrationCheck};
pub use score::{evaluate_recovery, RecoveryScore};
pub use sparse::{sparse_recovery, sparse_recovery_with, sparse_t_default, SparseOptions};

/// Inputs shared by the tuple-based algorithms. `p` and `d` are the model
/// parameters the algorithms are allowed to know.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RecoveryParams {
    /// Target clique size.
    pub k: f64,
    /// Slack `ε` of the biclique windows and the rounding threshold `1 − √ε`.
    pub epsilon: f64,
    pub p: f64,
    pub d: usize,
    /// Overrides `γ = (1/α) max{16p⁻⁶, 1000} max{1, (p/(1−p))⁶}`.
    pub gamma_const: Option<f64>,
    /// Overrides `t = 2⌈log_{1/p} γ⌉`; when absent the formula is clamped to `t_max`.
    pub t: Option<usize>,
    pub t_max: usize,
    /// Caps the number of sampled tuples.
    pub num_tuples: Option<usize>,
    /// Constant `c` in the tuple count `c · d · ln(d+1) · (n/k)^t`.
    pub tuple_constant: f64,
    pub sos_degree: usize,
    /// Rounding threshold of the robust algorithm; defaults to `1/(8t)`.
    pub rho: Option<f64>,
    pub eps_deg: f64,
    pub eps_node: f64,
    pub seed: u64,
    /// Drop vertices with fewer than `k_bip` neighbours on the other side before solving.
    pub peel: bool,
    /// Use the point distribution on a residual that is already a complete biclique
    /// with both sides in `[k_bip, 2 k_bip]`.
    pub witness_shortcut: bool,
    /// Prune near-duplicates at `10 ε_deg / ρ` (an absolute count) instead of `(10 ε_node / ρ) k`.
    pub literal_prune: bool,
    pub solver: SolverOptions,
}

impl Default for RecoveryParams {
    fn default() -> Self {
        RecoveryParams {
            k: 0.0,
            epsilon: 0.01,
            p: 0.5,
            d: 1,
            gamma_const: None,
            t: None,
            t_max: 4,
            num_tuples: None,
            tuple_constant: 4.0,
            sos_degree: 4,
            rho: None,
            eps_deg: 0.0,
            eps_node: 0.0,
            seed: 0,
            peel: true,
            witness_shortcut: true,
            literal_prune: false,
            solver: SolverOptions::default(),
        }
    }
}

/// Values actually used by a run, after defaults and clamps.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResolvedParams {
    pub n: usize,
    pub k: f64,
    pub epsilon: f64,
    pub alpha: f64,
    pub gamma: f64,
    /// `2⌈log_{1/p} γ⌉` before clamping.
    pub t_formula: usize,
    pub t: usize,
    pub t_clamped: bool,
    pub num_tuples: usize,
    pub k_bip: f64,
    pub k_tilde: f64,
    pub rho: f64,
    pub sos_degree: usize,
}

impl RecoveryParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.k > 0.0) {
            return Err(Error::Invalid(format!("k must be positive, got {}", self.k)));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::Invalid(format!("epsilon must lie in (0,1), got {}", self.epsilon)));
        }
        if !(self.p > 0.0 && self.p < 1.0) {
            return Err(Error::Invalid(format!("p must lie in (0,1), got {}", self.p)));
        }
        if self.d == 0 {
            return Err(Error::Invalid("d must be at least 1".into()));
        }
        if self.t == Some(0) || self.t_max == 0 {
            return Err(Error::Invalid("t must be at least 1".into()));
        }
        if let Some(r) = self.rho {
            if !(r > 0.0 && r < 1.0) {
                return Err(Error::Invalid(format!("rho must lie in (0,1), got {r}")));
            }
        }
        if !(self.eps_deg >= 0.0 && self.eps_deg < 1.0 && self.eps_node >= 0.0 && self.eps_node < 0.5) {
            return Err(Error::Invalid("eps_deg must lie in [0,1) and eps_node in [0,1/2)".into()));
        }
        if self.sos_degree == 0 {
            return Err(Error::Invalid("sos_degree must be at least 1".into()));
        }
        Ok(())
    }

    pub fn resolve(&self, n: usize) -> Result<ResolvedParams> {
        self.validate()?;
        if n < 2 {
            return Err(Error::Invalid(format!("graph needs at least two vertices, got {n}")));
        }
        let alpha = if self.d <= 1 { 1.0 / (n as f64).ln() } else { (self.d as f64).ln() / (n as f64).ln() };
        let gamma = self.gamma_const.unwrap_or_else(|| {
            let p = self.p;
            (1.0 / alpha) * (16.0 * p.powi(-6)).max(1000.0) * (p / (1.0 - p)).powi(6).max(1.0)
        });
        let t_formula = 2 * (gamma.ln() / (1.0 / self.p).ln()).ceil().max(1.0) as usize;
        let (t, t_clamped) = match self.t {
            Some(t) => (t, false),
            None if t_formula > self.t_max => (self.t_max, true),
            None => (t_formula, false),
        };
        if t > n {
            return Err(Error::Invalid(format!("tuple length {t} exceeds n = {n}")));
        }
        let cover = self.tuple_constant * self.d as f64 * (self.d as f64 + 1.0).ln() * (n as f64 / self.k).powi(t as i32);
        let formula_count = cover.ceil().clamp(1.0, 1e9) as usize;
        let num_tuples = self.num_tuples.map_or(formula_count, |cap| cap.min(formula_count));
        let rho = self.rho.unwrap_or(1.0 / (8.0 * t as f64));
        Ok(ResolvedParams {
            n,
            k: self.k,
            epsilon: self.epsilon,
            alpha,
            gamma,
            t_formula,
            t,
            t_clamped,
            num_tuples,
            k_bip: (1.0 - self.epsilon) * self.k / 2.0,
            k_tilde: (1.0 - 2.0 * self.eps_node) * self.k,
            rho,
            sos_degree: self.sos_degree,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TupleVerdict {
    Accepted,
    Discarded,
    Infeasible,
    /// Not processed: a size budget tripped or the solver failed to converge.
    Skipped,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TupleTrace {
    pub tuple: Vec<usize>,
    pub verdict: TupleVerdict,
    pub reason: String,
    /// Rounded set `S_T` before any clean-up.
    pub rounded: Vec<usize>,
    /// Final candidate (after clean-up for the exact algorithm).
    pub candidate: Vec<usize>,
}

impl TupleTrace {
    fn new(tuple: Vec<usize>, verdict: TupleVerdict, reason: impl Into<String>) -> Self {
        TupleTrace { tuple, verdict, reason: reason.into(), rounded: vec![], candidate: vec![] }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecoveryReport {
    pub algorithm: String,
    /// Output list, each set sorted.
    pub sets: Vec<Vec<usize>>,
    pub resolved: Option<ResolvedParams>,
    pub traces: Vec<TupleTrace>,
    pub notes: Vec<String>,
    pub score: Option<RecoveryScore>,
    /// Not serialized so that reports are reproducible byte for byte.
    #[serde(skip)]
    pub wall_time: Duration,
}

impl RecoveryReport {
    pub(crate) fn new(algorithm: &str) -> Self {
        RecoveryReport {
            algorithm: algorithm.into(),
            sets: vec![],
            resolved: None,
            traces: vec![],
            notes: vec![],
            score: None,
            wall_time: Duration::ZERO,
        }
    }

    pub fn count(&self, verdict: TupleVerdict) -> usize {
        self.traces.iter().filter(|t| t.verdict == verdict).count()
    }

    /// Attach the score against `truth` and return it.
    pub fn score_against(&mut self, truth: &[Vec<usize>], rho: f64) -> &RecoveryScore {
        self.score = Some(evaluate_recovery(&self.sets, truth, rho));
        self.score.as_ref().unwrap()
    }
}

/// Fair coin per vertex, in vertex order.
pub fn split_vertices(n: usize, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut r = rng::stream(seed, rng::SPLIT);
    let (mut u, mut v) = (vec![], vec![]);
    for x in 0..n {
        if r.gen::<bool>() {
            u.push(x);
        } else {
            v.push(x);
        }
    }
    (u, v)
}

/// `count` uniformly random sorted `t`-subsets of `[n]`, drawn independently.
pub fn sample_tuples(n: usize, t: usize, count: usize, seed: u64) -> Vec<Vec<usize>> {
    let mut r = rng::stream(seed, rng::TUPLES);
    (0..count)
        .map(|_| {
            let mut s = sample(&mut r, n, t).into_vec();
            s.sort_unstable();
            s
        })
        .collect()
}
