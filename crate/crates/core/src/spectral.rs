//! Spectral norms of centred ±1 adjacency matrices.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::model::RigInstance;
use crate::rng;

/// The matrix with `+1` on edges, `-1` on non-edges and `0` on the diagonal.
#[derive(Clone, Copy, Debug)]
pub struct CenteredAdjacency<'g> {
    pub graph: &'g Graph,
}

impl<'g> CenteredAdjacency<'g> {
    pub fn new(graph: &'g Graph) -> Self {
        CenteredAdjacency { graph }
    }

    pub fn n(&self) -> usize {
        self.graph.n()
    }

    /// `A x = 2 (adjacency · x) - (Σ x) 1 + x`.
    pub fn apply(&self, x: &[f64], out: &mut [f64]) {
        let total: f64 = x.iter().sum();
        for (u, o) in out.iter_mut().enumerate() {
            let mut s = 0.0;
            for v in self.graph.neighbors(u) {
                s += x[v];
            }
            *o = 2.0 * s - total + x[u];
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.n();
        DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                0.0
            } else if self.graph.has_edge(i, j) {
                1.0
            } else {
                -1.0
            }
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerTrace {
    pub norm: f64,
    pub iterations: usize,
    /// Estimate after every iteration; non-decreasing.
    pub history: Vec<f64>,
}

/// Power iteration for `‖A‖` using the estimate `‖A x‖ / ‖x‖`, which never decreases.
///
/// Stops once the geometric tail extrapolated from the last two increments
/// falls below `tol` relative to the estimate.
pub fn spectral_norm_trace(a: &CenteredAdjacency, tol: f64, max_iter: usize, seed: u64) -> Result<PowerTrace> {
    if !(tol > 0.0) {
        return Err(Error::Invalid(format!("tolerance must be positive, got {tol}")));
    }
    let n = a.n();
    if n <= 1 {
        return Ok(PowerTrace { norm: 0.0, iterations: 0, history: vec![] });
    }
    let mut r = rng::stream(seed, rng::HEURISTIC);
    let mut x: Vec<f64> = (0..n).map(|_| rng::unit(&mut r) - 0.5).collect();
    normalize(&mut x);
    let mut y = vec![0.0; n];
    let mut history = Vec::new();
    let mut prev_inc = f64::INFINITY;
    for it in 0..max_iter {
        a.apply(&x, &mut y);
        let est = norm(&y);
        if est == 0.0 {
            return Ok(PowerTrace { norm: 0.0, iterations: it + 1, history });
        }
        let inc = history.last().map_or(f64::INFINITY, |&h| est - h);
        history.push(est);
        std::mem::swap(&mut x, &mut y);
        x.iter_mut().for_each(|v| *v /= est);
        if inc.is_finite() {
            let rate = if prev_inc.is_finite() && prev_inc > 0.0 { (inc / prev_inc).clamp(0.0, 0.999_999) } else { 0.999_999 };
            let tail = inc.max(0.0) * rate / (1.0 - rate);
            if it >= 3 && (tail <= tol * est || inc <= f64::EPSILON * est) {
                return Ok(PowerTrace { norm: est, iterations: it + 1, history });
            }
            prev_inc = inc;
        }
    }
    Err(Error::NonConvergence(format!("power iteration did not reach tolerance {tol} in {max_iter} steps")))
}

pub fn spectral_norm(a: &CenteredAdjacency, tol: f64) -> Result<f64> {
    spectral_norm_trace(a, tol, 200_000, 0).map(|t| t.norm)
}

/// Reference value from a dense symmetric eigendecomposition.
pub fn dense_spectral_norm(a: &CenteredAdjacency) -> Result<f64> {
    if a.n() > 2000 {
        return Err(Error::SizeBudget(format!("dense eigensolver limited to n <= 2000, got {}", a.n())));
    }
    let eig = a.to_dense().symmetric_eigen();
    Ok(eig.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs())))
}

fn norm(x: &[f64]) -> f64 {
    DVector::from_column_slice(x).norm()
}

fn normalize(x: &mut [f64]) {
    let s = norm(x);
    x.iter_mut().for_each(|v| *v /= s);
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralReport {
    pub seed: u64,
    pub n: usize,
    pub d: usize,
    pub norm: f64,
    /// `‖A‖ / (n d^{-1/4})`.
    pub ratio_nd: f64,
    /// `‖A‖ / k` with `k = δ n`.
    pub ratio_k: f64,
}

/// Norm and both normalisations for an instance at `p = 1/2`, `q = 0`.
pub fn spectral_gap_check(inst: &RigInstance, tol: f64) -> Result<SpectralReport> {
    if inst.params.p != 0.5 || inst.params.q != 0.0 || inst.q_up.is_some() {
        return Err(Error::Invalid(format!(
            "spectral check needs p = 1/2 and q = 0, got p={} q={}",
            inst.params.p, inst.params.q
        )));
    }
    let a = CenteredAdjacency::new(&inst.graph);
    let norm = spectral_norm_trace(&a, tol, 200_000, inst.params.seed)?.norm;
    let n = inst.n() as f64;
    let d = inst.d() as f64;
    Ok(SpectralReport {
        seed: inst.params.seed,
        n: inst.n(),
        d: inst.d(),
        norm,
        ratio_nd: norm / (n * d.powf(-0.25)),
        ratio_k: norm / inst.k(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn complete_and_empty_graphs() {
        for g in [Graph::complete(30), Graph::empty(30)] {
            let a = CenteredAdjacency::new(&g);
            assert_relative_eq!(spectral_norm(&a, 1e-10).unwrap(), 29.0, max_relative = 1e-8);
        }
    }

    #[test]
    fn matvec_matches_dense() {
        let g = Graph::from_edges(5, &[(0, 1), (1, 2), (3, 4), (0, 4)]);
        let a = CenteredAdjacency::new(&g);
        let x = [0.3, -1.0, 2.0, 0.5, 1.5];
        let mut y = [0.0; 5];
        a.apply(&x, &mut y);
        let dense = a.to_dense() * DVector::from_column_slice(&x);
        for i in 0..5 {
            assert_relative_eq!(y[i], dense[i], epsilon = 1e-12);
        }
    }
}
