//! Pseudo-distributions, pseudo-expectations and their numerical checks.

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::axioms::AxiomSystem;
use super::poly::{is_subset, mono_mul, Monomial, Poly};
use crate::error::{Error, Result};
use crate::rng;

/// Moment storage.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Moments {
    /// Sorted `(monomial, value)` pairs; absent monomials have moment zero.
    Table { entries: Vec<(Monomial, f64)> },
    /// A genuine distribution: `(weight, support)` atoms.
    Points { atoms: Vec<(f64, Monomial)> },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverStatus {
    /// Feasibility solve only.
    Feasible,
    /// Objective maximised to tolerance.
    Optimal,
    /// Built from explicit points, not by the solver.
    Exact,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PseudoDistribution {
    pub degree: usize,
    pub num_vars: usize,
    pub moments: Moments,
    /// Variables fixed before solving; monomials are reduced by them on lookup.
    pub fixed: Vec<(u32, bool)>,
    /// Largest constraint violation of the returned moments.
    pub eta: f64,
    pub status: SolverStatus,
    pub objective_value: Option<f64>,
}

impl PseudoDistribution {
    /// Convex combination of 0/1 points, valid at every degree.
    pub fn from_points(num_vars: usize, degree: usize, atoms: Vec<(f64, Monomial)>) -> Result<Self> {
        let total: f64 = atoms.iter().map(|a| a.0).sum();
        if atoms.iter().any(|a| a.0 < 0.0) || (total - 1.0).abs() > 1e-12 {
            return Err(Error::Invalid("point weights must be nonnegative and sum to one".into()));
        }
        if atoms.iter().flat_map(|a| &a.1).any(|&v| v as usize >= num_vars) {
            return Err(Error::Invalid("point support references an undeclared variable".into()));
        }
        let atoms = atoms.into_iter().map(|(w, s)| (w, super::poly::monomial(s))).collect();
        Ok(PseudoDistribution {
            degree,
            num_vars,
            moments: Moments::Points { atoms },
            fixed: vec![],
            eta: 0.0,
            status: SolverStatus::Exact,
            objective_value: None,
        })
    }

    /// Moment table; entries are sorted and monomials normalised here.
    pub fn from_table(num_vars: usize, degree: usize, entries: Vec<(Monomial, f64)>) -> Self {
        let mut entries: Vec<(Monomial, f64)> = entries.into_iter().map(|(m, v)| (super::poly::monomial(m), v)).collect();
        entries.sort_by(|a, b| a.0.cmp(&b.0));
        PseudoDistribution {
            degree,
            num_vars,
            moments: Moments::Table { entries },
            fixed: vec![],
            eta: 0.0,
            status: SolverStatus::Feasible,
            objective_value: None,
        }
    }

    pub fn point(num_vars: usize, degree: usize, support: Monomial) -> Result<Self> {
        Self::from_points(num_vars, degree, vec![(1.0, support)])
    }

    /// `Ẽ[x_m]`.
    pub fn moment(&self, m: &[u32]) -> Result<f64> {
        if m.len() > self.degree {
            return Err(Error::Invalid(format!("monomial of degree {} exceeds pseudo-distribution degree {}", m.len(), self.degree)));
        }
        let mut reduced = Vec::with_capacity(m.len());
        for &v in m {
            match self.fixed.iter().find(|f| f.0 == v) {
                Some((_, false)) => return Ok(0.0),
                Some((_, true)) => {}
                None => reduced.push(v),
            }
        }
        Ok(match &self.moments {
            Moments::Table { entries } => entries
                .binary_search_by(|(k, _)| k.as_slice().cmp(reduced.as_slice()))
                .map(|i| entries[i].1)
                .unwrap_or(0.0),
            Moments::Points { atoms } => atoms.iter().filter(|(_, s)| is_subset(&reduced, s)).map(|(w, _)| *w).sum(),
        })
    }

    /// Keeps only moments up to `degree`.
    pub fn restrict(&self, degree: usize) -> Result<Self> {
        if degree > self.degree || degree % 2 == 1 {
            return Err(Error::Invalid(format!("cannot restrict degree {} to {degree}", self.degree)));
        }
        let mut out = self.clone();
        out.degree = degree;
        if let Moments::Table { entries } = &mut out.moments {
            entries.retain(|(m, _)| m.len() <= degree);
        }
        Ok(out)
    }

    /// `Ẽ[x_v]` for every variable.
    pub fn marginals(&self) -> Vec<f64> {
        (0..self.num_vars as u32).map(|v| self.moment(&[v]).unwrap_or(0.0)).collect()
    }
}

/// `Ẽ_μ[f]`, linear in `f`.
pub fn pseudo_expectation(mu: &PseudoDistribution, f: &Poly) -> Result<f64> {
    f.terms().map(|(m, c)| mu.moment(m).map(|v| c * v)).sum()
}

/// Monomials over `n` variables of size at most `s`, by size then lexicographically.
pub fn monomials_up_to(n: usize, s: usize, cap: usize) -> Option<Vec<Monomial>> {
    let mut out: Vec<Monomial> = vec![vec![]];
    let mut layer: Vec<Monomial> = vec![vec![]];
    for _ in 0..s {
        let mut next = Vec::new();
        for m in &layer {
            let start = m.last().map_or(0, |&v| v as usize + 1);
            for v in start..n {
                let mut e = m.clone();
                e.push(v as u32);
                next.push(e);
                if out.len() + next.len() > cap {
                    return None;
                }
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    Some(out)
}

fn localizing_matrix(mu: &PseudoDistribution, g: &Poly, basis: &[Monomial]) -> Result<DMatrix<f64>> {
    let b = basis.len();
    let mut m = DMatrix::zeros(b, b);
    for i in 0..b {
        for j in i..b {
            let s = mono_mul(&basis[i], &basis[j]);
            let v = pseudo_expectation(mu, &g.mul_monomial(&s))?;
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    Ok(m)
}

fn min_eig_relative(m: &DMatrix<f64>) -> (f64, f64) {
    if m.nrows() == 0 {
        return (0.0, 1.0);
    }
    let e = m.clone().symmetric_eigenvalues();
    let lmin = e.iter().fold(f64::INFINITY, |a, &v| a.min(v));
    let lmax = e.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
    (lmin, lmax.max(1.0))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub normalization_error: f64,
    /// Least eigenvalue of the moment matrix divided by `max(1, ‖M‖)`.
    pub moment_min_eig: f64,
    /// Same for each imposed inequality, by index.
    pub localizing_min_eig: Vec<(usize, f64)>,
    /// Largest `|Ẽ[h · x_m]|` relative to the coefficients of `h`.
    pub equality_max_violation: f64,
    /// False when the equality scan hit its cap.
    pub exhaustive: bool,
    pub passed: bool,
}

/// Report-only check of normalisation, moment and localizing PSD-ness, and equalities.
pub fn verify_pseudodistribution(mu: &PseudoDistribution, system: &AxiomSystem, eta: f64) -> VerificationReport {
    const CAP: usize = 200_000;
    let n = system.num_vars();
    let half = mu.degree / 2;
    let normalization_error = (mu.moment(&[]).unwrap_or(f64::NAN) - 1.0).abs();
    let mut ok = normalization_error <= eta;
    let mut exhaustive = true;
    let basis = monomials_up_to(n, half, CAP).unwrap_or_else(|| {
        exhaustive = false;
        monomials_up_to(n, 0, CAP).unwrap()
    });
    let moment_min_eig = match localizing_matrix(mu, &Poly::constant(1.0), &basis) {
        Ok(m) => {
            let (l, s) = min_eig_relative(&m);
            l / s
        }
        Err(_) => f64::NEG_INFINITY,
    };
    ok &= moment_min_eig >= -eta;
    let mut localizing_min_eig = Vec::new();
    for (i, g) in system.inequalities.iter().enumerate() {
        let dg = g.degree();
        if dg > mu.degree {
            continue;
        }
        let size = half - dg.div_ceil(2);
        let b: Vec<Monomial> = basis.iter().filter(|m| m.len() <= size).cloned().collect();
        let scale = g.max_abs_coefficient().max(1e-300);
        let v = match localizing_matrix(mu, &g.scale(1.0 / scale), &b) {
            Ok(m) => {
                let (l, s) = min_eig_relative(&m);
                l / s
            }
            Err(_) => f64::NEG_INFINITY,
        };
        ok &= v >= -eta;
        localizing_min_eig.push((i, v));
    }
    let mut equality_max_violation = 0.0f64;
    for h in &system.equalities {
        let dh = h.degree();
        if dh > mu.degree {
            continue;
        }
        let scale = h.max_abs_coefficient().max(1e-300);
        let ms = match monomials_up_to(n, mu.degree - dh, CAP) {
            Some(ms) => ms,
            None => {
                exhaustive = false;
                monomials_up_to(n, 0, CAP).unwrap()
            }
        };
        for m in ms {
            let v = pseudo_expectation(mu, &h.mul_monomial(&m)).unwrap_or(f64::INFINITY);
            equality_max_violation = equality_max_violation.max(v.abs() / scale);
        }
    }
    ok &= equality_max_violation <= eta;
    VerificationReport {
        normalization_error,
        moment_min_eig,
        localizing_min_eig,
        equality_max_violation,
        exhaustive,
        passed: ok,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CauchySchwarzReport {
    pub samples: usize,
    /// Largest `Ẽ[fg]² - Ẽ[f²]Ẽ[g²]` relative to `1 + Ẽ[f²]Ẽ[g²]`.
    pub worst_excess: f64,
    pub passed: bool,
}

/// Samples random `f, g` of degree at most half the pseudo-distribution degree and
/// checks `Ẽ[fg]² ≤ Ẽ[f²] Ẽ[g²]` up to `tol`.
pub fn cauchy_schwarz_check(mu: &PseudoDistribution, samples: usize, seed: u64, tol: f64) -> Result<CauchySchwarzReport> {
    let half = mu.degree / 2;
    let n = mu.num_vars;
    let mut r = rng::stream(seed, rng::HEURISTIC + 1);
    let free: Vec<u32> = (0..n as u32).filter(|v| !mu.fixed.iter().any(|f| f.0 == *v)).collect();
    let random_poly = |r: &mut rand_chacha::ChaCha8Rng| {
        let mut p = Poly::zero();
        for _ in 0..6 {
            let size = r.gen_range(0..=half);
            let mut m: Vec<u32> = (0..size).filter_map(|_| free.get(r.gen_range(0..free.len().max(1))).copied()).collect();
            m.sort_unstable();
            m.dedup();
            p.add_term(m, r.gen_range(-1.0..1.0));
        }
        p
    };
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..samples {
        let f = random_poly(&mut r);
        let g = random_poly(&mut r);
        let fg = pseudo_expectation(mu, &f.mul(&g))?;
        let ff = pseudo_expectation(mu, &f.mul(&f))?;
        let gg = pseudo_expectation(mu, &g.mul(&g))?;
        let excess = (fg * fg - ff * gg) / (1.0 + (ff * gg).abs());
        worst = worst.max(excess);
    }
    Ok(CauchySchwarzReport { samples, worst_excess: worst, passed: samples == 0 || worst <= tol })
}
