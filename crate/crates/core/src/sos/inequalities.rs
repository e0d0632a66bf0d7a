//! Named certificate inequalities evaluated on pseudo-distributions.
//!
//! Each inequality is `LHS ≤ RHS` for polynomials built from a context. The
//! reported margin is `Ẽ[RHS - LHS]`. The sum-of-squares proofs of these
//! inequalities may need more degree than the pseudo-distribution carries, so a
//! negative margin at low degree is a measurement, not a contradiction.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::poly::{Monomial, Poly};
use super::pseudo::{pseudo_expectation, Moments, PseudoDistribution};
use crate::combinatorics::combinations;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InequalityName {
    /// `c_r |y| X_r² ≤ (n + r n²) m^r X_r + Δ X_r²`.
    BicliqueBalance,
    /// `c_r (|y| - 2γr) X_r² ≤ (n + r n²) m^r X_r + Δ X_r²`.
    RepairedBicliqueBalance,
    /// `x_T Σ_{v ∉ V(B_T)} x_v ≤ C (n/k)(n²/k)^{1/r} x_T`.
    TupleConcentration,
    /// `x_T (Σ_{v ∉ S_ℓ} x_v)(Σ_{S ⊆ S_in, |S| = r} x_S)² ≤ C n⁵/k² x_T`.
    LabelOverlap,
    /// `w_T Σ_{i ∉ Ṽ} w_i ≤ C √n w_T`.
    RobustConcentration,
    /// `w_T w_i Σ_{v ∈ S_ℓ \ M} w_v ≤ β w_T w_i`.
    RobustOverlap,
}

impl InequalityName {
    pub const ALL: [InequalityName; 6] = [
        InequalityName::BicliqueBalance,
        InequalityName::RepairedBicliqueBalance,
        InequalityName::TupleConcentration,
        InequalityName::LabelOverlap,
        InequalityName::RobustConcentration,
        InequalityName::RobustOverlap,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            InequalityName::BicliqueBalance => "biclique-balance",
            InequalityName::RepairedBicliqueBalance => "repaired-biclique-balance",
            InequalityName::TupleConcentration => "tuple-concentration",
            InequalityName::LabelOverlap => "label-overlap",
            InequalityName::RobustConcentration => "robust-concentration",
            InequalityName::RobustOverlap => "robust-overlap",
        }
    }
}

impl fmt::Display for InequalityName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for InequalityName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        InequalityName::ALL
            .into_iter()
            .find(|n| n.as_str() == s)
            .ok_or_else(|| Error::Invalid(format!("unknown inequality {s:?}")))
    }
}

/// Inputs for instantiating an inequality; every field is a variable index list
/// or scalar of the pseudo-distribution's system.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct InequalityContext {
    /// Left-side variables (`x`).
    pub left: Option<Vec<u32>>,
    /// Right-side variables (`y`).
    pub right: Option<Vec<u32>>,
    pub r: Option<usize>,
    pub p: Option<f64>,
    pub delta: Option<f64>,
    pub gamma: Option<f64>,
    /// Vertex count in the bound; defaults to `|left| + |right|` where used.
    pub n: Option<f64>,
    pub k: Option<f64>,
    /// The tuple `T`.
    pub tuple: Option<Vec<u32>>,
    /// Variables summed on the left-hand side (outside `V(B_T)`, outside `S_ℓ`, and so on).
    pub outside: Option<Vec<u32>>,
    /// `S_in` for label overlap, `S_ℓ \ M` for robust overlap.
    pub inside: Option<Vec<u32>>,
    /// The extra vertex `i` of robust overlap.
    pub vertex: Option<u32>,
    /// Constant in front of asymptotic bounds; defaults to 1.
    pub constant: Option<f64>,
    /// Robust-overlap bound; defaults to `C √n`.
    pub beta: Option<f64>,
}

fn need<T: Clone>(v: &Option<T>, name: &str) -> Result<T> {
    v.clone().ok_or_else(|| Error::Invalid(format!("missing context field `{name}`")))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InequalityCheck {
    pub name: InequalityName,
    pub lhs: f64,
    pub rhs: f64,
    /// `Ẽ[RHS - LHS]`.
    pub margin: f64,
    pub tolerance: f64,
    pub holds: bool,
    pub note: String,
}

/// Sum of `coef · Π factors`.
type Expr = Vec<(f64, Vec<Poly>)>;

fn evaluate(mu: &PseudoDistribution, e: &Expr) -> Result<f64> {
    match &mu.moments {
        Moments::Points { atoms } if mu.fixed.is_empty() => Ok(atoms
            .iter()
            .map(|(w, s)| {
                let on = |v: u32| s.binary_search(&v).is_ok();
                w * e.iter().map(|(c, fs)| c * fs.iter().map(|f| f.eval(on)).product::<f64>()).sum::<f64>()
            })
            .sum()),
        _ => {
            let mut total = 0.0;
            for (c, fs) in e {
                let prod = fs.iter().fold(Poly::constant(1.0), |acc, f| acc.mul(f));
                total += c * pseudo_expectation(mu, &prod)?;
            }
            Ok(total)
        }
    }
}

/// `Σ_{S ⊆ vars, |S| = r} x_S`.
fn subset_sum(vars: &[u32], r: usize) -> Poly {
    let mut p = Poly::zero();
    for s in combinations(vars.len(), r) {
        let m: Monomial = super::poly::monomial(s.iter().map(|&i| vars[i]).collect());
        p.add_term(m, 1.0);
    }
    p
}

fn balance_sides(ctx: &InequalityContext, repaired: bool) -> Result<(Expr, Expr)> {
    let left = need(&ctx.left, "left")?;
    let right = need(&ctx.right, "right")?;
    let r = need(&ctx.r, "r")?;
    let p = need(&ctx.p, "p")?;
    let delta = need(&ctx.delta, "delta")?;
    if !(0.0 < p && p < 1.0) {
        return Err(Error::Invalid(format!("p must lie in (0, 1), got {p}")));
    }
    let n = ctx.n.unwrap_or((left.len() + right.len()) as f64);
    let ratio = (1.0 - p) / p;
    let c_r = ratio.powi(r as i32);
    let m_r = ratio.max(1.0 / ratio).powi(r as i32);
    let x_r = subset_sum(&left, r);
    let mut y = Poly::sum_of(right);
    if repaired {
        let gamma = need(&ctx.gamma, "gamma")?;
        y = y.sub(&Poly::constant(2.0 * gamma * r as f64));
    }
    let lhs = vec![(c_r, vec![y, x_r.clone(), x_r.clone()])];
    let rhs = vec![((n + r as f64 * n * n) * m_r, vec![x_r.clone()]), (delta, vec![x_r.clone(), x_r])];
    Ok((lhs, rhs))
}

fn tuple_poly(ctx: &InequalityContext) -> Result<Poly> {
    Ok(Poly::term(need(&ctx.tuple, "tuple")?, 1.0))
}

fn sides(name: InequalityName, ctx: &InequalityContext) -> Result<(Expr, Expr)> {
    let c = ctx.constant.unwrap_or(1.0);
    match name {
        InequalityName::BicliqueBalance => balance_sides(ctx, false),
        InequalityName::RepairedBicliqueBalance => balance_sides(ctx, true),
        InequalityName::TupleConcentration => {
            let xt = tuple_poly(ctx)?;
            let out = Poly::sum_of(need(&ctx.outside, "outside")?);
            let n = need(&ctx.n, "n")?;
            let k = need(&ctx.k, "k")?;
            let r = need(&ctx.r, "r")? as f64;
            let bound = c * (n / k) * (n * n / k).powf(1.0 / r);
            Ok((vec![(1.0, vec![xt.clone(), out])], vec![(bound, vec![xt])]))
        }
        InequalityName::LabelOverlap => {
            let xt = tuple_poly(ctx)?;
            let out = Poly::sum_of(need(&ctx.outside, "outside")?);
            let inner = subset_sum(&need(&ctx.inside, "inside")?, need(&ctx.r, "r")?);
            let n = need(&ctx.n, "n")?;
            let k = need(&ctx.k, "k")?;
            let bound = c * n.powi(5) / (k * k);
            Ok((vec![(1.0, vec![xt.clone(), out, inner.clone(), inner])], vec![(bound, vec![xt])]))
        }
        InequalityName::RobustConcentration => {
            let wt = tuple_poly(ctx)?;
            let out = Poly::sum_of(need(&ctx.outside, "outside")?);
            let n = need(&ctx.n, "n")?;
            Ok((vec![(1.0, vec![wt.clone(), out])], vec![(c * n.sqrt(), vec![wt])]))
        }
        InequalityName::RobustOverlap => {
            let wt = tuple_poly(ctx)?;
            let wi = Poly::var(need(&ctx.vertex, "vertex")?);
            let inside = Poly::sum_of(need(&ctx.inside, "inside")?);
            let beta = match ctx.beta {
                Some(b) => b,
                None => c * need(&ctx.n, "n")?.sqrt(),
            };
            Ok((vec![(1.0, vec![wt.clone(), wi.clone(), inside])], vec![(beta, vec![wt, wi])]))
        }
    }
}

/// Evaluates `Ẽ_μ[RHS - LHS]` for the named inequality; holds iff the margin is at least `-tolerance`.
pub fn verify_certificate_inequality(
    mu: &PseudoDistribution,
    name: InequalityName,
    ctx: &InequalityContext,
    tolerance: f64,
) -> Result<InequalityCheck> {
    let (lhs_e, rhs_e) = sides(name, ctx)?;
    let lhs = evaluate(mu, &lhs_e)?;
    let rhs = evaluate(mu, &rhs_e)?;
    let margin = rhs - lhs;
    let holds = margin >= -tolerance;
    let note = if holds || matches!(mu.moments, Moments::Points { .. }) {
        String::new()
    } else {
        format!("violated at degree {}; the proof of this inequality may need higher degree", mu.degree)
    };
    Ok(InequalityCheck { name, lhs, rhs, margin, tolerance, holds, note })
}
