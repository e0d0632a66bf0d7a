//! Axiom systems encoding cliques, bicliques and their repaired variants.

use serde::{Deserialize, Serialize};

use super::poly::{Monomial, Poly};
use crate::combinatorics::BipartiteView;
use crate::error::{Error, Result};
use crate::graph::Graph;

/// Which graph object a variable stands for.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VarKind {
    /// Clique membership, or left side of a biclique.
    X(usize),
    /// Right side of a biclique.
    Y(usize),
    /// Membership in the robust system.
    W(usize),
    /// Repair of the pair `(u, v)`.
    Z(usize, usize),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
}

impl Variable {
    fn new(kind: VarKind) -> Self {
        let name = match kind {
            VarKind::X(v) => format!("x_{v}"),
            VarKind::Y(v) => format!("y_{v}"),
            VarKind::W(v) => format!("w_{v}"),
            VarKind::Z(u, v) => format!("z_{u}_{v}"),
        };
        Variable { name, kind }
    }
}

/// Polynomial constraints over 0/1 variables.
///
/// `idempotent` lists the variables carrying `x² = x`; the multilinear basis
/// used everywhere applies it implicitly.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxiomSystem {
    /// Name of the constructor that produced the system.
    pub builder: String,
    pub variables: Vec<Variable>,
    pub idempotent: Vec<u32>,
    /// Each polynomial is required to vanish.
    pub equalities: Vec<Poly>,
    /// Each polynomial is required to be nonnegative.
    pub inequalities: Vec<Poly>,
}

impl AxiomSystem {
    pub fn new(builder: &str, variables: Vec<Variable>) -> Self {
        let idempotent = (0..variables.len() as u32).collect();
        AxiomSystem { builder: builder.to_string(), variables, idempotent, equalities: vec![], inequalities: vec![] }
    }

    pub fn num_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn find(&self, kind: VarKind) -> Option<u32> {
        self.variables.iter().position(|v| v.kind == kind).map(|i| i as u32)
    }

    /// Largest degree among the constraints.
    pub fn degree(&self) -> usize {
        self.equalities.iter().chain(&self.inequalities).map(Poly::degree).max().unwrap_or(0)
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.num_vars() as u32;
        for p in self.equalities.iter().chain(&self.inequalities) {
            if let Some(v) = p.variables().into_iter().find(|&v| v >= m) {
                return Err(Error::Invalid(format!("constraint references undeclared variable {v}")));
            }
        }
        let mut idem = self.idempotent.clone();
        idem.sort_unstable();
        idem.dedup();
        if idem.len() != self.num_vars() || idem.iter().enumerate().any(|(i, &v)| v != i as u32) {
            return Err(Error::Invalid("idempotence must be declared for every variable".into()));
        }
        Ok(())
    }

    /// True when the 0/1 point with support `ones` satisfies every constraint within `tol`.
    pub fn holds_at(&self, ones: &[u32], tol: f64) -> bool {
        let is_one = |v: u32| ones.contains(&v);
        self.equalities.iter().all(|h| h.eval(is_one).abs() <= tol)
            && self.inequalities.iter().all(|g| g.eval(is_one) >= -tol)
    }

    /// Substitutes fixed values and removes the fixed variables.
    ///
    /// Returns the reduced system and, for each original variable, its index in
    /// the reduced system (`None` when fixed).
    pub fn pin(&self, fixed: &[(u32, bool)]) -> Result<(AxiomSystem, Vec<Option<u32>>)> {
        let m = self.num_vars();
        let mut value: Vec<Option<bool>> = vec![None; m];
        for &(v, b) in fixed {
            let slot = value
                .get_mut(v as usize)
                .ok_or_else(|| Error::Invalid(format!("pinned variable {v} not declared")))?;
            if slot.is_some_and(|old| old != b) {
                return Err(Error::Invalid(format!("variable {v} pinned to both values")));
            }
            *slot = Some(b);
        }
        let mut map = vec![None; m];
        let mut vars = Vec::new();
        for i in 0..m {
            if value[i].is_none() {
                map[i] = Some(vars.len() as u32);
                vars.push(self.variables[i].clone());
            }
        }
        let sub = |v: u32| match value[v as usize] {
            Some(false) => None,
            Some(true) => Some(None),
            None => Some(map[v as usize]),
        };
        let mut out = AxiomSystem::new(&self.builder, vars);
        out.equalities = self.equalities.iter().map(|h| h.substitute(sub)).filter(|h| !h.is_zero()).collect();
        out.inequalities = self.inequalities.iter().map(|g| g.substitute(sub)).collect();
        Ok((out, map))
    }
}

fn window(vars: impl Iterator<Item = u32> + Clone, lo: f64, hi: f64) -> [Poly; 2] {
    let s = Poly::sum_of(vars);
    [s.sub(&Poly::constant(lo)), Poly::constant(hi).sub(&s)]
}

/// `x_v² = x_v`, `k ≤ Σ x_v ≤ 2k`, and `x_u x_v = 0` for every non-edge.
pub fn build_clique_axioms(graph: &Graph, k: f64) -> AxiomSystem {
    let n = graph.n();
    let mut sys = AxiomSystem::new("clique", (0..n).map(|v| Variable::new(VarKind::X(v))).collect());
    sys.inequalities.extend(window(0..n as u32, k, 2.0 * k));
    for u in 0..n {
        for v in u + 1..n {
            if !graph.has_edge(u, v) {
                sys.equalities.push(Poly::term(vec![u as u32, v as u32], 1.0));
            }
        }
    }
    sys
}

fn bipartite_core(h: &BipartiteView, builder: &str) -> AxiomSystem {
    let vars = h
        .left
        .iter()
        .map(|&v| Variable::new(VarKind::X(v)))
        .chain(h.right.iter().map(|&v| Variable::new(VarKind::Y(v))))
        .collect();
    AxiomSystem::new(builder, vars)
}

fn cross_non_edges(h: &BipartiteView) -> Vec<(u32, u32)> {
    let a = h.left.len();
    let mut out = Vec::new();
    for (i, &u) in h.left.iter().enumerate() {
        for (j, &v) in h.right.iter().enumerate() {
            if !h.has_edge(u, v) {
                out.push((i as u32, (a + j) as u32));
            }
        }
    }
    out
}

/// Biclique axioms: both side sums in `[k, 2k]` and `x_u y_v = 0` on cross non-edges.
///
/// Variables `0..|A|` are the `x`, followed by the `y`.
pub fn build_biclique_axioms(h: &BipartiteView, k: f64) -> AxiomSystem {
    let mut sys = build_reduced_axioms(h);
    sys.builder = "biclique".into();
    let a = h.left.len() as u32;
    let b = h.right.len() as u32;
    sys.inequalities.extend(window(0..a, k, 2.0 * k));
    sys.inequalities.extend(window(a..a + b, k, 2.0 * k));
    sys
}

/// Biclique axioms without the size windows.
pub fn build_reduced_axioms(h: &BipartiteView) -> AxiomSystem {
    let mut sys = bipartite_core(h, "reduced");
    for (i, j) in cross_non_edges(h) {
        sys.equalities.push(Poly::term(vec![i, j], 1.0));
    }
    sys
}

/// Reduced axioms with repair variables `z_{u,v}` on every cross pair,
/// `x_u y_v (1 - z_{u,v}) = 0` on cross non-edges and `Σ_{v ∈ B} z_{u,v} ≤ γ` for `u ∈ A`.
pub fn build_relaxed_axioms(h: &BipartiteView, gamma: f64) -> Result<AxiomSystem> {
    if !(gamma >= 0.0) {
        return Err(Error::Invalid(format!("repair budget must be nonnegative, got {gamma}")));
    }
    let mut sys = bipartite_core(h, "relaxed");
    let a = h.left.len();
    let b = h.right.len();
    let z0 = (a + b) as u32;
    for &u in &h.left {
        for &v in &h.right {
            sys.variables.push(Variable::new(VarKind::Z(u, v)));
        }
    }
    sys.idempotent = (0..sys.num_vars() as u32).collect();
    let z = |i: usize, j: usize| z0 + (i * b + j) as u32;
    for (i, jj) in cross_non_edges(h) {
        let j = jj as usize - a;
        let xy = Poly::term(vec![i, jj], 1.0);
        sys.equalities.push(xy.sub(&Poly::term(vec![i, jj, z(i as usize, j)], 1.0)));
    }
    for i in 0..a {
        sys.inequalities.push(Poly::constant(gamma).sub(&Poly::sum_of((0..b).map(|j| z(i, j)))));
    }
    Ok(sys)
}

/// Options for the robust system.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RobustOptions {
    /// Replace every `z_{u,v}` by `w_u w_v`, turning the budgets into
    /// `Σ_{v ∉ N(u)} w_u w_v ≤ γ` and dropping the repair equalities.
    pub eliminate_z: bool,
    /// Apply the budget to every vertex rather than only to the first side.
    pub budget_all: bool,
}

impl Default for RobustOptions {
    fn default() -> Self {
        RobustOptions { eliminate_z: true, budget_all: true }
    }
}

/// Robust two-sided system on the whole graph.
///
/// Variables `w_0..w_{n-1}` come first. Without elimination, one `z` per
/// non-edge follows in `Graph::edges` order of the complement.
pub fn build_robust_axioms(
    graph: &Graph,
    u_side: &[usize],
    v_side: &[usize],
    k: f64,
    gamma: f64,
    opts: RobustOptions,
) -> Result<AxiomSystem> {
    let n = graph.n();
    let mut seen = vec![0u8; n];
    for &v in u_side.iter().chain(v_side) {
        if v >= n {
            return Err(Error::Invalid(format!("vertex {v} out of range")));
        }
        seen[v] += 1;
    }
    if seen.iter().any(|&c| c != 1) {
        return Err(Error::Invalid("sides must partition the vertex set".into()));
    }
    if !(gamma >= 0.0) {
        return Err(Error::Invalid(format!("repair budget must be nonnegative, got {gamma}")));
    }
    let builder = if opts.eliminate_z { "robust-eliminated" } else { "robust" };
    let mut sys = AxiomSystem::new(builder, (0..n).map(|v| Variable::new(VarKind::W(v))).collect());
    sys.inequalities.extend(window(u_side.iter().map(|&v| v as u32), k, 2.0 * k));
    sys.inequalities.extend(window(v_side.iter().map(|&v| v as u32), k, 2.0 * k));
    let mut budgets: Vec<Poly> = vec![Poly::constant(gamma); n];
    for u in 0..n {
        for v in u + 1..n {
            if graph.has_edge(u, v) {
                continue;
            }
            let repair: Poly = if opts.eliminate_z {
                Poly::term(vec![u as u32, v as u32], 1.0)
            } else {
                let z = sys.variables.len() as u32;
                sys.variables.push(Variable::new(VarKind::Z(u, v)));
                let wuw = Poly::term(vec![u as u32, v as u32], 1.0);
                sys.equalities.push(wuw.sub(&Poly::term(vec![u as u32, v as u32, z], 1.0)));
                Poly::var(z)
            };
            budgets[u] = budgets[u].sub(&repair);
            budgets[v] = budgets[v].sub(&repair);
        }
    }
    sys.idempotent = (0..sys.num_vars() as u32).collect();
    let on_budget: Vec<bool> = if opts.budget_all {
        vec![true; n]
    } else {
        let mut b = vec![false; n];
        for &u in u_side {
            b[u] = true;
        }
        b
    };
    for (u, g) in budgets.into_iter().enumerate() {
        if on_budget[u] {
            sys.inequalities.push(g);
        }
    }
    Ok(sys)
}

/// Ground-truth refutation axioms: the clique axioms at size `k` plus
/// `Σ_{v ∉ S_ℓ} x_v ≥ 1` for every ground-truth clique.
pub fn build_outside_truth_axioms(graph: &Graph, k: f64, truth: &[Vec<usize>]) -> AxiomSystem {
    let mut sys = build_clique_axioms(graph, k);
    sys.builder = "clique-outside-truth".into();
    let n = graph.n();
    for s in truth {
        let mut inside = vec![false; n];
        for &v in s {
            inside[v] = true;
        }
        let outside = (0..n).filter(|&v| !inside[v]).map(|v| v as u32);
        sys.inequalities.push(Poly::sum_of(outside).sub(&Poly::constant(1.0)));
    }
    sys
}

/// Monomials that every equality of the form `c · x_α = 0` forces to vanish.
pub fn zero_monomials(sys: &AxiomSystem) -> Vec<Monomial> {
    sys.equalities
        .iter()
        .filter(|h| h.len() == 1)
        .map(|h| h.terms().next().unwrap().0.clone())
        .collect()
}
