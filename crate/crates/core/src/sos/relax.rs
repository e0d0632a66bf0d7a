//! Degree-`2D` moment relaxation of an axiom system.
//!
//! The moment matrix is indexed by the monomials of size at most `D` that are
//! not forced to vanish by a single-term equality. Every nonzero moment is read
//! from one representative position of that matrix; the remaining positions are
//! tied to it by linear rows. Inequalities enter through localizing blocks (or
//! scalar slacks when their half-degree budget is zero), multi-term equalities
//! through explicit rows.
//!
//! Phase one minimises an artificial `τ ≥ 0` in `A(X) - τ r = b`. A near-zero
//! optimum yields a pseudo-distribution; a positive optimum yields dual
//! multipliers that are turned into a sum-of-squares refutation and checked
//! independently by [`verify_certificate`].

use std::collections::{HashMap, HashSet};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::axioms::AxiomSystem;
use super::poly::{is_subset, mono_mul, Monomial, Poly};
use super::pseudo::{PseudoDistribution, SolverStatus};
use super::sdp::{solve_sdp, Block, BlockKind, BlockMat, IpmOptions, IpmStatus, Row, Sdp, Term};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Interior-point stopping tolerance.
    pub tol: f64,
    pub max_iter: usize,
    /// Largest constraint violation accepted for a pseudo-distribution.
    pub eta: f64,
    /// Least phase-one optimum accepted as infeasibility.
    pub infeasibility_margin: f64,
    /// Residual bound for certificate verification.
    pub certificate_tol: f64,
    pub max_rows: usize,
    pub max_block: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: 1e-9,
            max_iter: 150,
            eta: 1e-6,
            infeasibility_margin: 1e-4,
            certificate_tol: 1e-6,
            max_rows: 3000,
            max_block: 1500,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum SolveOutcome {
    Feasible(PseudoDistribution),
    Infeasible(DualCertificate),
}

impl SolveOutcome {
    pub fn is_feasible(&self) -> bool {
        matches!(self, SolveOutcome::Feasible(_))
    }

    pub fn pseudo(&self) -> Option<&PseudoDistribution> {
        match self {
            SolveOutcome::Feasible(p) => Some(p),
            SolveOutcome::Infeasible(_) => None,
        }
    }

    pub fn certificate(&self) -> Option<&DualCertificate> {
        match self {
            SolveOutcome::Infeasible(c) => Some(c),
            SolveOutcome::Feasible(_) => None,
        }
    }
}

/// `Σ_ij G_ij x_{B_i ∪ B_j}` with `G ⪰ 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GramBlock {
    pub basis: Vec<Monomial>,
    pub gram: Vec<Vec<f64>>,
}

impl GramBlock {
    fn from_matrix(basis: Vec<Monomial>, m: &DMatrix<f64>) -> Self {
        let gram = (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect();
        GramBlock { basis, gram }
    }

    pub fn poly(&self) -> Poly {
        let mut p = Poly::zero();
        for (i, bi) in self.basis.iter().enumerate() {
            for (j, bj) in self.basis.iter().enumerate() {
                p.add_term(mono_mul(bi, bj), self.gram[i][j]);
            }
        }
        p
    }

    /// Least eigenvalue of the symmetric part.
    pub fn min_eigenvalue(&self) -> f64 {
        let b = self.basis.len();
        if b == 0 {
            return 0.0;
        }
        let m = DMatrix::from_fn(b, b, |i, j| 0.5 * (self.gram[i][j] + self.gram[j][i]));
        m.symmetric_eigenvalues().iter().fold(f64::INFINITY, |a, &v| a.min(v))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Localizer {
    pub inequality: usize,
    pub block: GramBlock,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EqualityMultiplier {
    pub equality: usize,
    pub monomial: Monomial,
    pub coef: f64,
}

/// Refutation `σ₀ + Σ σ_g g + Σ λ h x_m ≡ constant < 0`.
///
/// Indices and monomials refer to the system obtained by applying `pins`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualCertificate {
    pub degree: usize,
    pub pins: Vec<(u32, bool)>,
    pub sos: GramBlock,
    pub localizers: Vec<Localizer>,
    pub equalities: Vec<EqualityMultiplier>,
    pub constant: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateCheck {
    pub min_eigenvalue: f64,
    /// Largest coefficient of `identity - constant`.
    pub residual: f64,
    pub constant: f64,
    pub valid: bool,
}

/// Rebuilds the polynomial identity from scratch and checks it.
pub fn verify_certificate(system: &AxiomSystem, cert: &DualCertificate, tol: f64) -> Result<CertificateCheck> {
    let (sys, _) = system.pin(&cert.pins)?;
    let n = sys.num_vars() as u32;
    let in_range = |m: &Monomial| m.iter().all(|&v| v < n);
    let square = |g: &GramBlock| g.gram.len() == g.basis.len() && g.gram.iter().all(|r| r.len() == g.basis.len());
    let mut blocks = vec![&cert.sos];
    blocks.extend(cert.localizers.iter().map(|l| &l.block));
    if blocks.iter().any(|g| !square(g) || !g.basis.iter().all(in_range)) {
        return Err(Error::Format("certificate Gram block is malformed".into()));
    }
    let mut p = cert.sos.poly();
    for l in &cert.localizers {
        let g = sys
            .inequalities
            .get(l.inequality)
            .ok_or_else(|| Error::Format(format!("certificate names inequality {}", l.inequality)))?;
        p = p.add(&l.block.poly().mul(g));
    }
    for e in &cert.equalities {
        let h = sys
            .equalities
            .get(e.equality)
            .ok_or_else(|| Error::Format(format!("certificate names equality {}", e.equality)))?;
        if !in_range(&e.monomial) {
            return Err(Error::Format("certificate multiplier monomial out of range".into()));
        }
        p = p.add(&h.mul_monomial(&e.monomial).scale(e.coef));
    }
    let residual = p.sub(&Poly::constant(cert.constant)).max_abs_coefficient();
    let min_eigenvalue = blocks.iter().map(|g| g.min_eigenvalue()).fold(f64::INFINITY, f64::min);
    let scale = cert.constant.abs();
    let valid = cert.constant < 0.0 && residual <= tol * scale && min_eigenvalue >= -1e-9 * scale.max(1.0);
    Ok(CertificateCheck { min_eigenvalue, residual, constant: cert.constant, valid })
}

/// Upward-closed set of monomials generated by single-term equalities.
struct ZeroSet {
    singles: HashMap<u32, usize>,
    pairs: HashMap<(u32, u32), usize>,
    longer: Vec<(Monomial, usize)>,
}

impl ZeroSet {
    fn new(sys: &AxiomSystem) -> Self {
        let mut z = ZeroSet { singles: HashMap::new(), pairs: HashMap::new(), longer: Vec::new() };
        for (e, h) in sys.equalities.iter().enumerate() {
            if h.len() != 1 {
                continue;
            }
            let m = h.terms().next().unwrap().0.clone();
            match m.len() {
                0 => {}
                1 => {
                    z.singles.entry(m[0]).or_insert(e);
                }
                2 => {
                    z.pairs.entry((m[0], m[1])).or_insert(e);
                }
                _ => z.longer.push((m, e)),
            }
        }
        z
    }

    /// Index of an equality whose monomial divides `m`.
    fn witness(&self, m: &[u32]) -> Option<usize> {
        for (i, &u) in m.iter().enumerate() {
            if let Some(&e) = self.singles.get(&u) {
                return Some(e);
            }
            for &v in &m[i + 1..] {
                if let Some(&e) = self.pairs.get(&(u, v)) {
                    return Some(e);
                }
            }
        }
        self.longer.iter().find(|(g, _)| is_subset(g, m)).map(|&(_, e)| e)
    }

    fn is_zero(&self, m: &[u32]) -> bool {
        self.witness(m).is_some()
    }
}

enum LocKind {
    Dense { block: usize, size: usize },
    Slack { slot: usize },
}

struct Localizing {
    inequality: usize,
    scale: f64,
    kind: LocKind,
}

struct EqRow {
    row: usize,
    equality: usize,
    monomial: Monomial,
    scale: f64,
}

struct Relaxation {
    basis: Vec<Monomial>,
    ids: HashMap<Monomial, usize>,
    moments: Vec<Monomial>,
    reps: Vec<(usize, usize)>,
    zero: ZeroSet,
    /// Moment block, then localizing blocks; the scalar block is appended per phase.
    dense: Vec<BlockKind>,
    n_slack: usize,
    localizing: Vec<Localizing>,
    rows: Vec<Row>,
    eq_rows: Vec<EqRow>,
}

type Entry = (usize, usize, usize, f64);

/// Anchors each entry at its more frequent endpoint so rows become few wide terms.
fn finish_row(mut entries: Vec<Entry>, rhs: f64) -> Option<Row> {
    let mut freq: HashMap<(usize, usize), usize> = HashMap::new();
    for e in &entries {
        *freq.entry((e.0, e.1)).or_default() += 1;
        if e.1 != e.2 {
            *freq.entry((e.0, e.2)).or_default() += 1;
        }
    }
    for e in entries.iter_mut() {
        let (fi, fj) = (freq[&(e.0, e.1)], freq[&(e.0, e.2)]);
        if fj > fi || (fj == fi && e.2 < e.1) {
            std::mem::swap(&mut e.1, &mut e.2);
        }
    }
    entries.sort_by(|a, b| (a.0, a.1, a.2).cmp(&(b.0, b.1, b.2)));
    let mut merged: Vec<Entry> = Vec::with_capacity(entries.len());
    for e in entries {
        match merged.last_mut() {
            Some(last) if (last.0, last.1, last.2) == (e.0, e.1, e.2) => last.3 += e.3,
            _ => merged.push(e),
        }
    }
    merged.retain(|e| e.3.abs() > 1e-15);
    if merged.is_empty() {
        return None;
    }
    let mut terms: Vec<Term> = Vec::new();
    for (block, a, j, v) in merged {
        match terms.last_mut() {
            Some(t) if t.block == block && t.a == a => t.c.push((j, v)),
            _ => terms.push(Term { block, a, c: vec![(j, v)] }),
        }
    }
    Some(Row { terms, rhs })
}

fn row_key(r: &Row) -> Vec<u64> {
    let mut k = vec![r.rhs.to_bits()];
    for t in &r.terms {
        for &(j, v) in &t.c {
            k.extend([t.block as u64, t.a as u64, j as u64, v.to_bits()]);
        }
    }
    k
}

impl Relaxation {
    fn build(sys: &AxiomSystem, half: usize, opts: &SolverOptions) -> Result<Self> {
        let n = sys.num_vars();
        let zero = ZeroSet::new(sys);
        let mut basis: Vec<Monomial> = vec![vec![]];
        let mut layer: Vec<Monomial> = vec![vec![]];
        for _ in 0..half {
            let mut next = Vec::new();
            for m in &layer {
                let start = m.last().map_or(0, |&v| v as usize + 1);
                for v in start..n {
                    let mut e = m.clone();
                    e.push(v as u32);
                    if zero.is_zero(&e) {
                        continue;
                    }
                    next.push(e);
                    if basis.len() + next.len() > opts.max_block {
                        return Err(Error::SizeBudget(format!(
                            "moment basis exceeds {} monomials at degree {}",
                            opts.max_block,
                            2 * half
                        )));
                    }
                }
            }
            basis.extend(next.iter().cloned());
            layer = next;
        }
        let b = basis.len();

        let mut ids: HashMap<Monomial, usize> = HashMap::new();
        let mut moments = Vec::new();
        let mut reps = Vec::new();
        let mut pending: Vec<(usize, usize, Option<usize>)> = Vec::new();
        for i in 0..b {
            for j in i..b {
                let m = mono_mul(&basis[i], &basis[j]);
                if zero.is_zero(&m) {
                    pending.push((i, j, None));
                    continue;
                }
                match ids.get(&m) {
                    Some(&id) => pending.push((i, j, Some(id))),
                    None => {
                        ids.insert(m.clone(), moments.len());
                        moments.push(m);
                        reps.push((i, j));
                    }
                }
            }
        }
        if pending.len() + 1 > opts.max_rows {
            return Err(Error::SizeBudget(format!(
                "moment relaxation needs more than {} rows at degree {}",
                opts.max_rows,
                2 * half
            )));
        }

        let mut rel = Relaxation {
            basis,
            ids,
            moments,
            reps,
            zero,
            dense: vec![BlockKind::Dense(b)],
            n_slack: 0,
            localizing: Vec::new(),
            rows: Vec::new(),
            eq_rows: Vec::new(),
        };
        let mut seen: HashSet<Vec<u64>> = HashSet::new();
        let mut push = |rel: &mut Relaxation, row: Option<Row>| -> Option<usize> {
            let row = row?;
            if !seen.insert(row_key(&row)) {
                return None;
            }
            rel.rows.push(row);
            Some(rel.rows.len() - 1)
        };

        push(&mut rel, finish_row(vec![(0, 0, 0, 1.0)], 1.0));
        for (i, j, rep) in pending {
            let mut e = vec![(0, i, j, 1.0)];
            if let Some(id) = rep {
                let (ri, rj) = rel.reps[id];
                e.push((0, ri, rj, -1.0));
            }
            push(&mut rel, finish_row(e, 0.0));
        }

        let two_d = 2 * half;
        let mut slack_rows: Vec<(usize, Poly)> = Vec::new();
        for (gi, g) in sys.inequalities.iter().enumerate() {
            let dg = g.degree();
            if dg > two_d {
                continue;
            }
            let scale = g.max_abs_coefficient();
            if scale == 0.0 {
                continue;
            }
            let gs = g.scale(1.0 / scale);
            let size_half = half - dg.div_ceil(2);
            if size_half == 0 {
                let slot = rel.n_slack;
                rel.n_slack += 1;
                rel.localizing.push(Localizing { inequality: gi, scale, kind: LocKind::Slack { slot } });
                slack_rows.push((slot, gs));
                continue;
            }
            let size = rel.basis.iter().take_while(|m| m.len() <= size_half).count();
            let block = rel.dense.len();
            rel.dense.push(BlockKind::Dense(size));
            rel.localizing.push(Localizing { inequality: gi, scale, kind: LocKind::Dense { block, size } });
            for i in 0..size {
                for j in i..size {
                    let s = mono_mul(&rel.basis[i], &rel.basis[j]);
                    let mut e = vec![(block, i, j, 1.0)];
                    rel.moment_entries(&gs.mul_monomial(&s), -1.0, &mut e);
                    push(&mut rel, finish_row(e, 0.0));
                }
            }
        }
        // Slack rows reference the scalar block, whose index is only fixed per phase;
        // `usize::MAX` is patched in `sdp`.
        for (slot, gs) in slack_rows {
            let mut e = vec![(usize::MAX, slot, slot, 1.0)];
            rel.moment_entries(&gs, -1.0, &mut e);
            push(&mut rel, finish_row(e, 0.0));
        }

        for (ei, h) in sys.equalities.iter().enumerate() {
            let dh = h.degree();
            if h.len() == 1 && dh > 0 || dh > two_d {
                continue;
            }
            let scale = h.max_abs_coefficient();
            let hs = h.scale(1.0 / scale);
            let ms: Vec<Monomial> = rel.moments.iter().filter(|m| m.len() + dh <= two_d).cloned().collect();
            for m in ms {
                let mut e = Vec::new();
                rel.moment_entries(&hs.mul_monomial(&m), 1.0, &mut e);
                if let Some(r) = push(&mut rel, finish_row(e, 0.0)) {
                    rel.eq_rows.push(EqRow { row: r, equality: ei, monomial: m, scale });
                }
            }
        }
        if rel.rows.len() > opts.max_rows {
            return Err(Error::SizeBudget(format!(
                "moment relaxation needs {} rows, budget {}",
                rel.rows.len(),
                opts.max_rows
            )));
        }
        Ok(rel)
    }

    fn moment_entries(&self, p: &Poly, sign: f64, out: &mut Vec<Entry>) {
        for (m, c) in p.terms() {
            if self.zero.is_zero(m) {
                continue;
            }
            let (i, j) = self.reps[self.ids[m]];
            out.push((0, i, j, sign * c));
        }
    }

    /// The program over the dense blocks plus a scalar block of `n_slack + extra` entries.
    fn sdp(&self, extra: usize) -> Sdp {
        let mut kinds = self.dense.clone();
        let scalar = kinds.len();
        if self.n_slack + extra > 0 {
            kinds.push(BlockKind::Diag(self.n_slack + extra));
        }
        let rows = self
            .rows
            .iter()
            .map(|r| {
                let mut r = r.clone();
                for t in r.terms.iter_mut() {
                    if t.block == usize::MAX {
                        t.block = scalar;
                    }
                }
                r
            })
            .collect();
        Sdp { cost: BlockMat::zeros(&kinds), kinds, rows }
    }

    fn violation(&self, p: &Sdp, x: &BlockMat) -> f64 {
        let ax = p.apply(x);
        p.rows.iter().zip(ax.iter()).map(|(r, v)| (v - r.rhs).abs()).fold(0.0, f64::max)
    }

    fn moment_values(&self, x: &BlockMat) -> Vec<f64> {
        let Block::Dense(m) = &x.blocks[0] else { unreachable!() };
        let norm = m[(0, 0)];
        self.reps.iter().map(|&(i, j)| m[(i, j)] / norm).collect()
    }
}

fn psd_projection(m: &DMatrix<f64>) -> DMatrix<f64> {
    let sym = (m + m.transpose()) * 0.5;
    let e = sym.symmetric_eigen();
    let clipped = e.eigenvalues.map(|v| v.max(0.0));
    &e.eigenvectors * DMatrix::from_diagonal(&clipped) * e.eigenvectors.transpose()
}

/// Decides the degree-`degree` relaxation of `system` with `pins` applied.
///
/// With an `objective`, a feasible relaxation is re-solved to maximise
/// `Ẽ[objective]`. Pseudo-distribution moments are stored over the original
/// variable indices.
pub fn solve(
    system: &AxiomSystem,
    degree: usize,
    objective: Option<&Poly>,
    pins: &[(u32, bool)],
    opts: &SolverOptions,
) -> Result<SolveOutcome> {
    if degree < 2 || degree % 2 == 1 {
        return Err(Error::Invalid(format!("relaxation degree must be even and at least 2, got {degree}")));
    }
    system.validate()?;
    let (sys, map) = system.pin(pins)?;
    let half = degree / 2;

    if let Some((ei, h)) = sys.equalities.iter().enumerate().find(|(_, h)| h.degree() == 0) {
        let c = h.coefficient(&[]);
        return Ok(SolveOutcome::Infeasible(DualCertificate {
            degree,
            pins: pins.to_vec(),
            sos: GramBlock { basis: vec![], gram: vec![] },
            localizers: vec![],
            equalities: vec![EqualityMultiplier { equality: ei, monomial: vec![], coef: -1.0 / c }],
            constant: -1.0,
        }));
    }

    let rel = Relaxation::build(&sys, half, opts)?;
    let ipm = IpmOptions { tol: opts.tol, max_iter: opts.max_iter };

    let base = rel.sdp(0);
    let inv: Vec<u32> = {
        let mut inv = vec![0u32; sys.num_vars()];
        for (orig, r) in map.iter().enumerate() {
            if let Some(r) = r {
                inv[*r as usize] = orig as u32;
            }
        }
        inv
    };
    let finish = |x: &BlockMat, eta: f64, status: SolverStatus| -> Result<SolveOutcome> {
        let values = rel.moment_values(x);
        let entries = rel.moments.iter().zip(values).map(|(m, v)| (m.iter().map(|&r| inv[r as usize]).collect(), v)).collect();
        let mut mu = PseudoDistribution::from_table(system.num_vars(), degree, entries);
        mu.fixed = pins.to_vec();
        mu.eta = eta;
        mu.status = status;
        if let Some(f) = objective {
            mu.objective_value = Some(super::pseudo::pseudo_expectation(&mu, f)?);
        }
        Ok(SolveOutcome::Feasible(mu))
    };

    let mut objective_failure = None;
    if let Some(f) = objective {
        let phase2 = objective_program(&rel, &base, f, pins, &map, degree)?;
        let res2 = solve_sdp(&phase2, ipm)?;
        let viol2 = rel.violation(&base, &res2.x);
        let rel_gap = res2.gap.abs() / (1.0 + res2.pobj.abs() + res2.dobj.abs());
        let converged = res2.status == IpmStatus::Converged || (res2.dinf <= 1e-6 && rel_gap <= 1e-6);
        if converged && viol2 <= opts.eta {
            return finish(&res2.x, viol2, SolverStatus::Optimal);
        }
        objective_failure = Some(format!(
            "objective phase stopped with status {:?} after {} iterations, violation {viol2:.3e}, gap {rel_gap:.3e}",
            res2.status, res2.iterations
        ));
    }

    let mut phase1 = rel.sdp(1);
    let scalar = phase1.kinds.len() - 1;
    let tau = rel.n_slack;
    let r = {
        let eye = BlockMat::scaled_identity(&base.kinds, 1.0);
        let ax = base.apply(&eye);
        base.rows.iter().zip(ax.iter()).map(|(row, v)| v - row.rhs).collect::<Vec<_>>()
    };
    for (row, ri) in phase1.rows.iter_mut().zip(&r) {
        if *ri != 0.0 {
            row.terms.push(Term { block: scalar, a: tau, c: vec![(tau, -ri)] });
        }
    }
    if let Block::Diag(d) = &mut phase1.cost.blocks[scalar] {
        d[tau] = 1.0;
    }
    let res1 = solve_sdp(&phase1, ipm)?;
    let x1 = BlockMat {
        blocks: res1
            .x
            .blocks
            .iter()
            .enumerate()
            .filter_map(|(k, b)| match b {
                Block::Diag(d) if k == scalar => (rel.n_slack > 0).then(|| Block::Diag(d.rows(0, rel.n_slack).into_owned())),
                other => Some(other.clone()),
            })
            .collect(),
    };
    let viol = rel.violation(&base, &x1);
    let Block::Diag(d) = &res1.x.blocks[scalar] else { unreachable!() };
    let tau_value = d[tau];

    if viol <= opts.eta {
        return match objective_failure {
            Some(msg) => Err(Error::NonConvergence(msg)),
            None => finish(&x1, viol, SolverStatus::Feasible),
        };
    }
    if tau_value >= opts.infeasibility_margin {
        let cert = certificate(&rel, &base, &sys, &res1.y, degree, pins)?;
        if verify_certificate(system, &cert, opts.certificate_tol)?.valid {
            return Ok(SolveOutcome::Infeasible(cert));
        }
    }
    Err(Error::NonConvergence(format!(
        "inconclusive relaxation: artificial variable {tau_value:.3e}, violation {viol:.3e}, status {:?} after {} iterations (residual {:.1e})",
        res1.status, res1.iterations, res1.pinf
    )))
}

/// The base program with cost `-f / ‖f‖∞` on representative moment positions.
fn objective_program(
    rel: &Relaxation,
    base: &Sdp,
    f: &Poly,
    pins: &[(u32, bool)],
    map: &[Option<u32>],
    degree: usize,
) -> Result<Sdp> {
    let pin_of = |v: u32| pins.iter().find(|p| p.0 == v).map(|p| p.1);
    let fr = f.substitute(|v| match pin_of(v) {
        Some(false) => None,
        Some(true) => Some(None),
        None => Some(map.get(v as usize).copied().flatten()),
    });
    let mut p = base.clone();
    let scale = fr.max_abs_coefficient().max(1e-300);
    let Block::Dense(c) = &mut p.cost.blocks[0] else { unreachable!() };
    for (m, coef) in fr.terms() {
        if m.len() > degree {
            return Err(Error::Invalid(format!("objective degree {} exceeds relaxation degree {degree}", m.len())));
        }
        if rel.zero.is_zero(m) {
            continue;
        }
        let (i, j) = rel.reps[rel.ids[m]];
        let w = -coef / scale;
        if i == j {
            c[(i, i)] += w;
        } else {
            c[(i, j)] += 0.5 * w;
            c[(j, i)] += 0.5 * w;
        }
    }
    Ok(p)
}

/// Turns phase-one dual multipliers into a refutation of the pinned system `sys`.
fn certificate(
    rel: &Relaxation,
    base: &Sdp,
    sys: &AxiomSystem,
    y: &DVector<f64>,
    degree: usize,
    pins: &[(u32, bool)],
) -> Result<DualCertificate> {
    let yp = -y;
    let constant = yp[0];
    if constant >= 0.0 {
        return Err(Error::NonConvergence("phase-one dual does not separate".into()));
    }
    let yp = yp * (-1.0 / constant);
    let z = base.adjoint(&yp);

    let Block::Dense(z0) = &z.blocks[0] else { unreachable!() };
    let sos = GramBlock::from_matrix(rel.basis.clone(), &psd_projection(z0));
    let mut localizers = Vec::new();
    for l in &rel.localizing {
        let block = match l.kind {
            LocKind::Dense { block, size } => {
                let Block::Dense(zb) = &z.blocks[block] else { unreachable!() };
                GramBlock::from_matrix(rel.basis[..size].to_vec(), &(psd_projection(zb) / l.scale))
            }
            LocKind::Slack { slot } => {
                let Block::Diag(d) = &z.blocks[rel.dense.len()] else { unreachable!() };
                GramBlock { basis: vec![vec![]], gram: vec![vec![d[slot].max(0.0) / l.scale]] }
            }
        };
        localizers.push(Localizer { inequality: l.inequality, block });
    }
    let mut equalities: Vec<EqualityMultiplier> = rel
        .eq_rows
        .iter()
        .filter(|e| yp[e.row] != 0.0)
        .map(|e| EqualityMultiplier { equality: e.equality, monomial: e.monomial.clone(), coef: -yp[e.row] / e.scale })
        .collect();

    let mut p = sos.poly();
    for l in &localizers {
        p = p.add(&l.block.poly().mul(&sys.inequalities[l.inequality]));
    }
    for e in &equalities {
        p = p.add(&sys.equalities[e.equality].mul_monomial(&e.monomial).scale(e.coef));
    }
    for (m, c) in p.terms() {
        if let Some(ei) = rel.zero.witness(m) {
            let a = sys.equalities[ei].terms().next().unwrap().1;
            equalities.push(EqualityMultiplier { equality: ei, monomial: m.clone(), coef: -c / a });
        }
    }
    Ok(DualCertificate { degree, pins: pins.to_vec(), sos, localizers, equalities, constant: -1.0 })
}

/// Basis length and row count of the relaxation, without solving.
pub fn relaxation_size(system: &AxiomSystem, degree: usize, pins: &[(u32, bool)], opts: &SolverOptions) -> Result<(usize, usize)> {
    if degree < 2 || degree % 2 == 1 {
        return Err(Error::Invalid(format!("relaxation degree must be even and at least 2, got {degree}")));
    }
    let (sys, _) = system.pin(pins)?;
    let rel = Relaxation::build(&sys, degree / 2, opts)?;
    Ok((rel.basis.len(), rel.rows.len()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;
    use crate::sos::axioms::build_clique_axioms;
    use crate::sos::pseudo::verify_pseudodistribution;

    #[test]
    fn path_has_no_three_clique() {
        let g = Graph::from_edges(3, &[(0, 1), (1, 2)]);
        let sys = build_clique_axioms(&g, 3.0);
        let out = solve(&sys, 2, None, &[], &SolverOptions::default()).unwrap();
        let cert = out.certificate().expect("infeasible");
        let check = verify_certificate(&sys, cert, 1e-6).unwrap();
        assert!(check.valid, "{check:?}");
    }

    #[test]
    fn triangle_is_a_three_clique() {
        let g = Graph::from_edges(3, &[(0, 1), (1, 2), (0, 2)]);
        let sys = build_clique_axioms(&g, 3.0);
        let out = solve(&sys, 2, None, &[], &SolverOptions::default()).unwrap();
        let mu = out.pseudo().expect("feasible");
        for v in 0..3 {
            assert!(mu.moment(&[v]).unwrap() >= 1.0 - 1e-4);
        }
        assert!(verify_pseudodistribution(mu, &sys, 1e-5).passed);
    }

    #[test]
    fn objective_is_maximised() {
        // Two-clique in a path: Ẽ[x_0] can reach one.
        let g = Graph::from_edges(3, &[(0, 1), (1, 2)]);
        let sys = build_clique_axioms(&g, 1.0);
        let out = solve(&sys, 2, Some(&Poly::var(0)), &[], &SolverOptions::default()).unwrap();
        let mu = out.pseudo().unwrap();
        assert!((mu.objective_value.unwrap() - 1.0).abs() < 1e-5, "{:?}", mu.objective_value);
    }

    #[test]
    fn pins_are_respected() {
        let g = Graph::from_edges(4, &[(0, 1), (1, 2), (0, 2), (2, 3)]);
        let sys = build_clique_axioms(&g, 1.0);
        let out = solve(&sys, 2, None, &[(3, true)], &SolverOptions::default()).unwrap();
        let mu = out.pseudo().unwrap();
        assert_eq!(mu.moment(&[3]).unwrap(), 1.0);
        assert!(mu.moment(&[0]).unwrap().abs() < 1e-5);
        let bad = solve(&sys, 2, None, &[(0, true), (3, true)], &SolverOptions::default()).unwrap();
        assert!(verify_certificate(&sys, bad.certificate().unwrap(), 1e-6).unwrap().valid);
    }

    #[test]
    fn tampered_certificate_fails() {
        let g = Graph::from_edges(3, &[(0, 1), (1, 2)]);
        let sys = build_clique_axioms(&g, 3.0);
        let out = solve(&sys, 2, None, &[], &SolverOptions::default()).unwrap();
        let mut cert = out.certificate().unwrap().clone();
        cert.sos.gram[0][0] += 0.1;
        assert!(!verify_certificate(&sys, &cert, 1e-6).unwrap().valid);
    }
}
