//! Infeasible primal-dual interior-point method for block-diagonal SDPs.
//!
//! Primal: minimise `⟨C, X⟩` subject to `⟨A_i, X⟩ = b_i`, `X ⪰ 0`.
//! Dual: maximise `bᵀy` subject to `Σ y_i A_i + S = C`, `S ⪰ 0`.
//!
//! Every `A_i` is a sum of terms `sym(e_a cᵀ)` inside one block, with `c`
//! sparse, so Schur complement entries reduce to a handful of scalar
//! products against precomputed `X c` and `S⁻¹ c`. Search directions are
//! HKM with a Mehrotra predictor-corrector.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum BlockKind {
    Dense(usize),
    Diag(usize),
}

impl BlockKind {
    pub(crate) fn dim(self) -> usize {
        match self {
            BlockKind::Dense(n) | BlockKind::Diag(n) => n,
        }
    }
}

#[derive(Clone, Debug)]
pub(crate) enum Block {
    Dense(DMatrix<f64>),
    Diag(DVector<f64>),
}

#[derive(Clone, Debug)]
pub(crate) struct BlockMat {
    pub blocks: Vec<Block>,
}

impl BlockMat {
    pub(crate) fn scaled_identity(kinds: &[BlockKind], s: f64) -> Self {
        let blocks = kinds
            .iter()
            .map(|k| match *k {
                BlockKind::Dense(n) => Block::Dense(DMatrix::identity(n, n) * s),
                BlockKind::Diag(n) => Block::Diag(DVector::from_element(n, s)),
            })
            .collect();
        BlockMat { blocks }
    }

    pub(crate) fn zeros(kinds: &[BlockKind]) -> Self {
        Self::scaled_identity(kinds, 0.0)
    }

    pub(crate) fn dot(&self, other: &BlockMat) -> f64 {
        self.blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| match (a, b) {
                (Block::Dense(a), Block::Dense(b)) => a.dot(b),
                (Block::Diag(a), Block::Diag(b)) => a.dot(b),
                _ => unreachable!("block kinds differ"),
            })
            .sum()
    }

    pub(crate) fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    /// `self += alpha * other`.
    pub(crate) fn axpy(&mut self, alpha: f64, other: &BlockMat) {
        for (a, b) in self.blocks.iter_mut().zip(&other.blocks) {
            match (a, b) {
                (Block::Dense(a), Block::Dense(b)) => *a += b * alpha,
                (Block::Diag(a), Block::Diag(b)) => *a += b * alpha,
                _ => unreachable!("block kinds differ"),
            }
        }
    }

    fn symmetrize(&mut self) {
        for b in &mut self.blocks {
            if let Block::Dense(m) = b {
                let t = m.transpose();
                *m += t;
                *m *= 0.5;
            }
        }
    }
}

/// Contributes `coef · sym(e_a cᵀ)` summed over `c = Σ_(j, v) v e_j` to one block.
/// On diagonal blocks only `c = v e_a` is allowed.
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct Term {
    pub block: usize,
    pub a: usize,
    pub c: Vec<(usize, f64)>,
}

#[derive(Clone, Debug, PartialEq)]
pub(crate) struct Row {
    pub terms: Vec<Term>,
    pub rhs: f64,
}

#[derive(Clone, Debug)]
pub(crate) struct Sdp {
    pub kinds: Vec<BlockKind>,
    pub rows: Vec<Row>,
    pub cost: BlockMat,
}

impl Sdp {
    pub(crate) fn num_rows(&self) -> usize {
        self.rows.len()
    }

    /// `⟨A_i, P⟩` for every row; `P` need not be symmetric.
    pub(crate) fn apply(&self, p: &BlockMat) -> DVector<f64> {
        DVector::from_iterator(
            self.rows.len(),
            self.rows.iter().map(|row| {
                row.terms
                    .iter()
                    .map(|t| match &p.blocks[t.block] {
                        Block::Dense(m) => t.c.iter().map(|&(j, v)| 0.5 * v * (m[(t.a, j)] + m[(j, t.a)])).sum::<f64>(),
                        Block::Diag(d) => t.c.iter().map(|&(_, v)| v * d[t.a]).sum::<f64>(),
                    })
                    .sum::<f64>()
            }),
        )
    }

    /// `Σ y_i A_i`.
    pub(crate) fn adjoint(&self, y: &DVector<f64>) -> BlockMat {
        let mut out = BlockMat::zeros(&self.kinds);
        for (row, &yi) in self.rows.iter().zip(y.iter()) {
            if yi == 0.0 {
                continue;
            }
            for t in &row.terms {
                match &mut out.blocks[t.block] {
                    Block::Dense(m) => {
                        for &(j, v) in &t.c {
                            m[(t.a, j)] += 0.5 * yi * v;
                            m[(j, t.a)] += 0.5 * yi * v;
                        }
                    }
                    Block::Diag(d) => {
                        for &(_, v) in &t.c {
                            d[t.a] += yi * v;
                        }
                    }
                }
            }
        }
        out
    }

    fn rhs(&self) -> DVector<f64> {
        DVector::from_iterator(self.rows.len(), self.rows.iter().map(|r| r.rhs))
    }

    fn row_norms(&self) -> Vec<f64> {
        self.rows
            .iter()
            .map(|r| {
                r.terms
                    .iter()
                    .flat_map(|t| t.c.iter().map(move |&(j, v)| if j == t.a { v * v } else { 0.5 * v * v }))
                    .sum::<f64>()
                    .sqrt()
            })
            .collect()
    }
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct IpmOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for IpmOptions {
    fn default() -> Self {
        IpmOptions { tol: 1e-9, max_iter: 120 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum IpmStatus {
    Converged,
    MaxIter,
    /// A factorisation failed or the iterates stopped improving.
    Stalled,
}

#[derive(Clone, Debug)]
pub(crate) struct IpmResult {
    pub x: BlockMat,
    pub y: DVector<f64>,
    pub pobj: f64,
    pub dobj: f64,
    pub pinf: f64,
    pub dinf: f64,
    pub gap: f64,
    pub iterations: usize,
    pub status: IpmStatus,
}

/// Per-block factor data for one iterate.
enum Factor {
    Dense { w: DMatrix<f64>, lx_inv: DMatrix<f64>, ls_inv: DMatrix<f64> },
    Diag { w: DVector<f64> },
}

fn lower_inverse(m: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let l = m.clone().cholesky()?.unpack();
    l.solve_lower_triangular(&DMatrix::identity(m.nrows(), m.nrows()))
}

fn factor(x: &BlockMat, s: &BlockMat) -> Option<Vec<Factor>> {
    x.blocks
        .iter()
        .zip(&s.blocks)
        .map(|(xb, sb)| match (xb, sb) {
            (Block::Dense(xm), Block::Dense(sm)) => {
                let lx_inv = lower_inverse(xm)?;
                let ls_inv = lower_inverse(sm)?;
                let w = ls_inv.transpose() * &ls_inv;
                Some(Factor::Dense { w, lx_inv, ls_inv })
            }
            (Block::Diag(xd), Block::Diag(sd)) => {
                if xd.iter().chain(sd.iter()).any(|&v| !(v > 0.0)) {
                    return None;
                }
                Some(Factor::Diag { w: sd.map(|v| 1.0 / v) })
            }
            _ => unreachable!("block kinds differ"),
        })
        .collect()
}

/// Largest `α` with `M + α D ⪰ 0`, given `L⁻¹` for `M = L Lᵀ`.
fn max_step_dense(l_inv: &DMatrix<f64>, d: &DMatrix<f64>) -> f64 {
    let z = l_inv * d * l_inv.transpose();
    let z = (&z + z.transpose()) * 0.5;
    let lmin = z.symmetric_eigenvalues().iter().fold(f64::INFINITY, |m, &v| m.min(v));
    if lmin < 0.0 {
        -1.0 / lmin
    } else {
        f64::INFINITY
    }
}

fn max_step_diag(m: &DVector<f64>, d: &DVector<f64>) -> f64 {
    m.iter().zip(d.iter()).filter(|(_, &dv)| dv < 0.0).map(|(&mv, &dv)| -mv / dv).fold(f64::INFINITY, f64::min)
}

/// `(X R W)` blockwise, where `R` is any block matrix.
fn x_r_w(x: &BlockMat, r: &BlockMat, f: &[Factor]) -> BlockMat {
    let blocks = x
        .blocks
        .iter()
        .zip(&r.blocks)
        .zip(f)
        .map(|((xb, rb), fb)| match (xb, rb, fb) {
            (Block::Dense(xm), Block::Dense(rm), Factor::Dense { w, .. }) => Block::Dense(xm * rm * w),
            (Block::Diag(xd), Block::Diag(rd), Factor::Diag { w }) => Block::Diag(xd.component_mul(rd).component_mul(w)),
            _ => unreachable!("block kinds differ"),
        })
        .collect();
    BlockMat { blocks }
}

fn w_mat(f: &[Factor]) -> BlockMat {
    BlockMat {
        blocks: f
            .iter()
            .map(|fb| match fb {
                Factor::Dense { w, .. } => Block::Dense(w.clone()),
                Factor::Diag { w } => Block::Diag(w.clone()),
            })
            .collect(),
    }
}

fn step_lengths(x: &BlockMat, dx: &BlockMat, s: &BlockMat, ds: &BlockMat, f: &[Factor]) -> (f64, f64) {
    let mut ap = f64::INFINITY;
    let mut ad = f64::INFINITY;
    for (i, fb) in f.iter().enumerate() {
        match (fb, &x.blocks[i], &dx.blocks[i], &s.blocks[i], &ds.blocks[i]) {
            (Factor::Dense { lx_inv, ls_inv, .. }, _, Block::Dense(dxm), _, Block::Dense(dsm)) => {
                ap = ap.min(max_step_dense(lx_inv, dxm));
                ad = ad.min(max_step_dense(ls_inv, dsm));
            }
            (Factor::Diag { .. }, Block::Diag(xd), Block::Diag(dxd), Block::Diag(sd), Block::Diag(dsd)) => {
                ap = ap.min(max_step_diag(xd, dxd));
                ad = ad.min(max_step_diag(sd, dsd));
            }
            _ => unreachable!("block kinds differ"),
        }
    }
    (ap, ad)
}

/// Schur complement `M_ij = ⟨A_i, X A_j S⁻¹⟩`.
fn schur(p: &Sdp, x: &BlockMat, f: &[Factor]) -> DMatrix<f64> {
    struct Pre<'a> {
        row: usize,
        term: &'a Term,
        xc: DVector<f64>,
        wc: DVector<f64>,
    }
    let mut dense: Vec<Vec<Pre>> = (0..p.kinds.len()).map(|_| Vec::new()).collect();
    // Diagonal-block contributions keyed by (block, index).
    let mut diag: Vec<Vec<Vec<(usize, f64)>>> =
        p.kinds.iter().map(|k| if let BlockKind::Diag(n) = k { vec![Vec::new(); *n] } else { Vec::new() }).collect();
    for (i, row) in p.rows.iter().enumerate() {
        for t in &row.terms {
            match (&x.blocks[t.block], &f[t.block]) {
                (Block::Dense(xm), Factor::Dense { w, .. }) => {
                    let n = xm.nrows();
                    let mut xc = DVector::zeros(n);
                    let mut wc = DVector::zeros(n);
                    for &(j, v) in &t.c {
                        xc.axpy(v, &xm.column(j), 1.0);
                        wc.axpy(v, &w.column(j), 1.0);
                    }
                    dense[t.block].push(Pre { row: i, term: t, xc, wc });
                }
                (Block::Diag(_), Factor::Diag { .. }) => {
                    let v: f64 = t.c.iter().map(|&(_, v)| v).sum();
                    diag[t.block][t.a].push((i, v));
                }
                _ => unreachable!("block kinds differ"),
            }
        }
    }
    let m = p.rows.len();
    let mut out = DMatrix::zeros(m, m);
    for (blk, pres) in dense.iter().enumerate() {
        if pres.is_empty() {
            continue;
        }
        let (xm, w) = match (&x.blocks[blk], &f[blk]) {
            (Block::Dense(xm), Factor::Dense { w, .. }) => (xm, w),
            _ => unreachable!(),
        };
        for (si, s) in pres.iter().enumerate() {
            let a = s.term.a;
            for t in &pres[..=si] {
                let c = t.term.a;
                let d = &t.term.c;
                let d_xs: f64 = d.iter().map(|&(j, v)| v * s.xc[j]).sum();
                let d_ws: f64 = d.iter().map(|&(j, v)| v * s.wc[j]).sum();
                let k = 0.25 * (s.xc[c] * t.wc[a] + d_xs * w[(c, a)] + xm[(a, c)] * d_ws + t.xc[a] * s.wc[c]);
                out[(s.row, t.row)] += k;
                if !std::ptr::eq(s, t) {
                    out[(t.row, s.row)] += k;
                }
            }
        }
    }
    for (blk, per_index) in diag.iter().enumerate() {
        if let (Block::Diag(xd), Factor::Diag { w }) = (&x.blocks[blk], &f[blk]) {
            for (a, list) in per_index.iter().enumerate() {
                let h = xd[a] * w[a];
                for &(i, vi) in list {
                    for &(j, vj) in list {
                        out[(i, j)] += vi * vj * h;
                    }
                }
            }
        }
    }
    out
}

fn solve_schur(m: &DMatrix<f64>, rhs: &DVector<f64>) -> Option<DVector<f64>> {
    let scale = m.diagonal().iter().fold(0.0f64, |a, &v| a.max(v.abs())).max(1e-300);
    let mut reg = 0.0;
    for _ in 0..12 {
        let mut mm = m.clone();
        if reg > 0.0 {
            for i in 0..mm.nrows() {
                mm[(i, i)] += reg * scale;
            }
        }
        if let Some(ch) = mm.cholesky() {
            return Some(ch.solve(rhs));
        }
        reg = if reg == 0.0 { 1e-14 } else { reg * 100.0 };
    }
    None
}

/// Solves the SDP from the infeasible start `X = ξI`, `S = ηI`, `y = 0`.
pub(crate) fn solve_sdp(p: &Sdp, opts: IpmOptions) -> Result<IpmResult> {
    let kinds = &p.kinds;
    let n_tot: usize = kinds.iter().map(|k| k.dim()).sum();
    if n_tot == 0 {
        return Err(Error::Invalid("semidefinite program has no blocks".into()));
    }
    let b = p.rhs();
    let norms = p.row_norms();
    let b_norm = b.norm();
    let c_norm = p.cost.norm();
    let root = (n_tot as f64).sqrt();
    let xi = b
        .iter()
        .zip(&norms)
        .map(|(bi, ni)| root * (1.0 + bi.abs()) / (1.0 + ni))
        .fold(10.0f64.max(root), f64::max);
    let eta = norms.iter().copied().fold(10.0f64.max(root).max(c_norm), f64::max);
    let mut x = BlockMat::scaled_identity(kinds, xi);
    let mut s = BlockMat::scaled_identity(kinds, eta);
    let mut y = DVector::zeros(p.num_rows());
    let mut status = IpmStatus::MaxIter;
    let mut iterations = 0;
    let mut best_merit = f64::INFINITY;
    let mut stall = 0;
    loop {
        let rp = &b - p.apply(&x);
        let mut rd = p.cost.clone();
        rd.axpy(-1.0, &s);
        rd.axpy(-1.0, &p.adjoint(&y));
        let pobj = p.cost.dot(&x);
        let dobj = b.dot(&y);
        let gap = x.dot(&s);
        let mu = gap / n_tot as f64;
        let pinf = rp.norm() / (1.0 + b_norm);
        let dinf = rd.norm() / (1.0 + c_norm);
        let rel_gap = gap.abs() / (1.0 + pobj.abs() + dobj.abs());
        if pinf <= opts.tol && dinf <= opts.tol && rel_gap <= opts.tol {
            status = IpmStatus::Converged;
            return Ok(IpmResult { x, y, pobj, dobj, pinf, dinf, gap, iterations, status });
        }
        let merit = pinf.max(dinf).max(rel_gap);
        if merit < 0.5 * best_merit {
            best_merit = merit;
            stall = 0;
        } else {
            stall += 1;
        }
        if iterations >= opts.max_iter || stall > 15 {
            if stall > 15 {
                status = IpmStatus::Stalled;
            }
            return Ok(IpmResult { x, y, pobj, dobj, pinf, dinf, gap, iterations, status });
        }
        iterations += 1;

        let f = match factor(&x, &s) {
            Some(f) => f,
            None => {
                status = IpmStatus::Stalled;
                return Ok(IpmResult { x, y, pobj, dobj, pinf, dinf, gap, iterations, status });
            }
        };
        let m = schur(p, &x, &f);
        let xrdw = x_r_w(&x, &rd, &f);
        let a_xrdw = p.apply(&xrdw);
        let w = w_mat(&f);

        let direction = |rcw: &BlockMat| -> Option<(DVector<f64>, BlockMat, BlockMat)> {
            let h = &rp - p.apply(rcw) + &a_xrdw;
            let dy = solve_schur(&m, &h)?;
            let mut ds = rd.clone();
            ds.axpy(-1.0, &p.adjoint(&dy));
            let mut dx = rcw.clone();
            dx.axpy(-1.0, &x_r_w(&x, &ds, &f));
            dx.symmetrize();
            Some((dy, dx, ds))
        };

        let mut rcw = BlockMat::zeros(kinds);
        rcw.axpy(-1.0, &x);
        let Some((_, dx_p, ds_p)) = direction(&rcw) else {
            status = IpmStatus::Stalled;
            return Ok(IpmResult { x, y, pobj, dobj, pinf, dinf, gap, iterations, status });
        };
        let (ap, ad) = step_lengths(&x, &dx_p, &s, &ds_p, &f);
        let (ap, ad) = (ap.min(1.0), ad.min(1.0));
        let mut xa = x.clone();
        xa.axpy(ap, &dx_p);
        let mut sa = s.clone();
        sa.axpy(ad, &ds_p);
        let mu_aff = xa.dot(&sa) / n_tot as f64;
        let sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3);

        // R_c S⁻¹ = σμ S⁻¹ - X - ΔX_p ΔS_p S⁻¹
        let mut rcw = BlockMat::zeros(kinds);
        rcw.axpy(sigma * mu, &w);
        rcw.axpy(-1.0, &x);
        rcw.axpy(-1.0, &x_r_w(&dx_p, &ds_p, &f));
        let Some((dy, dx, ds)) = direction(&rcw) else {
            status = IpmStatus::Stalled;
            return Ok(IpmResult { x, y, pobj, dobj, pinf, dinf, gap, iterations, status });
        };
        let (ap_max, ad_max) = step_lengths(&x, &dx, &s, &ds, &f);
        let gamma = 0.9 + 0.09 * ap.min(ad);
        let ap = (gamma * ap_max).min(1.0);
        let ad = (gamma * ad_max).min(1.0);
        x.axpy(ap, &dx);
        y.axpy(ad, &dy, 1.0);
        s.axpy(ad, &ds);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    /// min x1 + x2 s.t. x1 + 2 x2 = 2, x ≥ 0  →  x = (0, 1), value 1.
    #[test]
    fn tiny_lp() {
        let kinds = vec![BlockKind::Diag(2)];
        let rows = vec![Row {
            terms: vec![Term { block: 0, a: 0, c: vec![(0, 1.0)] }, Term { block: 0, a: 1, c: vec![(1, 2.0)] }],
            rhs: 2.0,
        }];
        let cost = BlockMat { blocks: vec![Block::Diag(DVector::from_vec(vec![1.0, 1.0]))] };
        let r = solve_sdp(&Sdp { kinds, rows, cost }, IpmOptions::default()).unwrap();
        assert_eq!(r.status, IpmStatus::Converged);
        assert_relative_eq!(r.pobj, 1.0, epsilon = 1e-7);
    }

    /// min ⟨C, X⟩ with trace(X) = 1 gives the least eigenvalue of C.
    #[test]
    fn min_eigenvalue_sdp() {
        let c = DMatrix::from_row_slice(3, 3, &[2.0, 1.0, 0.0, 1.0, 2.0, 0.5, 0.0, 0.5, 3.0]);
        let lmin = c.clone().symmetric_eigenvalues().iter().fold(f64::INFINITY, |m, &v| m.min(v));
        let kinds = vec![BlockKind::Dense(3)];
        let rows = vec![Row { terms: (0..3).map(|i| Term { block: 0, a: i, c: vec![(i, 1.0)] }).collect(), rhs: 1.0 }];
        let cost = BlockMat { blocks: vec![Block::Dense(c)] };
        let r = solve_sdp(&Sdp { kinds, rows, cost }, IpmOptions::default()).unwrap();
        assert_eq!(r.status, IpmStatus::Converged);
        assert_relative_eq!(r.pobj, lmin, epsilon = 1e-7);
        assert_relative_eq!(r.dobj, lmin, epsilon = 1e-7);
    }

    #[test]
    fn schur_matches_dense_definition() {
        let kinds = vec![BlockKind::Dense(3)];
        let rows = vec![
            Row { terms: vec![Term { block: 0, a: 0, c: vec![(1, 1.0), (2, -0.5)] }], rhs: 0.0 },
            Row { terms: vec![Term { block: 0, a: 2, c: vec![(2, 1.0)] }, Term { block: 0, a: 1, c: vec![(0, 2.0)] }], rhs: 0.0 },
        ];
        let p = Sdp { cost: BlockMat::zeros(&kinds), kinds: kinds.clone(), rows };
        let xm = DMatrix::from_row_slice(3, 3, &[3.0, 0.5, 0.2, 0.5, 2.0, 0.1, 0.2, 0.1, 1.5]);
        let sm = DMatrix::from_row_slice(3, 3, &[2.0, -0.3, 0.0, -0.3, 1.0, 0.2, 0.0, 0.2, 2.5]);
        let x = BlockMat { blocks: vec![Block::Dense(xm.clone())] };
        let s = BlockMat { blocks: vec![Block::Dense(sm.clone())] };
        let f = factor(&x, &s).unwrap();
        let m = schur(&p, &x, &f);
        let w = sm.try_inverse().unwrap();
        let dense = |i: usize| {
            let mut e = DVector::zeros(2);
            e[i] = 1.0;
            match &p.adjoint(&e).blocks[0] {
                Block::Dense(a) => a.clone(),
                _ => unreachable!(),
            }
        };
        for i in 0..2 {
            for j in 0..2 {
                let want = (dense(i) * &xm * dense(j) * &w).trace();
                assert_relative_eq!(m[(i, j)], want, epsilon = 1e-12);
            }
        }
    }
}
