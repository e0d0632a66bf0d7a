//! Parameter sweeps.
//!
//! A sweep is a grid of cells, each run for a number of trials. Trial seeds are
//! a function of the base seed and the `(cell, trial)` indices only, so any
//! subset of the grid can be rerun in isolation.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{apply_bounded_adversary, apply_monotone_adversary, sample_rig, BoundedStrategy, MonotoneStrategy, RigInstance, RigParams};
use crate::recovery::{approx_recovery, exact_recovery, sparse_recovery_with, RecoveryParams, RecoveryReport, SparseOptions, TupleVerdict};

/// Environment variable capping the number of sweep workers.
pub const THREADS_ENV: &str = "RIG_LAB_THREADS";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    Exact,
    Approx,
    Sparse,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Exact => "exact",
            Algorithm::Approx => "approx",
            Algorithm::Sparse => "sparse",
        }
    }
}

/// Corruption applied to each sampled instance: monotone deletions first, then
/// random flips at the `eps_deg` budget and `rewrites` rewritten vertices.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AdversarySpec {
    pub monotone_fraction: f64,
    pub random_flips: bool,
    pub eps_deg: f64,
    pub eps_node: f64,
    pub rewrites: usize,
}

impl AdversarySpec {
    pub fn label(&self) -> String {
        if *self == AdversarySpec::default() {
            return "none".into();
        }
        format!(
            "monotone={}/flips={}/eps_deg={}/eps_node={}/rewrites={}",
            self.monotone_fraction, self.random_flips, self.eps_deg, self.eps_node, self.rewrites
        )
    }

    pub fn apply(&self, inst: &RigInstance, seed: u64) -> Result<RigInstance> {
        let mut cur = inst.clone();
        if self.monotone_fraction > 0.0 {
            cur = apply_monotone_adversary(&cur, &MonotoneStrategy::Fraction { f: self.monotone_fraction }, seed)?.0;
        }
        let mut strategies = vec![];
        if self.random_flips {
            strategies.push(BoundedStrategy::RandomFlips { per_vertex: None });
        }
        if self.rewrites > 0 {
            strategies.push(BoundedStrategy::Rewrite { count: self.rewrites });
        }
        if !strategies.is_empty() {
            cur = apply_bounded_adversary(&cur, self.eps_deg, self.eps_node, &strategies, seed)?.0;
        }
        Ok(cur)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Grid {
    pub n: Vec<usize>,
    pub d: Vec<usize>,
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    pub adversary: Vec<AdversarySpec>,
    pub algorithm: Vec<Algorithm>,
}

impl Default for Grid {
    fn default() -> Self {
        Grid { n: vec![], d: vec![], p: vec![], q: vec![], adversary: vec![AdversarySpec::default()], algorithm: vec![Algorithm::Sparse] }
    }
}

/// A full sweep description. `recovery.k == 0` means `k = k_factor · δn` per cell;
/// `recovery.p`, `recovery.d` and `recovery.seed` are overwritten per trial.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentSpec {
    pub grid: Grid,
    pub trials: usize,
    pub base_seed: u64,
    pub recovery: RecoveryParams,
    pub k_factor: f64,
    /// Tuple length for the sparse algorithm.
    pub sparse_t: usize,
    pub sparse: SparseOptions,
    /// Radius used when scoring approximate recovery.
    pub rho_score: f64,
    /// Record wall-clock runtimes (breaks byte-identical reruns).
    pub timings: bool,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        ExperimentSpec {
            grid: Grid::default(),
            trials: 1,
            base_seed: 0,
            recovery: RecoveryParams::default(),
            k_factor: 1.0,
            sparse_t: 3,
            sparse: SparseOptions::default(),
            rho_score: 0.0,
            timings: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub index: usize,
    pub n: usize,
    pub d: usize,
    pub p: f64,
    pub q: f64,
    pub adversary: AdversarySpec,
    pub algorithm: Algorithm,
}

impl ExperimentSpec {
    /// Cells in row-major order over `n, d, p, q, adversary, algorithm`.
    pub fn cells(&self) -> Vec<Cell> {
        let g = &self.grid;
        let mut out = vec![];
        for &n in &g.n {
            for &d in &g.d {
                for &p in &g.p {
                    for &q in &g.q {
                        for adv in &g.adversary {
                            for &algorithm in &g.algorithm {
                                out.push(Cell { index: out.len(), n, d, p, q, adversary: adv.clone(), algorithm });
                            }
                        }
                    }
                }
            }
        }
        out
    }

    pub fn trial_seed(&self, cell: usize, trial: usize) -> u64 {
        self.base_seed.wrapping_add((cell as u64).wrapping_mul(1_000_003)).wrapping_add(trial as u64)
    }
}

/// One `(cell, trial)` outcome. Floats are rounded to 9 significant digits.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub cell: usize,
    pub trial: usize,
    pub seed: u64,
    pub n: usize,
    pub d: usize,
    pub p: f64,
    pub q: f64,
    pub adversary: String,
    pub algorithm: String,
    pub k: f64,
    pub status: String,
    pub exact: bool,
    pub rho_approx: bool,
    pub output_size: usize,
    pub false_positives: usize,
    pub matching_cost: usize,
    pub max_best_distance: usize,
    pub accepted: usize,
    pub discarded: usize,
    pub infeasible: usize,
    pub skipped: usize,
    pub runtime_s: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub cell: usize,
    pub n: usize,
    pub d: usize,
    pub p: f64,
    pub q: f64,
    pub adversary: String,
    pub algorithm: String,
    pub trials: usize,
    pub errors: usize,
    pub exact_rate: f64,
    pub rho_approx_rate: f64,
}

/// Round to 9 significant digits.
pub fn sig9(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.8e}").parse().unwrap_or(x)
}

/// Worker count from `RIG_LAB_THREADS`, defaulting to the available parallelism.
pub fn worker_count() -> usize {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
        .filter(|&t| t > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

fn run_trial(spec: &ExperimentSpec, cell: &Cell, trial: usize) -> SweepRow {
    let seed = spec.trial_seed(cell.index, trial);
    let start = Instant::now();
    let mut row = SweepRow {
        cell: cell.index,
        trial,
        seed,
        n: cell.n,
        d: cell.d,
        p: sig9(cell.p),
        q: sig9(cell.q),
        adversary: cell.adversary.label(),
        algorithm: cell.algorithm.name().into(),
        k: 0.0,
        status: "ok".into(),
        exact: false,
        rho_approx: false,
        output_size: 0,
        false_positives: 0,
        matching_cost: 0,
        max_best_distance: 0,
        accepted: 0,
        discarded: 0,
        infeasible: 0,
        skipped: 0,
        runtime_s: None,
    };
    match trial_report(spec, cell, seed) {
        Ok((k, report)) => {
            row.k = sig9(k);
            let s = report.score.as_ref().expect("scored");
            row.exact = s.exact_recovery;
            row.rho_approx = s.rho_approx;
            row.output_size = s.output_size;
            row.false_positives = s.false_positives;
            row.matching_cost = s.matching_cost;
            row.max_best_distance = s.best_distance.iter().copied().max().unwrap_or(0);
            row.accepted = report.count(TupleVerdict::Accepted);
            row.discarded = report.count(TupleVerdict::Discarded);
            row.infeasible = report.count(TupleVerdict::Infeasible);
            row.skipped = report.count(TupleVerdict::Skipped);
        }
        Err(e) => row.status = format!("error: {e}"),
    }
    if spec.timings {
        row.runtime_s = Some(sig9(start.elapsed().as_secs_f64()));
    }
    row
}

fn trial_report(spec: &ExperimentSpec, cell: &Cell, seed: u64) -> Result<(f64, RecoveryReport)> {
    let base = sample_rig(RigParams::new(cell.n, cell.d, cell.p, cell.q, seed))?;
    let inst = cell.adversary.apply(&base, seed)?;
    let k = if spec.recovery.k > 0.0 { spec.recovery.k } else { spec.k_factor * inst.k() };
    let params = RecoveryParams { k, p: cell.p, d: cell.d, seed, ..spec.recovery.clone() };
    let mut report = match cell.algorithm {
        Algorithm::Exact => exact_recovery(&inst.graph, &params)?,
        Algorithm::Approx => approx_recovery(&inst.graph, &params)?,
        Algorithm::Sparse => sparse_recovery_with(&inst.graph, k, spec.sparse_t, &SparseOptions { seed, ..spec.sparse })?,
    };
    report.score_against(&inst.cliques(), spec.rho_score);
    Ok((k, report))
}

/// Run every `(cell, trial)` on a bounded pool of `workers` threads. Rows come
/// back in `(cell, trial)` order regardless of scheduling.
pub fn run_sweep(spec: &ExperimentSpec, workers: usize) -> Result<Vec<SweepRow>> {
    if workers == 0 {
        return Err(Error::Invalid("worker count must be positive".into()));
    }
    let cells = spec.cells();
    let jobs: Vec<(usize, usize)> = (0..cells.len()).flat_map(|c| (0..spec.trials).map(move |t| (c, t))).collect();
    let results: Mutex<Vec<Option<SweepRow>>> = Mutex::new(vec![None; jobs.len()]);
    let next = AtomicUsize::new(0);
    std::thread::scope(|scope| {
        for _ in 0..workers.min(jobs.len().max(1)) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some(&(c, t)) = jobs.get(i) else { break };
                let row = run_trial(spec, &cells[c], t);
                results.lock().unwrap()[i] = Some(row);
            });
        }
    });
    Ok(results.into_inner().unwrap().into_iter().map(|r| r.expect("every job ran")).collect())
}

/// Success rates per cell, in cell order.
pub fn summarize(spec: &ExperimentSpec, rows: &[SweepRow]) -> Vec<CellSummary> {
    spec.cells()
        .iter()
        .map(|c| {
            let mine: Vec<&SweepRow> = rows.iter().filter(|r| r.cell == c.index).collect();
            let trials = mine.len();
            let rate = |f: &dyn Fn(&SweepRow) -> bool| {
                if trials == 0 {
                    0.0
                } else {
                    sig9(mine.iter().filter(|r| f(r)).count() as f64 / trials as f64)
                }
            };
            CellSummary {
                cell: c.index,
                n: c.n,
                d: c.d,
                p: sig9(c.p),
                q: sig9(c.q),
                adversary: c.adversary.label(),
                algorithm: c.algorithm.name().into(),
                trials,
                errors: mine.iter().filter(|r| r.status != "ok").count(),
                exact_rate: rate(&|r| r.exact),
                rho_approx_rate: rate(&|r| r.rho_approx),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_spec() -> ExperimentSpec {
        ExperimentSpec {
            grid: Grid { n: vec![80, 100], d: vec![1], p: vec![0.1, 0.2], q: vec![0.0], ..Default::default() },
            trials: 3,
            base_seed: 5,
            sparse_t: 2,
            sparse: SparseOptions { window: 0.4, ..Default::default() },
            ..Default::default()
        }
    }

    #[test]
    fn sweep_has_one_row_per_cell_trial() {
        let spec = small_spec();
        let rows = run_sweep(&spec, 2).unwrap();
        assert_eq!(rows.len(), 12);
        assert!(rows.windows(2).all(|w| (w[0].cell, w[0].trial) < (w[1].cell, w[1].trial)));
        assert!(rows.iter().all(|r| r.status == "ok" && r.runtime_s.is_none()));
        let summary = summarize(&spec, &rows);
        assert_eq!(summary.len(), 4);
        assert!(summary.iter().all(|s| s.trials == 3));
    }

    #[test]
    fn reruns_and_worker_counts_agree() {
        let spec = small_spec();
        assert_eq!(run_sweep(&spec, 1).unwrap(), run_sweep(&spec, 3).unwrap());
    }

    #[test]
    fn empty_grid_gives_no_rows() {
        let spec = ExperimentSpec::default();
        assert!(run_sweep(&spec, 2).unwrap().is_empty());
    }

    #[test]
    fn bad_cells_become_error_rows() {
        let mut spec = small_spec();
        spec.grid.q = vec![0.5];
        let rows = run_sweep(&spec, 1).unwrap();
        assert_eq!(rows.len(), 12);
        assert!(rows.iter().all(|r| r.status.starts_with("error")));
    }

    #[test]
    fn nine_significant_digits() {
        assert_eq!(sig9(1.0 / 3.0).to_string(), "0.333333333");
        assert_eq!(sig9(0.1 + 0.2).to_string(), "0.3");
        assert_eq!(sig9(123456789012.0).to_string(), "123456789000");
    }
}
