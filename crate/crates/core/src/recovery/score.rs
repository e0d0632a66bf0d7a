use pathfinding::kuhn_munkres::kuhn_munkres_min;
use pathfinding::matrix::Matrix;
use serde::{Deserialize, Serialize};

/// Scores of an output list against planted cliques.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecoveryScore {
    pub rho: f64,
    /// `|𝓛| = d` and every `S_ℓ` equals exactly one output set.
    pub exact_recovery: bool,
    /// `|𝓛| = d`, every `S_ℓ` is within `ρ` of exactly one output set, and the
    /// optimal one-to-one matching pairs every `S_ℓ` within `ρ`.
    pub rho_approx: bool,
    /// Per `S_ℓ`, the smallest symmetric difference to any output set
    /// (`|S_ℓ|` when the output is empty).
    pub best_distance: Vec<usize>,
    /// Per `S_ℓ`, the distance to its partner in a minimum-cost one-to-one matching.
    pub matched_distance: Vec<Option<usize>>,
    pub matching_cost: usize,
    /// Output sets equal to no `S_ℓ`.
    pub false_positives: usize,
    pub output_size: usize,
    pub truth_size: usize,
}

fn sym_diff(a: &[usize], b: &[usize]) -> usize {
    let (mut i, mut j, mut common) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                common += 1;
                i += 1;
                j += 1;
            }
        }
    }
    a.len() + b.len() - 2 * common
}

fn sorted(sets: &[Vec<usize>]) -> Vec<Vec<usize>> {
    sets.iter()
        .map(|s| {
            let mut s = s.clone();
            s.sort_unstable();
            s.dedup();
            s
        })
        .collect()
}

/// Score `output` against `truth` with approximation radius `rho`.
pub fn evaluate_recovery(output: &[Vec<usize>], truth: &[Vec<usize>], rho: f64) -> RecoveryScore {
    let out = sorted(output);
    let tr = sorted(truth);
    let dist: Vec<Vec<usize>> = tr.iter().map(|s| out.iter().map(|o| sym_diff(s, o)).collect()).collect();
    let best_distance = tr
        .iter()
        .zip(&dist)
        .map(|(s, row)| row.iter().copied().min().unwrap_or(s.len()))
        .collect();

    let mut matched_distance = vec![None; tr.len()];
    let mut matching_cost = 0;
    if !tr.is_empty() && !out.is_empty() {
        if tr.len() <= out.len() {
            let m = Matrix::from_rows(dist.iter().map(|r| r.iter().map(|&x| x as i64).collect::<Vec<_>>())).unwrap();
            let (cost, cols) = kuhn_munkres_min(&m);
            matching_cost = cost as usize;
            for (l, c) in cols.into_iter().enumerate() {
                matched_distance[l] = Some(dist[l][c]);
            }
        } else {
            let m = Matrix::from_rows((0..out.len()).map(|o| dist.iter().map(|r| r[o] as i64).collect::<Vec<_>>())).unwrap();
            let (cost, rows) = kuhn_munkres_min(&m);
            matching_cost = cost as usize;
            for (o, l) in rows.into_iter().enumerate() {
                matched_distance[l] = Some(dist[l][o]);
            }
        }
    }

    let right_size = out.len() == tr.len();
    let within = |r: f64| dist.iter().all(|row| row.iter().filter(|&&x| x as f64 <= r).count() == 1);
    let exact_recovery = right_size && within(0.0);
    let rho_approx = right_size && within(rho) && matched_distance.iter().all(|m| m.is_some_and(|x| x as f64 <= rho));
    let false_positives = (0..out.len()).filter(|&o| dist.iter().all(|row| row[o] != 0)).count();
    RecoveryScore {
        rho,
        exact_recovery,
        rho_approx,
        best_distance,
        matched_distance,
        matching_cost,
        false_positives,
        output_size: out.len(),
        truth_size: tr.len(),
    }
}
