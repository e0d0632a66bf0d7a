//! Flags shared by every subcommand, and their JSON config-file mirror.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::Deserialize;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

/// Every option. A config file holds the same keys in kebab-case; flags given on
/// the command line win.
#[derive(Args, Clone, Debug, Default, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields, default)]
pub struct Flags {
    /// JSON document with default values for any of these flags.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub config: Option<PathBuf>,

    #[arg(long, global = true)]
    pub n: Option<usize>,
    #[arg(long, global = true)]
    pub d: Option<usize>,
    #[arg(long, global = true)]
    pub p: Option<f64>,
    #[arg(long, global = true)]
    pub q: Option<f64>,
    /// Edge probability inside labels; switches `generate` to the two-sided model.
    #[arg(long, global = true)]
    pub q_up: Option<f64>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Target clique size (defaults to k-factor times δn of the instance).
    #[arg(long, global = true)]
    pub k: Option<f64>,
    #[arg(long, global = true)]
    pub k_factor: Option<f64>,
    #[arg(long, global = true)]
    pub epsilon: Option<f64>,
    #[arg(long, global = true)]
    pub t: Option<usize>,
    #[arg(long, global = true)]
    pub num_tuples: Option<usize>,
    #[arg(long, global = true)]
    pub sos_degree: Option<usize>,
    #[arg(long, global = true)]
    pub rho: Option<f64>,
    #[arg(long, global = true)]
    pub eps_deg: Option<f64>,
    #[arg(long, global = true)]
    pub eps_node: Option<f64>,
    /// Prune near-duplicates at 10·eps_deg/rho instead of (10·eps_node/rho)·k.
    #[arg(long, global = true)]
    pub literal_prune: bool,
    /// Solver tolerance.
    #[arg(long, global = true)]
    pub tol: Option<f64>,

    /// Relative size window of the sparse algorithm.
    #[arg(long, global = true)]
    pub window: Option<f64>,
    /// Symmetric-difference radius used when scoring.
    #[arg(long, global = true)]
    pub score_radius: Option<f64>,
    /// Refute with the ground-truth axioms.
    #[arg(long, global = true)]
    pub truth: bool,

    /// Balancedness order.
    #[arg(long, global = true)]
    pub r: Option<usize>,
    /// Left-side size for balancedness (taken from the coin-flip side U).
    #[arg(long, global = true)]
    pub a: Option<usize>,

    /// Fraction of noise edges deleted by the monotone adversary.
    #[arg(long, global = true)]
    pub monotone_fraction: Option<f64>,
    /// Random flips at the eps-deg budget.
    #[arg(long, global = true)]
    pub flips: bool,
    /// Number of vertices whose neighbourhoods are rewritten.
    #[arg(long, global = true)]
    pub rewrites: Option<usize>,

    /// Instance file.
    #[arg(short, long, global = true)]
    pub input: Option<PathBuf>,
    #[arg(short, long, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Exit with status 1 when the computed verdict is a failure.
    #[arg(long, global = true)]
    pub strict: bool,
    /// Sweep description.
    #[arg(long, global = true)]
    pub spec: Option<PathBuf>,
    /// Where `sweep` writes its per-cell summary.
    #[arg(long, global = true)]
    pub summary: Option<PathBuf>,
    /// Stream per-tuple traces as JSON lines to this file instead of embedding them.
    #[arg(long, global = true)]
    pub traces: Option<PathBuf>,
    /// Include wall-clock runtimes in outputs.
    #[arg(long, global = true)]
    pub timings: bool,
}

macro_rules! fill {
    ($dst:ident, $src:ident; $($opt:ident),* ; $($flag:ident),*) => {
        $( if $dst.$opt.is_none() { $dst.$opt = $src.$opt; } )*
        $( $dst.$flag |= $src.$flag; )*
    };
}

impl Flags {
    /// Fill every option not given on the command line from `file`.
    pub fn merge(mut self, file: Flags) -> Flags {
        let f = file;
        fill!(self, f;
            n, d, p, q, q_up, seed, k, k_factor, epsilon, t, num_tuples, sos_degree, rho, eps_deg, eps_node, tol,
            window, score_radius, r, a, monotone_fraction, rewrites, input, output, format, spec, summary, traces;
            literal_prune, truth, flips, strict, timings);
        self
    }

    pub fn load_config(path: &Path) -> Result<Flags, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        serde_json::from_str(&text)
            .map_err(|e| format!("{}: line {} column {}: {e}", path.display(), e.line(), e.column()))
    }
}
