mod config;

use std::io::Write;
use std::path::Path;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use config::{Flags, Format};
use rig_lab::combinatorics::{balancedness, single_label_check, BipartiteView, CLIQUE_CAP, PAIR_BUDGET};
use rig_lab::harness::{run_sweep, summarize, worker_count, ExperimentSpec};
use rig_lab::model::{sample_rig, sample_two_sided, RigInstance, RigParams, TwoSidedParams};
use rig_lab::recovery::{
    approx_recovery, exact_recovery, refute, sparse_recovery_with, sparse_t_default, split_vertices, RecoveryParams,
    RecoveryReport, RefutationVerdict, SparseOptions,
};
use rig_lab::sos::SolverOptions;
use rig_lab::spectral::spectral_gap_check;
use rig_lab::Error;

#[derive(Parser, Debug)]
#[command(name = "rig-lab", version, about = "Overlapping clique recovery in random intersection graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Sample an instance (--n --d --p --q --seed [--q-up]).
    Generate,
    /// Corrupt an instance (--monotone-fraction, --flips with --eps-deg, --rewrites with --eps-node).
    Adversary,
    /// Exact recovery: sum-of-squares rounding and clean-up per sampled tuple.
    RecoverExact,
    /// Robust approximate recovery against a bounded adversary.
    RecoverApprox,
    /// Common-neighbourhood recovery for sparse instances.
    RecoverSparse,
    /// Try to certify that no clique of the target size exists.
    Refute,
    /// Balancedness of a coin-flip bipartition of an instance.
    Balancedness,
    /// Spectral norm of the centred adjacency matrix.
    Spectral,
    /// Enumerate large maximal cliques and flag any outside every planted clique.
    VerifyIdentifiability,
    /// Run a parameter sweep described by --spec.
    Sweep,
}

enum Failure {
    /// Bad flags, files or parameters: exit 2.
    Usage(String),
    /// A verdict or computation that failed: exit 1.
    Verdict(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Io(_) | Error::Format(_) | Error::Invalid(_) | Error::Model(_) => Failure::Usage(e.to_string()),
            _ => Failure::Verdict(e.to_string()),
        }
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let flags = match &cli.flags.config {
        Some(path) => match Flags::load_config(path) {
            Ok(file) => cli.flags.clone().merge(file),
            Err(e) => {
                eprintln!("error: config {e}");
                return ExitCode::from(2);
            }
        },
        None => cli.flags.clone(),
    };
    match dispatch(cli.command, &flags) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Verdict(m)) => {
            eprintln!("failure: {m}");
            ExitCode::from(1)
        }
    }
}

fn dispatch(command: Command, f: &Flags) -> Outcome {
    match command {
        Command::Generate => generate(f),
        Command::Adversary => adversary(f),
        Command::RecoverExact | Command::RecoverApprox | Command::RecoverSparse => recover(command, f),
        Command::Refute => refute_cmd(f),
        Command::Balancedness => balancedness_cmd(f),
        Command::Spectral => spectral_cmd(f),
        Command::VerifyIdentifiability => identifiability(f),
        Command::Sweep => sweep(f),
    }
}

fn need<T: Copy>(v: Option<T>, name: &str) -> Result<T, Failure> {
    v.ok_or_else(|| Failure::Usage(format!("missing --{name}")))
}

fn write_out(f: &Flags, text: &str) -> Outcome {
    match &f.output {
        Some(path) => std::fs::write(path, text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display()))),
        None => std::io::stdout().write_all(text.as_bytes()).map_err(|e| Failure::Usage(e.to_string())),
    }
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

fn json_only(f: &Flags) -> Outcome {
    if f.format == Some(Format::Csv) {
        return Err(Failure::Usage("this subcommand only writes JSON".into()));
    }
    Ok(())
}

fn load_instance(f: &Flags) -> Result<RigInstance, Failure> {
    let path = f.input.as_deref().ok_or_else(|| Failure::Usage("missing --input".into()))?;
    RigInstance::load(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn generate(f: &Flags) -> Outcome {
    json_only(f)?;
    let (n, d, p, q) = (need(f.n, "n")?, need(f.d, "d")?, need(f.p, "p")?, need(f.q, "q")?);
    let seed = f.seed.unwrap_or(0);
    let inst = match f.q_up {
        Some(q_up) => sample_two_sided(TwoSidedParams { n, d, p, q_up, q_down: q, seed })?,
        None => sample_rig(RigParams::new(n, d, p, q, seed))?,
    };
    write_out(f, &inst.to_json())
}

fn adversary(f: &Flags) -> Outcome {
    json_only(f)?;
    let inst = load_instance(f)?;
    let spec = rig_lab::harness::AdversarySpec {
        monotone_fraction: f.monotone_fraction.unwrap_or(0.0),
        random_flips: f.flips,
        eps_deg: f.eps_deg.unwrap_or(0.0),
        eps_node: f.eps_node.unwrap_or(0.0),
        rewrites: f.rewrites.unwrap_or(0),
    };
    let out = spec.apply(&inst, f.seed.unwrap_or(inst.params.seed))?;
    write_out(f, &out.to_json())
}

fn solver_options(f: &Flags) -> SolverOptions {
    let mut o = SolverOptions::default();
    if let Some(tol) = f.tol {
        o.tol = tol;
    }
    o
}

fn recovery_params(f: &Flags, inst: &RigInstance) -> RecoveryParams {
    let d = RecoveryParams::default();
    RecoveryParams {
        k: f.k.unwrap_or(f.k_factor.unwrap_or(1.0) * inst.k()),
        epsilon: f.epsilon.unwrap_or(d.epsilon),
        p: f.p.unwrap_or(inst.params.p),
        d: f.d.unwrap_or(inst.d()),
        t: f.t,
        num_tuples: f.num_tuples,
        sos_degree: f.sos_degree.unwrap_or(d.sos_degree),
        rho: f.rho,
        eps_deg: f.eps_deg.unwrap_or(0.0),
        eps_node: f.eps_node.unwrap_or(0.0),
        seed: f.seed.unwrap_or(inst.params.seed),
        literal_prune: f.literal_prune,
        solver: solver_options(f),
        ..d
    }
}

fn write_traces(path: &Path, report: &RecoveryReport) -> Outcome {
    let mut text = String::new();
    for t in &report.traces {
        text.push_str(&serde_json::to_string(t).expect("serializable"));
        text.push('\n');
    }
    std::fs::write(path, text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

#[derive(Serialize)]
struct ReportRow {
    algorithm: String,
    sets: usize,
    exact: bool,
    rho_approx: bool,
    false_positives: usize,
    matching_cost: usize,
    runtime_s: Option<f64>,
}

fn recover(command: Command, f: &Flags) -> Outcome {
    let inst = load_instance(f)?;
    let mut report = match command {
        Command::RecoverExact => exact_recovery(&inst.graph, &recovery_params(f, &inst))?,
        Command::RecoverApprox => approx_recovery(&inst.graph, &recovery_params(f, &inst))?,
        _ => {
            let k = f.k.unwrap_or(f.k_factor.unwrap_or(1.0) * inst.k());
            let t = match f.t {
                Some(t) => t,
                None => sparse_t_default(inst.n(), inst.d(), inst.params.p)?,
            };
            let defaults = SparseOptions::default();
            let opts = SparseOptions { window: f.window.unwrap_or(defaults.window), seed: f.seed.unwrap_or(inst.params.seed), ..defaults };
            sparse_recovery_with(&inst.graph, k, t, &opts)?
        }
    };
    let score = report.score_against(&inst.cliques(), f.score_radius.unwrap_or(0.0)).clone();
    if let Some(path) = &f.traces {
        write_traces(path, &report)?;
        report.traces.clear();
    }
    let runtime = f.timings.then(|| report.wall_time.as_secs_f64());
    match f.format.unwrap_or_default() {
        Format::Json => {
            let mut value = serde_json::to_value(&report).expect("serializable");
            if let Some(rt) = runtime {
                value["wall_time_s"] = rt.into();
            }
            write_out(f, &json(&value))?;
        }
        Format::Csv => {
            let row = ReportRow {
                algorithm: report.algorithm.clone(),
                sets: report.sets.len(),
                exact: score.exact_recovery,
                rho_approx: score.rho_approx,
                false_positives: score.false_positives,
                matching_cost: score.matching_cost,
                runtime_s: runtime.map(rig_lab::harness::sig9),
            };
            write_out(f, &csv_text(&[row])?)?;
        }
    }
    let ok = if matches!(command, Command::RecoverApprox) { score.rho_approx } else { score.exact_recovery };
    if f.strict && !ok {
        return Err(Failure::Verdict(format!("{} recovery failed against the planted cliques", report.algorithm)));
    }
    Ok(())
}

fn refute_cmd(f: &Flags) -> Outcome {
    json_only(f)?;
    let inst = load_instance(f)?;
    let truth = inst.cliques();
    let k = f.k.unwrap_or(f.k_factor.unwrap_or(1.0) * inst.k());
    let degree = f.sos_degree.unwrap_or(2);
    let report = refute(&inst.graph, k, f.epsilon, f.truth.then_some(truth.as_slice()), degree, &solver_options(f))?;
    write_out(f, &json(&report))?;
    if f.strict && report.verdict == RefutationVerdict::NotRefuted {
        return Err(Failure::Verdict("not refuted at this degree".into()));
    }
    Ok(())
}

fn balancedness_cmd(f: &Flags) -> Outcome {
    json_only(f)?;
    let inst = load_instance(f)?;
    let (u, v) = split_vertices(inst.n(), f.seed.unwrap_or(inst.params.seed));
    let a = f.a.unwrap_or(u.len()).min(u.len());
    let h = BipartiteView::new(&inst.graph, u[..a].to_vec(), v)?;
    let report = balancedness(&h, f.p.unwrap_or(inst.params.p), f.r.unwrap_or(2), PAIR_BUDGET)?;
    write_out(f, &json(&report))
}

fn spectral_cmd(f: &Flags) -> Outcome {
    json_only(f)?;
    let inst = load_instance(f)?;
    let report = spectral_gap_check(&inst, f.tol.unwrap_or(1e-9))?;
    write_out(f, &json(&report))
}

fn identifiability(f: &Flags) -> Outcome {
    json_only(f)?;
    let inst = load_instance(f)?;
    let report = single_label_check(&inst, f.epsilon.unwrap_or(0.1), CLIQUE_CAP)?;
    write_out(f, &json(&report))?;
    if f.strict && !report.violations.is_empty() {
        return Err(Failure::Verdict(format!("{} large cliques outside every planted clique", report.violations.len())));
    }
    Ok(())
}

fn csv_text<T: Serialize>(rows: &[T]) -> Result<String, Failure> {
    let mut w = csv::Writer::from_writer(vec![]);
    for r in rows {
        w.serialize(r).map_err(|e| Failure::Usage(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Failure::Usage(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("utf-8"))
}

fn csv_header<T: Serialize>(names: &[&str], rows: &[T]) -> Result<String, Failure> {
    if rows.is_empty() {
        return Ok(format!("{}\n", names.join(",")));
    }
    csv_text(rows)
}

const ROW_COLUMNS: &[&str] = &[
    "cell", "trial", "seed", "n", "d", "p", "q", "adversary", "algorithm", "k", "status", "exact", "rho_approx",
    "output_size", "false_positives", "matching_cost", "max_best_distance", "accepted", "discarded", "infeasible",
    "skipped", "runtime_s",
];

const SUMMARY_COLUMNS: &[&str] =
    &["cell", "n", "d", "p", "q", "adversary", "algorithm", "trials", "errors", "exact_rate", "rho_approx_rate"];

fn sweep(f: &Flags) -> Outcome {
    let path = f.spec.as_deref().ok_or_else(|| Failure::Usage("missing --spec".into()))?;
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    let mut spec: ExperimentSpec = serde_json::from_str(&text)
        .map_err(|e| Failure::Usage(format!("{}: line {} column {}: {e}", path.display(), e.line(), e.column())))?;
    spec.timings |= f.timings;
    let rows = run_sweep(&spec, worker_count())?;
    let summary = summarize(&spec, &rows);
    match f.format.unwrap_or(Format::Csv) {
        Format::Csv => write_out(f, &csv_header(ROW_COLUMNS, &rows)?)?,
        Format::Json => write_out(f, &json(&rows))?,
    }
    if let Some(p) = &f.summary {
        let text = match f.format.unwrap_or(Format::Csv) {
            Format::Csv => csv_header(SUMMARY_COLUMNS, &summary)?,
            Format::Json => json(&summary),
        };
        std::fs::write(p, text).map_err(|e| Failure::Usage(format!("{}: {e}", p.display())))?;
    }
    if f.strict && rows.iter().any(|r| r.status != "ok") {
        return Err(Failure::Verdict("some sweep cells failed".into()));
    }
    Ok(())
}
