use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::graph::Graph;
use crate::sos::{build_clique_axioms, build_outside_truth_axioms, solve, verify_certificate, CertificateCheck, DualCertificate, SolveOutcome, SolverOptions};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RefutationVerdict {
    Refuted,
    /// The relaxation was feasible at this degree; inconclusive below the degree
    /// the guarantees need.
    NotRefuted,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RefutationReport {
    pub verdict: RefutationVerdict,
    pub degree: usize,
    /// Clique size encoded in the axioms.
    pub k_axioms: f64,
    /// Builder of the refuted system.
    pub system: String,
    pub certificate: Option<DualCertificate>,
    /// Independent re-check of the certificate.
    pub check: Option<CertificateCheck>,
    pub note: String,
}

/// Slack `4 √(ln n / k)` used when no ground truth is given.
pub fn default_refutation_slack(n: usize, k: f64) -> f64 {
    4.0 * ((n as f64).ln() / k).sqrt()
}

/// With ground truth, refute any `(1 − ε)k`-clique with a vertex outside every
/// planted clique; otherwise refute any `(1 + ε)k`-clique. `epsilon = None`
/// uses 0 with ground truth and [`default_refutation_slack`] without.
pub fn refute(
    graph: &Graph,
    k: f64,
    epsilon: Option<f64>,
    ground_truth: Option<&[Vec<usize>]>,
    degree: usize,
    opts: &SolverOptions,
) -> Result<RefutationReport> {
    let (sys, k_axioms) = match ground_truth {
        Some(truth) => {
            let ka = (1.0 - epsilon.unwrap_or(0.0)) * k;
            (build_outside_truth_axioms(graph, ka, truth), ka)
        }
        None => {
            let ka = (1.0 + epsilon.unwrap_or_else(|| default_refutation_slack(graph.n(), k))) * k;
            (build_clique_axioms(graph, ka), ka)
        }
    };
    let outcome = solve(&sys, degree, None, &[], opts)?;
    let system = sys.builder.clone();
    Ok(match outcome {
        SolveOutcome::Infeasible(cert) => {
            let check = verify_certificate(&sys, &cert, opts.certificate_tol)?;
            RefutationReport {
                verdict: RefutationVerdict::Refuted,
                degree,
                k_axioms,
                system,
                note: format!("certificate constant {:.3e}", check.constant),
                certificate: Some(cert),
                check: Some(check),
            }
        }
        SolveOutcome::Feasible(_) => RefutationReport {
            verdict: RefutationVerdict::NotRefuted,
            degree,
            k_axioms,
            system,
            certificate: None,
            check: None,
            note: format!("a degree-{degree} pseudo-distribution exists; inconclusive at this degree"),
        },
    })
}
