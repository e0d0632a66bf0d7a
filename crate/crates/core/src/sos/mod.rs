//! Polynomial axiom systems over 0/1 variables and their moment relaxations.

mod axioms;
mod inequalities;
mod poly;
mod pseudo;
mod relax;
mod sdp;

pub use axioms::{
    build_biclique_axioms, build_clique_axioms, build_outside_truth_axioms, build_reduced_axioms,
    build_relaxed_axioms, build_robust_axioms, zero_monomials, AxiomSystem, RobustOptions, VarKind, Variable,
};
pub use inequalities::{verify_certificate_inequality, InequalityCheck, InequalityContext, InequalityName};
pub use poly::{is_subset, mono_mul, monomial, Monomial, Poly};
pub use pseudo::{
    cauchy_schwarz_check, monomials_up_to, pseudo_expectation, verify_pseudodistribution, CauchySchwarzReport, Moments,
    PseudoDistribution, SolverStatus, VerificationReport,
};
pub use relax::{
    relaxation_size, solve, verify_certificate, CertificateCheck, DualCertificate, EqualityMultiplier, GramBlock,
    Localizer, SolveOutcome, SolverOptions,
};
