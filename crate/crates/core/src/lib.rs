//! Recovery of overlapping planted cliques in noisy random intersection graphs.
//!
//! The crate is organised by task:
//! * [`model`] samples instances, couplings and adversarial corruptions;
//! * [`combinatorics`] computes structural statistics and brute-force oracles;
//! * [`sos`] builds polynomial axiom systems over 0/1 variables and solves their
//!   moment relaxations with a primal-dual interior-point method;
//! * [`recovery`] runs the exact, robust and sparse recovery algorithms, refutation
//!   and scoring;
//! * [`spectral`] estimates spectral norms of centred adjacency matrices;
//! * [`harness`] drives parameter sweeps and tabulates results.

pub mod error;
pub mod combinatorics;
pub mod graph;
pub mod harness;
pub mod model;
pub mod recovery;
pub mod rng;
pub mod sos;
pub mod spectral;

pub use error::{Error, Result};
pub use graph::{Bits, Graph};
