//! Structural statistics of random intersection graphs and brute-force oracles.

mod balance;
mod cliques;
mod labels;

pub use balance::{
    balancedness, binomial, combinations, pair_weight, signed_product, BalancednessReport, BipartiteView,
};
pub use cliques::{
    enumerate_maximal_cliques, find_biclique_witness, max_degree_into_clique, maximal_cliques_by_subsets,
    single_label_check, BicliqueWitness, SingleLabelReport, WitnessSearch,
};
pub use labels::{
    check_event_e, duplicate_free_greedy, for_each_subset, is_duplicate_free, label_counts, label_stats,
    EventConfig, EventReport, EventViolation, LabelSplit, LabelStats, PairLabels,
};

/// Default vertex cap for maximal clique enumeration.
pub const CLIQUE_CAP: usize = 400;

/// Default pair budget for balancedness scans.
pub const PAIR_BUDGET: u64 = 10_000_000;
