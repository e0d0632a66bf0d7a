use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Parameters outside the model's admissible range.
    #[error("model constraint violated: {0}")]
    Model(String),

    #[error("monotone adversary may only delete noise edges, but {{{u},{v}}} joins vertices sharing a label")]
    MonotoneViolation { u: usize, v: usize },

    #[error("adversary budget exceeded: {0}")]
    AdversaryBudget(String),

    /// A combinatorial or memory guard tripped before any work was done.
    #[error("size budget exceeded: {0}")]
    SizeBudget(String),

    #[error("solver did not converge: {0}")]
    NonConvergence(String),

    #[error("invalid argument: {0}")]
    Invalid(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("malformed input: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;
