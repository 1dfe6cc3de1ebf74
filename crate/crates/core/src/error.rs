use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("subspace is not invariant: largest leaking element {leak:e}")]
    InvariantViolation { leak: f64 },

    #[error("null space of block {block} has multiplicity {multiplicity}, expected 1")]
    AmbiguousNullSpace { block: String, multiplicity: usize },

    #[error("negative rate {value:e} for {from} -> {to}")]
    NegativeRate { from: usize, to: usize, value: f64 },

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("degenerate chain: {0}")]
    DegenerateChain(String),

    #[error("transient sector is singular ({0} states); some non-core component does not decay")]
    NonTransient(usize),
}
