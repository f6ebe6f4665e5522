use thiserror::Error;

/// Errors raised by the sequence, counting, lemma and analysis routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("elements not strictly increasing at index {index}: {prev} followed by {next}")]
    NotIncreasing { index: usize, prev: u64, next: u64 },

    #[error("integer overflow while computing {0}")]
    Overflow(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("{modulus} does not divide {ds} - {d1}")]
    Divisibility { d1: u64, ds: u64, modulus: u64 },

    #[error("parameters (delta={delta}, delta0={delta0}) violate the feasibility system")]
    Infeasible { delta: f64, delta0: f64 },

    #[error("K = floor(delta * sqrt(N)) is zero for delta={delta}, N={n}")]
    KTooSmall { delta: f64, n: u64 },

    #[error("sequence has {available} elements, {needed} required")]
    InsufficientElements { needed: usize, available: usize },

    #[error("{0} is not a perfect square")]
    NotSquare(u64),

    #[error("N = {0} is too large to materialize a counts array; use the streamed summary")]
    ProfileTooLarge(u64),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Toml(#[from] toml::ser::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
