use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("modulus {0} is too small (need an odd prime p >= 5)")]
    ModulusTooSmall(u64),
    #[error("zero has no multiplicative inverse mod {0}")]
    ZeroInverse(u64),
    #[error("matrix [[{a}, {b}], [{c}, {d}]] has determinant {det} != 1 mod {p}")]
    NotUnimodular { a: u64, b: u64, c: u64, d: u64, det: u64, p: u64 },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("atom ({basis}, {vector}) out of range ({bases} bases of size {p})")]
    InvalidAtom { basis: usize, vector: usize, bases: usize, p: usize },
    #[error("duplicate atom ({basis}, {vector}) in selection")]
    DuplicateAtom { basis: usize, vector: usize },
    #[error("torus id {id} out of range ({count} tori)")]
    InvalidTorus { id: usize, count: usize },
    #[error(
        "exhaustive audit needs {pairs} pairs, over the budget of {budget}; use sampled mode (--pairs N --seed S)"
    )]
    BudgetExceeded { pairs: u128, budget: u128 },
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("{0}")]
    Domain(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
