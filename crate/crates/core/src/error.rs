use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument outside the mathematical domain of an operation.
    #[error("{op}: {message}")]
    Domain { op: &'static str, message: String },

    #[error("Dirichlet series diverges for s = {s} (need s > 1)")]
    Divergent { s: f64 },

    #[error("series truncated after {terms} terms: partial value {partial}, remaining bound {bound}")]
    Truncated { partial: f64, bound: f64, terms: usize },

    #[error("series is not invertible: {0}")]
    NotInvertible(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("eta quotient weight Σ d·e_d = {sum} is not divisible by 24")]
    EtaExponent { sum: i64 },

    #[error("no Hauptmodul recipe for level {level}; supported levels: {supported:?}")]
    UnsupportedLevel { level: u64, supported: Vec<u64> },

    #[error("recipe for level {level} failed validation: {reason}")]
    RecipeInvalid { level: u64, reason: String },

    #[error("insufficient precision: need {needed}, have {available}")]
    Precision { needed: i64, available: i64 },

    #[error("empty sum: c_max = {c_max} is below the level {level}")]
    EmptySum { level: u64, c_max: u64 },

    #[error("unknown Kloosterman cache version: {0:?}")]
    UnknownCacheVersion(String),

    #[error("malformed Kloosterman cache: {0}")]
    Cache(String),

    #[error("malformed series: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(op: &'static str, message: impl Into<String>) -> Self {
        Error::Domain { op, message: message.into() }
    }
}
