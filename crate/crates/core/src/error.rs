use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Input outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("configuration error: {0}")]
    Config(String),

    /// Quadrature or solver failed its own accuracy check.
    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("constraint `{row}` not spanned by hedging instruments at t={time} (residual {residual:.3e})")]
    NotSpanned { row: String, time: f64, residual: f64 },

    #[error("hedger greeks matrix has rank {rank}, need {required} (t={time})")]
    RankDeficient { rank: usize, required: usize, time: f64 },

    #[error("instrument `{name}` is not strictly convex at t={time} (gamma {gamma:.3e})")]
    ConvexityViolated { name: String, time: f64, gamma: f64 },

    #[error("multi-index {0} has no stochastic letter")]
    NoStochasticPart(String),

    #[error("missing iterated integral for {0}")]
    MissingDependency(String),

    #[error("sampling budget of {attempts} attempts exhausted ({accepted} accepted)")]
    SamplingExhausted { attempts: u64, accepted: u64 },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
