use crate::{ContentId, SimTime};
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of a formula.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("request for content {content} at t={now} precedes its previous request at t={last}")]
    Ordering {
        content: ContentId,
        last: SimTime,
        now: SimTime,
    },

    #[error("no eviction candidate: {0}")]
    EmptyCandidates(&'static str),

    #[error("no positive root: capacity {capacity} is not below the {positive} contents with positive rate, so the cache never evicts")]
    NoRoot { capacity: f64, positive: usize },

    #[error("unstable queue: arrival rate {sigma} >= service rate {service_rate}")]
    UnstableQueue { sigma: f64, service_rate: f64 },

    #[error("state budget exceeded: {count} states reached with budget {budget}")]
    StateBudget { count: usize, budget: usize },

    #[error("target state unreachable")]
    Unreachable,

    #[error("config error at `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("unknown content {0}")]
    UnknownContent(ContentId),

    #[error("unknown figure `{0}` (expected fig5, fig6, fig7 or fig8)")]
    UnknownFigure(String),

    #[error("internal invariant violated: {0}")]
    Invariant(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            message: message.into(),
        }
    }

    /// Process exit code for the CLI: 2 for configuration problems, 3 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. } | Error::UnknownFigure(_) => 2,
            _ => 3,
        }
    }

    /// Short machine-readable category used in CLI error lines.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::Ordering { .. } => "ordering",
            Error::EmptyCandidates(_) => "empty-candidates",
            Error::NoRoot { .. } => "no-root",
            Error::UnstableQueue { .. } => "unstable-queue",
            Error::StateBudget { .. } => "state-budget",
            Error::Unreachable => "unreachable",
            Error::Config { .. } => "config",
            Error::UnknownContent(_) => "unknown-content",
            Error::UnknownFigure(_) => "unknown-figure",
            Error::Invariant(_) => "invariant",
            Error::Io(_) => "io",
        }
    }
}
