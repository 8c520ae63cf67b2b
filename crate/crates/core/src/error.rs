use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("{variable} = {value} is outside [{lower}, {upper}]")]
    OutOfBounds {
        variable: String,
        value: f64,
        lower: f64,
        upper: f64,
    },
    #[error("{0}")]
    Domain(String),
    #[error("model error: {0}")]
    Model(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("expected {expected} replication outcomes, got {got}")]
    ReplicationCount { expected: usize, got: usize },
    #[error("configuration {0} is neither the pending suggestion nor an untold design point")]
    UnknownConfiguration(String),
    #[error("initial design incomplete: {remaining} design points still to be told")]
    DesignIncomplete { remaining: usize },
    #[error("evaluation budget exhausted")]
    BudgetExhausted,
    #[error("evaluator failed: {0}")]
    Evaluator(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// True for errors caused by the order of ask/tell calls rather than by
    /// bad input values.
    pub fn is_state_error(&self) -> bool {
        matches!(
            self,
            Error::DesignIncomplete { .. }
                | Error::BudgetExhausted
                | Error::UnknownConfiguration(_)
        )
    }
}
