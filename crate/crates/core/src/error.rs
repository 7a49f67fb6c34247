use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Malformed profile document (syntax or schema).
    #[error("parse error at {line}:{column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    /// A value or reference violates a domain invariant.
    #[error("{0}")]
    Invalid(String),

    #[error("infeasible model {0}")]
    InfeasibleModel(String),

    #[error("budget infeasible: minimum achievable latency is {min_latency_ms} ms")]
    BudgetInfeasible { min_latency_ms: f64 },

    #[error("instance too large for oracle: {combinations} assignments exceed cap {cap}")]
    TooLarge { combinations: u128, cap: u128 },

    #[error("internal invariant violated: {0}")]
    Internal(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    /// True for errors reporting that the optimization problem has no solution.
    pub fn is_infeasible(&self) -> bool {
        matches!(
            self,
            Error::InfeasibleModel(_) | Error::BudgetInfeasible { .. }
        )
    }
}
