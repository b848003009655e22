use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Scenario or policy parameters break an invariant.
    #[error("invalid scenario: {0}")]
    Validation(String),

    #[error("sampling constraint violated: T * {max_in_degree} (max in-degree) >= 1, matrix would lose nonnegativity")]
    SamplingConstraint { max_in_degree: usize },

    #[error("non-finite state at step {step}, agent {agent}")]
    NonFinite { step: usize, agent: usize },

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("agent count mismatch: {left} vs {right}")]
    AgentCountMismatch { left: usize, right: usize },

    #[error("no complete-graph phase in trace")]
    NoCompletePhase,

    #[error("scenario generation gave up after {attempts} draws without a directed spanning tree; try larger radii")]
    RejectionBudget { attempts: usize },

    #[error("trace file malformed: {0}")]
    Trace(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Whether this error stems from bad user input rather than a failure at runtime.
    pub fn is_validation(&self) -> bool {
        matches!(self, Error::Validation(_) | Error::SamplingConstraint { .. } | Error::Json(_))
    }
}
