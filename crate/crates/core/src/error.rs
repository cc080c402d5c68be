use thiserror::Error;

use crate::kinematics::JointVector;

/// Errors produced across planning, scoring and document handling.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The goal lies outside the reachable workspace or IK did not converge.
    /// `best_effort` is the closest configuration found (within limits).
    #[error("goal unreachable (residual {residual:.4} m)")]
    Unreachable {
        residual: f64,
        best_effort: JointVector,
    },

    #[error("unknown target `{0}`")]
    TargetMissing(String),

    #[error("primitive infeasible: {0}")]
    Infeasible(String),

    /// A member of a composed plan failed.
    #[error("plan step {index} failed: {source}")]
    PlanStep {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("invariant violated: {0}")]
    InvariantViolation(String),

    #[error("unsupported {format} document version `{found}`")]
    UnsupportedVersion { format: &'static str, found: String },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Strips `PlanStep` wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::PlanStep { source, .. } => source.root(),
            other => other,
        }
    }

    pub fn is_unreachable(&self) -> bool {
        matches!(self.root(), Error::Unreachable { .. })
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
