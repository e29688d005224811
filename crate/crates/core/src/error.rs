use thiserror::Error;

use crate::model::Violation;
use crate::solvers::IterationTrace;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected} objects, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("round {round}: r({i},{j}) + r({j},{i}) = {sum}, expected 1")]
    InconsistentRound {
        round: usize,
        i: usize,
        j: usize,
        sum: f64,
    },

    #[error("round {round}: entry ({i},{j}) is invalid: {reason}")]
    InvalidRoundEntry {
        round: usize,
        i: usize,
        j: usize,
        reason: String,
    },

    #[error("ranking problem violates {} invariant(s): {}", .0.len(), summarize(.0))]
    InvalidProblem(Vec<Violation>),

    #[error("ranking problem has no objects")]
    EmptyProblem,

    #[error("comparison graph is disconnected; components: {}", format_components(.components))]
    DisconnectedGraph { components: Vec<Vec<String>> },

    #[error(
        "comparison graph is regular bipartite; the iteration does not converge, use the direct solver"
    )]
    RegularBipartiteGraph,

    #[error("no convergence after {iterations} iterations (last step delta {last_delta:e})")]
    MaxIterationsExceeded {
        iterations: usize,
        last_delta: f64,
        /// Iterates recorded before giving up; `None` for methods without a trace.
        trace: Option<Box<IterationTrace>>,
    },

    #[error("epsilon must be nonnegative, got {0}")]
    NegativeEpsilon(f64),

    #[error("epsilon {epsilon} is too large for the series; it must stay below {limit}")]
    EpsilonTooLarge { epsilon: f64, limit: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid digraph: {0}")]
    InvalidDigraph(String),

    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("linear solve failed: {0}")]
    Numerical(String),
}

impl Error {
    /// Errors caused by the shape of the comparison graph rather than by bad data.
    pub fn is_structural(&self) -> bool {
        matches!(
            self,
            Error::DisconnectedGraph { .. } | Error::RegularBipartiteGraph
        )
    }

    pub(crate) fn parse(line: u64, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}

fn summarize(violations: &[Violation]) -> String {
    violations
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

fn format_components(components: &[Vec<String>]) -> String {
    components
        .iter()
        .map(|c| format!("{{{}}}", c.join(", ")))
        .collect::<Vec<_>>()
        .join(" ")
}
