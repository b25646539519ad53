use thiserror::Error;

use crate::expr::{EvalError, ParseError};
use crate::solver::WeightedTrajectory;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The requested accuracy could not be reached. `estimate` is the best
    /// error estimate that was achieved.
    #[error("accuracy error: requested tolerance {requested:e}, best estimate {estimate:e} ({context})")]
    Accuracy {
        requested: f64,
        estimate: f64,
        context: String,
    },

    /// The inner fixed-point iteration of the time stepper failed to contract.
    /// The trajectory computed up to (excluding) `node` is attached.
    #[error("solver failed to converge at node {node} (t = {t:e}); last defect {defect:e}")]
    Convergence {
        node: usize,
        t: f64,
        defect: f64,
        partial: Box<WeightedTrajectory>,
    },

    /// A numerical observation contradicts a property that theory guarantees.
    #[error("invariant violation: {0}")]
    InvariantViolation(String),

    /// Failure of an underlying numerical kernel (eigenvalues, factorisation).
    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("input error: {0}")]
    Input(String),

    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error("coefficient {name}[{index}] at t = {t:e}: {source}")]
    CoefficientEval {
        name: String,
        index: String,
        t: f64,
        #[source]
        source: EvalError,
    },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
