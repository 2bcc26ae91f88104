use alloc::string::String;

use crate::design::DesignError;

/// Failure to evaluate a model mean or gradient at a point.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvalError {
    /// An operation was applied outside its domain (`log` of a non-positive
    /// value, division by zero, ...).
    #[error("domain violation in {op}: operand {value}")]
    Domain { op: &'static str, value: f64 },
    /// A symbol had no binding in the evaluation environment.
    #[error("unbound symbol `{0}`")]
    Unbound(String),
    /// The result was NaN or infinite.
    #[error("non-finite result in {0}")]
    NonFinite(&'static str),
}

/// Errors raised by criterion evaluation and the search algorithms.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("model evaluation failed at run {run}: {source}")]
    Eval { run: usize, source: EvalError },
    #[error("information matrix is singular")]
    Singular,
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error(transparent)]
    Design(#[from] DesignError),
    #[error("no nonsingular starting design after {0} attempts")]
    NoNonsingularStart(usize),
    #[error("every try failed")]
    AllTriesFailed,
    #[error("invalid configuration: {0}")]
    Config(String),
}
