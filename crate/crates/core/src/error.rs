use thiserror::Error;

use crate::identify::Hedge;

/// Errors raised across the engine.
#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),

    #[error("duplicate variable `{0}`")]
    DuplicateVariable(String),

    #[error("variable `{name}` needs cardinality >= 2, got {cardinality}")]
    InvalidCardinality { name: String, cardinality: usize },

    #[error("self loop on `{0}`")]
    SelfLoop(String),

    #[error("directed part contains a cycle through `{0}`")]
    DirectedCycle(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("argument sets overlap on `{0}`")]
    Overlap(String),

    #[error("target set is empty")]
    EmptyTargets,

    #[error("{0}")]
    Invalid(String),

    #[error("zero or negative mass in a denominator over {0}")]
    ZeroDenominator(String),

    #[error("dataset has no rows")]
    EmptyDataset,

    #[error("enumeration needs {needed} configurations, budget is {budget}")]
    BudgetExceeded { needed: u128, budget: u128 },

    #[error("query is not identifiable: {0}")]
    NotIdentifiable(Hedge),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::Invalid(msg.into())
}
