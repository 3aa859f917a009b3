use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("invalid name `{0}`")]
    BadName(String),
    #[error("duplicate name `{0}`")]
    DuplicateName(String),
    #[error("non-finite value in {0}")]
    NonFinite(String),
    #[error("inconsistent bounds on `{0}`")]
    BadBounds(String),
    #[error("row `{row}` references unknown column {column}")]
    UnknownColumn { row: String, column: usize },
}

#[derive(Debug, Error)]
pub enum SolveError {
    #[error(transparent)]
    Model(#[from] ModelError),
    /// The simplex iteration guard fired or the basis could not be
    /// recovered. The solver never returns a silently wrong answer.
    #[error("numerical breakdown after {iterations} simplex iterations: {reason}")]
    NumericalBreakdown { iterations: usize, reason: String },
}

#[derive(Debug, Error)]
pub enum LpFileError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
