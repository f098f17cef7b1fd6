use thiserror::Error;

/// Syntax error with a 1-based source position.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{message} at line {line}, column {column}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl ParseError {
    pub fn new(line: usize, column: usize, message: impl Into<String>) -> Self {
        ParseError { line, column, message: message.into() }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error("invalid theory: {0}")]
    InvalidTheory(String),

    #[error("domain: {0}")]
    Domain(String),

    #[error("missing mode declaration for {0}")]
    MissingMode(String),

    #[error("unregistered built-in {0}")]
    UnknownBuiltin(String),

    #[error("built-in {0} needs integer arguments")]
    NonIntegerArgument(String),

    #[error("coverage search exceeded its budget of {0} bindings")]
    BudgetExceeded(usize),

    #[error("grounding failed: {0}")]
    Grounding(String),

    #[error("plan derivation failed: {0}")]
    Plan(String),

    #[error("distance undefined: both plans are empty")]
    EmptyPlans,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("teacher: {0}")]
    Teacher(String),

    #[error("session: {0}")]
    Session(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
