use thiserror::Error;

/// Errors raised anywhere in the simulation stack.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A value fell outside the domain an operation accepts.
    #[error("{what} = {value} outside [{lo}, {hi}]")]
    Domain {
        what: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    /// Invalid user-supplied configuration.
    #[error(transparent)]
    Validation(#[from] ValidationError),

    /// Broken precondition inside the engine (a caller bug, not bad input).
    #[error("internal error: {0}")]
    Internal(String),

    #[error("io error: {0}")]
    Io(String),
}

/// Machine-readable configuration errors.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ValidationError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unknown edge id `{0}`")]
    UnknownEdge(String),
    #[error("duplicate edge id `{0}`")]
    DuplicateEdge(String),
    #[error("node {node}: column {column} of A sums to {sum}, expected 1")]
    NonStochasticColumn { node: usize, column: usize, sum: f64 },
    #[error("node {node}: unsupported junction shape {n_in}-to-{n_out}")]
    UnsupportedShape { node: usize, n_in: usize, n_out: usize },
    #[error("node {node}: {message}")]
    BadNode { node: usize, message: String },
    #[error("edge `{edge}`: {message}")]
    BadEdge { edge: String, message: String },
    #[error("edge `{edge}` {end} end attached {count} times, expected exactly once")]
    Attachment {
        edge: String,
        end: &'static str,
        count: usize,
    },
    #[error("invalid simulation parameter: {0}")]
    BadParameter(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
