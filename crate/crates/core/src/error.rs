use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors raised anywhere in the toolkit.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("syntax error at {line}:{column}: {message} (expected {expected})")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
        expected: String,
    },

    #[error("unknown identifier `{name}` at {line}:{column}")]
    UnknownIdentifier {
        name: String,
        line: usize,
        column: usize,
    },

    #[error("function `{function}` takes {expected} argument(s), got {found} at {line}:{column}")]
    Arity {
        function: String,
        expected: String,
        found: usize,
        line: usize,
        column: usize,
    },

    #[error("unbound variable `{0}`")]
    UnboundVariable(String),

    #[error("domain error in `{subexpr}`: {message}")]
    Domain { subexpr: String, message: String },

    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: String,
        expected: usize,
        found: usize,
    },

    #[error("no exact oracle for {0}")]
    NoExactOracle(String),

    #[error("anchor is not on the graph: dist(ybar, F(xbar)) = {dist:e}")]
    AnchorOffGraph { dist: f64 },

    #[error("point {point:?} lies outside the declared domain box")]
    OutsideDomain { point: Vec<f64> },

    #[error("evaluation failed at {witness:?} (shell {shell}): {message}")]
    Evaluation {
        witness: Vec<f64>,
        shell: usize,
        message: String,
    },

    #[error("invalid sampling schedule: {0}")]
    Schedule(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("mapping is not differentiable at the anchor ({0}); use the outer prederivative criterion instead")]
    NotDifferentiable(String),

    #[error("document error at line {line}: {message}")]
    Document { line: usize, message: String },

    #[error("missing section [{0}]")]
    MissingSection(String),

    #[error("unknown mapping {0}")]
    UnknownMapping(String),

    #[error("unknown example `{0}`")]
    UnknownExample(String),

    #[error("unknown operation `{0}`")]
    UnknownOperation(String),

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn dim(context: impl Into<String>, expected: usize, found: usize) -> Self {
        Error::DimensionMismatch {
            context: context.into(),
            expected,
            found,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// True for errors produced while evaluating a mapping at a point, as
    /// opposed to malformed input.
    pub fn is_evaluation(&self) -> bool {
        matches!(
            self,
            Error::Domain { .. }
                | Error::Evaluation { .. }
                | Error::UnboundVariable(_)
                | Error::OutsideDomain { .. }
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
