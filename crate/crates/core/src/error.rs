use thiserror::Error;

/// Errors raised by the library. Search outcomes such as a contradiction
/// are values, not errors; see [`crate::engine::SearchOutcome`].
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid rational: {0}")]
    InvalidRational(String),
    #[error("valuation of zero is undefined")]
    UndefinedValuation,
    #[error("{0} is not prime")]
    InvalidPrime(u64),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("precondition violated: {0}")]
    PreconditionViolation(String),
    #[error("degenerate equation parameter q = {0}")]
    DegenerateEquation(String),
    #[error("equations need at least two variables, got {0}")]
    InvalidArity(usize),
    #[error("color of zero is undefined")]
    UndefinedColor,
    #[error("invalid coloring spec: {0}")]
    InvalidColoring(String),
    #[error("prime {0} is outside the universe's prime support")]
    UnsupportedPrime(String),
    #[error("invalid universe: {0}")]
    InvalidUniverse(String),
    #[error("search budget exceeded: {0}")]
    BudgetExceeded(crate::engine::SearchStats),
    #[error("refusing to export a proof that fails validation ({0} violations)")]
    RefusedExport(usize),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
