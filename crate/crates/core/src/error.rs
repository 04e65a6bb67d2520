use thiserror::Error;

/// Errors produced by the numerical routines and the experiment harness.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument is outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A matrix expected to be positive semi-definite has a negative eigenvalue.
    #[error("matrix is not positive semi-definite (smallest eigenvalue {0:e})")]
    NotPsd(f64),

    /// Pilot energy `tau_p * rho_p` is not positive, so no channel estimate exists.
    #[error("singular estimation problem: tau_p * rho_p = {0} must be positive")]
    Singular(f64),

    /// A bracketing search did not find an interior optimum.
    #[error("bracket failure: {0}")]
    Bracket(String),

    /// The inner maximisation is unbounded above.
    #[error("unbounded objective: {0}")]
    Unbounded(String),

    /// The norm budget cannot be met inside the box.
    #[error("infeasible: {0}")]
    Infeasible(String),

    /// Input is degenerate for the requested operation.
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// Two vectors that must match in length do not.
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    /// A vector that must be in {-1, +1}^n is not.
    #[error("entry {index} is {value}, expected -1 or +1")]
    NotBinary { index: usize, value: f64 },

    /// Configuration failed one or more invariants. Every violation is listed.
    #[error("invalid configuration:\n  - {}", .0.join("\n  - "))]
    Validation(Vec<String>),

    /// Configuration text could not be parsed.
    #[error("parse error: {0}")]
    Parse(String),

    /// Reading input or writing output failed.
    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;
