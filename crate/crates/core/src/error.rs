use thiserror::Error;

/// Errors produced by the solver library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter or argument is out of its admissible range.
    #[error("invalid input: {0}")]
    Input(String),

    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("syntax error at offset {offset}: {message} (expected one of: {})", expected.join(", "))]
    Syntax {
        offset: usize,
        message: String,
        expected: Vec<String>,
    },

    #[error("unknown identifier `{name}` at offset {offset}")]
    UnknownIdentifier { name: String, offset: usize },

    #[error("named constant `{0}` is not bound")]
    Unbound(&'static str),

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    /// Adaptive quadrature exhausted its panel splits.
    #[error("quadrature did not converge (achieved residual {residual:e})")]
    Quadrature { residual: f64 },

    #[error("insufficient data: need at least {needed}, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("compatibility violated: {what} (mismatch {mismatch:e} > tolerance {tol:e})")]
    Compatibility { what: String, mismatch: f64, tol: f64 },

    #[error("proportionality violated: -b1/(2 a1^2) = {left} but -b2/(2 a2^2) = {right}")]
    Proportionality { left: f64, right: f64 },

    #[error("numerical failure: {0}")]
    Numeric(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn ensure_finite(name: &str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::Input(format!("{name} must be finite, got {value}")))
    }
}
