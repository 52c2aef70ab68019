use thiserror::Error;

/// Errors raised by the analysis routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("order violation: operator of order {found} exceeds the bound {bound}")]
    OrderViolation { found: i64, bound: i64 },

    #[error("real root {re}{im:+}i of the boundary symbol (|Im| within tolerance); proper ellipticity fails")]
    RealRoot { re: f64, im: f64 },

    #[error("unsupported operator: {0}")]
    Unsupported(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("internal consistency error: {0}")]
    Consistency(String),

    #[error("invalid problem: {0}")]
    InvalidProblem(String),
}

pub type Result<T> = std::result::Result<T, Error>;
