use thiserror::Error;

use crate::matrix::SignatureTriple;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("mode mismatch: cannot combine an exact and a float scalar")]
    ModeMismatch,

    #[error("singular matrix")]
    SingularMatrix,

    #[error("signature {found}, expected (1,2,0)")]
    InvalidSignature { found: SignatureTriple },

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    /// A construction reached a state the theory rules out. Either the code
    /// is wrong or an invalid input escaped validation.
    #[error("internal invariant violated: {0}")]
    InternalInvariantViolation(String),

    #[error("residual {residual:.3e} exceeds tolerance {tol:.3e}")]
    ResidualTooLarge { residual: f64, tol: f64 },

    #[error("ambiguous classification: {0}")]
    AmbiguousClassification(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn invariant(msg: impl Into<String>) -> Self {
        Error::InternalInvariantViolation(msg.into())
    }

    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        Error::PreconditionViolated(msg.into())
    }
}
