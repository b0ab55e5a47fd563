use thiserror::Error;

/// Errors raised by the decision procedures.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid canonical type: {0}")]
    InvalidType(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("arithmetic overflow in {0}")]
    Overflow(&'static str),

    #[error("dimension vector has a negative entry")]
    Negative,

    #[error("dimension vector is not regular")]
    NotRegular,

    #[error("enumeration budget exceeded: {needed} candidates, budget {budget}")]
    BudgetExceeded { needed: u128, budget: u128 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("pair is not in base form: {0}")]
    NotInBaseForm(String),

    #[error("type is below the complete-intersection threshold")]
    BelowThreshold,

    #[error("degenerate construction: {0}")]
    Degenerate(String),

    #[error("representations are over different fields or types")]
    FieldMismatch,

    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
