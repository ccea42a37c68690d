use thiserror::Error;

/// Errors raised by zonekit operations.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ZoneError {
    /// An argument lies outside the domain of the operation (zero vector,
    /// non-finite coordinate, empty set, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// The operation is not defined for the given norm.
    #[error("unsupported operation: {0}")]
    Unsupported(String),

    /// Inputs are well-formed but violate a structural requirement
    /// (overlapping sites, mismatched grids, site outside the window).
    #[error("validation error: {0}")]
    Validation(String),

    /// An internal invariant failed. Indicates a bug, not bad input.
    #[error("internal error: {0}")]
    Internal(String),

    /// A non-uniqueness demonstration did not produce the expected evidence.
    #[error("demonstration failed: {0}")]
    DemonstrationFailed(String),
}

pub type Result<T, E = ZoneError> = std::result::Result<T, E>;
