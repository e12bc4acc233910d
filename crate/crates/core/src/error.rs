use thiserror::Error;

#[derive(Debug, Error)]
pub enum WedgeError {
    /// Input outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A series or quadrature stopped before reaching the requested
    /// accuracy; carries the bound that was achieved.
    #[error("accuracy target {requested:e} not met, achieved {achieved:e}")]
    Accuracy { achieved: f64, requested: f64 },

    /// A caller-side contract was violated (missing derivatives, too few
    /// points, zero denominator, ...).
    #[error("contract violation: {0}")]
    Contract(String),

    /// An integrand evaluated to a non-finite value at a quadrature node.
    #[error("non-finite integrand at node {location}")]
    Evaluation { location: String },
}

pub type Result<T> = std::result::Result<T, WedgeError>;
