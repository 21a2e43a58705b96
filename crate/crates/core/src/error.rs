//! Crate-wide error type.

use crate::weitzman::MechanismFamily;

/// Diagnostics attached to a failed scalar optimization.
#[derive(Debug, Clone)]
pub struct OptDiagnostics {
    /// Bracket in effect when the search gave up.
    pub bracket: (f64, f64),
    /// Argument of the best objective value seen.
    pub best_arg: f64,
    /// Best objective value seen.
    pub best_value: f64,
    /// Number of bracket expansions attempted.
    pub expansions: u32,
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An argument is outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Model parameters violate a construction invariant.
    #[error("construction error: {0}")]
    Construction(String),

    /// The requested mechanism is not supported by this operation.
    #[error("unsupported mechanism: {0}")]
    UnsupportedMechanism(String),

    /// The scalar optimizer could not certify an interior optimum.
    #[error("optimization error: {message} (bracket [{:.6e}, {:.6e}], best {:.6e} at {:.6e}, {} expansions)",
        .diagnostics.bracket.0, .diagnostics.bracket.1,
        .diagnostics.best_value, .diagnostics.best_arg, .diagnostics.expansions)]
    Optimization {
        message: String,
        diagnostics: OptDiagnostics,
    },

    /// Every bargaining candidate has zero attainable surplus.
    #[error("infeasible bargaining problem: all candidates have zero objective; per-family maxima: {0:?}")]
    Infeasible(Vec<(MechanismFamily, f64)>),
}

pub type Result<T> = std::result::Result<T, Error>;
