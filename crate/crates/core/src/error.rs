//! Error type shared by every module.

use alloc::string::String;

/// Errors reported by the library.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// The instance data violates a structural invariant.
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    /// Parameters are outside their admissible domain.
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    /// The event loop exceeded its batch budget.
    #[error("event loop exceeded {batches} batches without terminating")]
    NonTermination {
        /// Number of processed batches.
        batches: usize,
    },
    /// Some edge can never be connected because no reachable facility can ever open.
    #[error("edge {edge} can never be served")]
    Unservable {
        /// Index of the first stranded edge.
        edge: usize,
    },
    /// Exhaustive enumeration was requested on too many locations.
    #[error("exhaustive search over {n} locations exceeds the cap of {cap}")]
    BudgetExceeded {
        /// Requested size.
        n: usize,
        /// Largest supported size.
        cap: usize,
    },
    /// A service region has a zero or non-finite normalization denominator.
    #[error("service region has a degenerate normalization")]
    DegenerateRegion,
    /// Unit-copy expansion needs integral masses.
    #[error("edge {edge} has non-integral mass {mass}")]
    NonIntegralMass {
        /// Edge index.
        edge: usize,
        /// Offending mass.
        mass: f64,
    },
    /// A solution vector does not match the program's index shape.
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    /// The input solution is infeasible for the requested conversion.
    #[error("infeasible input: {0}")]
    InfeasibleInput(String),
    /// The operation is not available for this program kind.
    #[error("unsupported: {0}")]
    Unsupported(String),
    /// A dual certificate does not cover the solution cost.
    #[error("dual certificate sum {sum_mu} is below solution cost {cost}")]
    CertificateFailure {
        /// Sum of the dual values.
        sum_mu: f64,
        /// Total cost of the solution.
        cost: f64,
    },
}

/// Convenience alias.
pub type Result<T> = core::result::Result<T, Error>;
