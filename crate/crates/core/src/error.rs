//! Error type shared across the library.

use thiserror::Error;

/// Errors raised by oracle construction, path analysis, and the engine.
#[derive(Debug, Error)]
pub enum Error {
    /// The spectrum has a single distinct value: the hidden subgroup is the
    /// whole group and there is nothing to search for.
    #[error("already solved: oracle has a single distinct value")]
    AlreadySolved,

    /// A threshold fell below the minimum oracle value.
    #[error("empty marked set at threshold {threshold}")]
    EmptyMarkedSet { threshold: u64 },

    /// Malformed oracle table or instance parameters.
    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    /// `gcd(a, Z) != 1`; the gcd is already a nontrivial factor.
    #[error("base {a} shares factor {gcd} with modulus {modulus}")]
    NonCoprimeBase { a: u64, modulus: u64, gcd: u64 },

    /// Consecutive ground states are (numerically) orthogonal.
    #[error("path disconnected: overlap below 1e-12 at step {step}")]
    PathDisconnected { step: usize },

    /// Requested dense computation exceeds the dimension budget.
    #[error("dimension {dim} exceeds dense budget {budget}")]
    DimensionBudget { dim: usize, budget: usize },

    /// Probe never decayed within the repeat budget.
    #[error("step {step} failed after {attempts} attempts (off-resonance or leakage suspected)")]
    StepFailed { step: usize, attempts: usize },

    /// State amplitudes became non-finite.
    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    /// Exhaustive search exceeded its configured budget.
    #[error("brute-force budget exceeded: {0}")]
    BudgetExceeded(String),

    /// Sampling budget ran out before an answer could be extracted.
    #[error("inconclusive: {0}")]
    Inconclusive(String),
}

pub type Result<T> = std::result::Result<T, Error>;
