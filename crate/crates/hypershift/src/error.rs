//! Error taxonomy for schedule construction and certified verification.
//!
//! Every fallible operation in this crate reports *why* certification
//! failed, never a silently wrong number.  Budget-style failures carry
//! enough data to restate the partial result (brackets, certificates),
//! so an honest "could not decide within budget" is itself a checkable
//! artifact.

use rug::Integer;

/// A certificate that a complex-rotation schedule step cannot terminate:
/// the supremum of all future `y` values provably stays below the step's
/// exit threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct StallCertificate {
    /// Step parameter `q` of the stalled step.
    pub q: u32,
    /// Index at which the stall was diagnosed.
    pub at_index: Integer,
    /// `y` value reached at diagnosis (upper bound, 30 significant digits).
    pub y_reached: String,
    /// Certified upper bound on `sup_k y_k` over the entire remaining step.
    pub y_supremum: String,
    /// Exit threshold the step would need to cross.
    pub threshold: String,
}

impl std::fmt::Display for StallCertificate {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "step q={} stalled at index {}: y = {} but sup y <= {} < threshold {}",
            self.q, self.at_index, self.y_reached, self.y_supremum, self.threshold
        )
    }
}

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An interval comparison could not be decided at the stated precision
    /// and the caller's escalation policy was exhausted.
    #[error("comparison undecidable at {bits} bits of precision: {what}")]
    PrecisionUndecidable { bits: u32, what: String },

    /// An index/time budget ran out before the requested event occurred.
    #[error("budget of {budget} exhausted: {detail}")]
    BudgetExceeded { budget: u64, detail: String },

    /// The requested index lies outside the range this mode can reach
    /// (before the schedule start, or beyond any computable summary).
    #[error("index {index} out of reach: {reason}")]
    OutOfReach { index: Integer, reason: String },

    /// No witness iterate could be certified within the search budget.
    #[error("no certified witness for |z|={modulus}, target {l} within budget {budget}")]
    NoWitnessInBudget { modulus: String, l: u64, budget: u64 },

    /// Tail-magnitude gap `log r_k - log r_{k+1}` could not be certified
    /// strictly positive, so log-difference formulas would be invalid.
    #[error("degenerate magnitude gap at index {index}")]
    DegenerateGap { index: Integer },

    /// A vector that must be nonzero (target, direction) was zero.
    #[error("zero vector where a nonzero vector is required")]
    ZeroVector,

    /// A coefficient pattern was empty where entries are required.
    #[error("empty coefficient pattern")]
    EmptyPattern,

    /// A supplied pattern does not fit the block it was paired with.
    #[error("pattern does not match block layout: {0}")]
    PatternMismatch(String),

    /// A quantity left the dynamic range of `f64` during materialization.
    #[error("value with log-magnitude {log_magnitude} exceeds f64 range")]
    FloatRangeExceeded { log_magnitude: f64 },

    /// An enumeration/search (target lookup, grid demo) ran past its cap.
    #[error("search budget exceeded: {0}")]
    SearchBudgetExceeded(String),

    /// A schedule step was proven unable to terminate.
    #[error("schedule stalled: {0}")]
    Stalled(Box<StallCertificate>),

    /// The configured density makes the step-termination series converge,
    /// so the step provably (or by partial-sum growth analysis) never ends.
    #[error("termination series converges under density {density}: {detail}")]
    DivergenceViolated { density: String, detail: String },

    /// Interval phase arithmetic could not certify a rotation margin; the
    /// caller should retry at higher precision.
    #[error("phase enclosure too wide to certify margin: {0}")]
    PhaseUncertain(String),

    /// Invalid user-facing input (CLI argument, config value).
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
