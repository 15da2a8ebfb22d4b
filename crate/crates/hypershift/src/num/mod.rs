//! Certified numerics: intervals, log-magnitudes, harmonic sums.
//!
//! Everything downstream (schedules, orbit bounds, witnesses) computes
//! with enclosures from this module, so a claimed inequality is true of
//! the exact real quantities whenever the enclosure decides it.

pub mod f64i;
pub mod harmonic;
pub mod logmag;
pub mod real;

pub use f64i::F64I;
pub use harmonic::HarmonicProgression;
pub use logmag::{l1me, log_diff, log_norm, lse2, LogMag};
pub use real::{certify_with_ladder, float_ceil, float_floor, RReal};
