//! Constructive schedules and certified verification for a single vector
//! that is hypercyclic for every scalar multiple `zB` (|z| > 1) of the
//! backward shift on the space of square-summable sequences.
//!
//! The crate builds the defining data of such a vector — a sparse sequence
//! of blocks with doubly-exponentially growing supports — and then
//! *verifies* it: for a given scalar `z` and target direction it finds an
//! iterate count `M` and certifies, with directed-rounding interval
//! arithmetic, that the orbit point `(zB)^M f` lies strictly within the
//! required distance of the target.  All claims are enclosure-based; no
//! comparison is ever decided by an uncertified float.

pub mod density;
pub mod error;
pub mod hvector;
pub mod num;
pub mod schedule;
pub mod targets;

pub use error::{Error, Result};
