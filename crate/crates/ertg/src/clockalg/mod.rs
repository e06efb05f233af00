//! Exact arithmetic over clock valuations, constraints, regions, and zones.
//!
//! Everything here works with a fixed finite clock set and a global integer
//! bound `K`: valuations assign each clock a rational in `[0, K]`, and all
//! constraint constants lie in `[0, K]`. Time elapse is "literal": a delay
//! that would push any clock above `K` is not allowed, so regions in which
//! some clock sits at `K` have no time successor.

mod constraint;
mod region;
mod signature;
mod valuation;
mod zone;

pub use constraint::{Atom, AtomLhs, ClockConstraint, Relation};
pub use region::Region;
pub use signature::FracSignature;
pub use valuation::{ClockId, ClockValuation, Clocks};
pub use zone::{zone_between, Zone};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ClockError {
    #[error("clock value {value} for `{clock}` outside [0, {bound}]")]
    ValueOutOfRange {
        clock: String,
        value: String,
        bound: u32,
    },
    #[error("mismatched clock sets ({left} vs {right} clocks)")]
    MismatchedClocks { left: usize, right: usize },
    #[error("constraint constant {constant} exceeds bound {bound}")]
    ConstantExceedsBound { constant: i64, bound: u32 },
    #[error("delay set is empty")]
    EmptyDelaySet,
    #[error("target region is not in the future of the source region")]
    NotInFuture,
    #[error("k-shift index {k} out of range (signature has {len} entries)")]
    ShiftOutOfRange { k: usize, len: usize },
    #[error("unknown clock `{0}`")]
    UnknownClock(String),
}
