use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use num::traits::Zero;

use crate::rat::{self, Rat};

use super::ClockError;

/// Index of a clock within a [`Clocks`] declaration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ClockId(pub u32);

impl ClockId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// A clock declaration: the ordered clock names and the global bound `K`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Clocks {
    names: Vec<String>,
    bound: u32,
}

impl Clocks {
    pub fn new(names: Vec<String>, bound: u32) -> Arc<Self> {
        assert!(bound >= 1, "clock bound must be positive");
        Arc::new(Clocks { names, bound })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn bound(&self) -> u32 {
        self.bound
    }

    pub fn name(&self, c: ClockId) -> &str {
        &self.names[c.index()]
    }

    pub fn ids(&self) -> impl Iterator<Item = ClockId> {
        (0..self.names.len() as u32).map(ClockId)
    }

    pub fn lookup(&self, name: &str) -> Result<ClockId, ClockError> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| ClockId(i as u32))
            .ok_or_else(|| ClockError::UnknownClock(name.to_string()))
    }
}

/// A clock valuation: one rational in `[0, K]` per clock.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ClockValuation {
    bound: u32,
    vals: Vec<Rat>,
}

impl ClockValuation {
    pub fn new(vals: Vec<Rat>, bound: u32) -> Result<Self, ClockError> {
        for (i, v) in vals.iter().enumerate() {
            if !rat::is_nonneg(v) || *v > rat::int(bound as i64) {
                return Err(ClockError::ValueOutOfRange {
                    clock: format!("#{i}"),
                    value: rat::display(v),
                    bound,
                });
            }
        }
        Ok(ClockValuation { bound, vals })
    }

    /// The all-zero valuation.
    pub fn zero(n_clocks: usize, bound: u32) -> Self {
        ClockValuation {
            bound,
            vals: vec![Rat::zero(); n_clocks],
        }
    }

    pub fn bound(&self) -> u32 {
        self.bound
    }

    pub fn len(&self) -> usize {
        self.vals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vals.is_empty()
    }

    pub fn get(&self, c: ClockId) -> &Rat {
        &self.vals[c.index()]
    }

    pub fn values(&self) -> &[Rat] {
        &self.vals
    }

    /// `ν + t`. Fails if any clock would exceed the bound or `t < 0`.
    pub fn elapse(&self, t: &Rat) -> Result<Self, ClockError> {
        if !rat::is_nonneg(t) {
            return Err(ClockError::ValueOutOfRange {
                clock: "<delay>".into(),
                value: rat::display(t),
                bound: self.bound,
            });
        }
        let vals: Vec<Rat> = self.vals.iter().map(|v| v + t).collect();
        ClockValuation::new(vals, self.bound)
    }

    /// `ν_C`: the valuation with the clocks in `C` reset to zero.
    pub fn reset(&self, clocks: &BTreeSet<ClockId>) -> Self {
        let vals = self
            .vals
            .iter()
            .enumerate()
            .map(|(i, v)| {
                if clocks.contains(&ClockId(i as u32)) {
                    Rat::zero()
                } else {
                    v.clone()
                }
            })
            .collect();
        ClockValuation {
            bound: self.bound,
            vals,
        }
    }

    /// Max-norm distance between two valuations over the same clocks.
    pub fn sup_distance(&self, other: &Self) -> Result<Rat, ClockError> {
        if self.vals.len() != other.vals.len() {
            return Err(ClockError::MismatchedClocks {
                left: self.vals.len(),
                right: other.vals.len(),
            });
        }
        let mut best = Rat::zero();
        for (a, b) in self.vals.iter().zip(&other.vals) {
            let d = if a >= b { a - b } else { b - a };
            if d > best {
                best = d;
            }
        }
        Ok(best)
    }

    pub fn render(&self, clocks: &Clocks) -> String {
        let parts: Vec<String> = self
            .vals
            .iter()
            .enumerate()
            .map(|(i, v)| format!("{}={}", clocks.name(ClockId(i as u32)), rat::display(v)))
            .collect();
        parts.join(" ")
    }
}

impl fmt::Display for ClockValuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, v) in self.vals.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", rat::display(v))?;
        }
        write!(f, ")")
    }
}
