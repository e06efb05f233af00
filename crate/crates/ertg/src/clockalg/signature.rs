use num::traits::{One, Zero};

use crate::rat::Rat;

use super::{ClockError, ClockValuation};

/// The fractional signature of a valuation: `(f_0, …, f_m)` with `f_0 = 0`,
/// strictly increasing, collecting every distinct nonzero fractional part.
/// Shifting by `k` rotates the sequence so that `f_k` becomes the new zero;
/// the set of signatures reachable by shifts bounds the valuations the
/// boundary region abstraction can visit.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FracSignature {
    fracs: Vec<Rat>,
}

impl FracSignature {
    pub fn of(nu: &ClockValuation) -> FracSignature {
        let mut fracs = vec![Rat::zero()];
        for v in nu.values() {
            let f = v - v.floor();
            if !f.is_zero() && !fracs.contains(&f) {
                fracs.push(f);
            }
        }
        fracs.sort();
        FracSignature { fracs }
    }

    pub fn from_fracs(fracs: Vec<Rat>) -> FracSignature {
        assert!(!fracs.is_empty() && fracs[0].is_zero());
        debug_assert!(fracs.windows(2).all(|w| w[0] < w[1]));
        debug_assert!(fracs.iter().all(|f| *f < Rat::one()));
        FracSignature { fracs }
    }

    pub fn len(&self) -> usize {
        self.fracs.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn fracs(&self) -> &[Rat] {
        &self.fracs
    }

    /// Entry `i` of the `k`-shift is `frac(f_{i⊕k} + 1 − f_k)`, with `⊕`
    /// addition modulo the sequence length. The result is already in
    /// canonical increasing order.
    pub fn k_shift(&self, k: usize) -> Result<FracSignature, ClockError> {
        let m = self.fracs.len();
        if k >= m {
            return Err(ClockError::ShiftOutOfRange { k, len: m });
        }
        let fk = &self.fracs[k];
        let mut fracs = Vec::with_capacity(m);
        for i in 0..m {
            let fi = &self.fracs[(i + k) % m];
            let shifted = fi + Rat::one() - fk;
            let frac = &shifted - shifted.floor();
            fracs.push(frac);
        }
        debug_assert!(fracs[0].is_zero());
        debug_assert!(fracs.windows(2).all(|w| w[0] < w[1]));
        Ok(FracSignature { fracs })
    }

    /// `self` is a subsequence of `other`: every entry appears in `other`.
    pub fn subsequence_of(&self, other: &FracSignature) -> bool {
        self.fracs.iter().all(|f| other.fracs.contains(f))
    }
}
