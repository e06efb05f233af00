//! Exact rational arithmetic helpers.
//!
//! All model data (clock values, probabilities, delays) is kept as
//! arbitrary-precision rationals until a numeric stage explicitly converts
//! to `f64`. Region membership and abstraction finiteness are not robust
//! under floating point, so the exact representation is the default.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::traits::{Signed, ToPrimitive, Zero};

pub type Rat = BigRational;

/// Rational from an integer.
pub fn int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// Rational `p/q`. Panics on `q == 0`.
pub fn ratio(p: i64, q: i64) -> Rat {
    Rat::new(BigInt::from(p), BigInt::from(q))
}

pub fn is_nonneg(r: &Rat) -> bool {
    !r.is_negative()
}

/// Lossy conversion for the iterative solver stage.
pub fn to_f64(r: &Rat) -> f64 {
    r.to_f64().expect("rational out of f64 range")
}

/// Renders `p/q`, or just `p` for integers.
pub fn display(r: &Rat) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parses an exact rational from `p/q`, a decimal like `0.25`, or an integer.
pub fn parse(s: &str) -> Option<Rat> {
    let s = s.trim();
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().ok()?;
        let q: BigInt = q.trim().parse().ok()?;
        if q.is_zero() {
            return None;
        }
        return Some(Rat::new(p, q));
    }
    if let Some((whole, frac)) = s.split_once('.') {
        let neg = whole.trim_start().starts_with('-');
        let whole: BigInt = if whole.is_empty() || whole == "-" {
            BigInt::from(0)
        } else {
            whole.parse().ok()?
        };
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let digits: BigInt = frac.parse().ok()?;
        let scale = num::pow::pow(BigInt::from(10), frac.len());
        let frac_part = Rat::new(digits, scale);
        let whole_part = Rat::from_integer(whole);
        return Some(if neg {
            whole_part - frac_part
        } else {
            whole_part + frac_part
        });
    }
    let n: BigInt = s.parse().ok()?;
    Some(Rat::from_integer(n))
}

/// Integer floor of a non-negative rational.
pub fn floor_u32(r: &Rat) -> u32 {
    debug_assert!(is_nonneg(r));
    r.floor().to_integer().to_u32().expect("floor out of range")
}
