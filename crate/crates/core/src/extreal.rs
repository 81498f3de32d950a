//! Reals extended by `+∞`.
//!
//! Perspective values and relative entropies live in `ℝ ∪ {+∞}`. `+∞` absorbs
//! addition and positive scaling; `0 · (+∞)` is rejected with
//! [`Error::ZeroTimesInfinity`] so that every caller has to resolve that case
//! explicitly (usually through the branch definition of the perspective).

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::Add;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtendedReal {
    Finite(f64),
    PosInf,
}

pub use ExtendedReal::PosInf;

impl ExtendedReal {
    pub const ZERO: ExtendedReal = ExtendedReal::Finite(0.0);

    /// Lifts an `f64`, mapping `f64::INFINITY` (e.g. an overflowed quotient) to `+∞`.
    ///
    /// Panics on NaN or `-∞`: neither belongs to the codomain.
    pub fn from_f64(x: f64) -> Self {
        assert!(!x.is_nan(), "NaN is not an extended real");
        assert!(x != f64::NEG_INFINITY, "-inf is not representable");
        if x == f64::INFINITY {
            PosInf
        } else {
            ExtendedReal::Finite(x)
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, ExtendedReal::Finite(_))
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, PosInf)
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            ExtendedReal::Finite(x) => Some(x),
            PosInf => None,
        }
    }

    /// `f64` view with `+∞` as `f64::INFINITY`.
    pub fn to_f64(self) -> f64 {
        match self {
            ExtendedReal::Finite(x) => x,
            PosInf => f64::INFINITY,
        }
    }

    /// `c · self` for `c ≥ 0`. `0 · (+∞)` is an error.
    pub fn scale(self, c: f64) -> Result<Self> {
        debug_assert!(c >= 0.0, "scale factor must be nonnegative");
        match self {
            ExtendedReal::Finite(x) => Ok(ExtendedReal::from_f64(c * x)),
            PosInf if c > 0.0 => Ok(PosInf),
            PosInf => Err(Error::ZeroTimesInfinity),
        }
    }

    /// `self − other` as an `f64` margin: `+∞ − finite = +∞`, `finite − +∞ = −∞`.
    ///
    /// Returns `None` for `+∞ − +∞`.
    pub fn margin_over(self, other: Self) -> Option<f64> {
        match (self, other) {
            (ExtendedReal::Finite(a), ExtendedReal::Finite(b)) => Some(a - b),
            (PosInf, ExtendedReal::Finite(_)) => Some(f64::INFINITY),
            (ExtendedReal::Finite(_), PosInf) => Some(f64::NEG_INFINITY),
            (PosInf, PosInf) => None,
        }
    }
}

impl Default for ExtendedReal {
    fn default() -> Self {
        ExtendedReal::ZERO
    }
}

impl From<f64> for ExtendedReal {
    fn from(x: f64) -> Self {
        ExtendedReal::from_f64(x)
    }
}

impl Add for ExtendedReal {
    type Output = ExtendedReal;

    fn add(self, rhs: Self) -> Self {
        match (self, rhs) {
            (ExtendedReal::Finite(a), ExtendedReal::Finite(b)) => ExtendedReal::from_f64(a + b),
            _ => PosInf,
        }
    }
}

impl Sum for ExtendedReal {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(ExtendedReal::ZERO, Add::add)
    }
}

impl Eq for ExtendedReal {}

impl PartialOrd for ExtendedReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExtendedReal {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (ExtendedReal::Finite(a), ExtendedReal::Finite(b)) => a.total_cmp(b),
            (ExtendedReal::Finite(_), PosInf) => Ordering::Less,
            (PosInf, ExtendedReal::Finite(_)) => Ordering::Greater,
            (PosInf, PosInf) => Ordering::Equal,
        }
    }
}

impl fmt::Display for ExtendedReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtendedReal::Finite(x) => write!(f, "{x}"),
            PosInf => write!(f, "inf"),
        }
    }
}
