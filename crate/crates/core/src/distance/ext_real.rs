use std::cmp::Ordering;
use std::fmt;
use std::ops::Add;
use std::str::FromStr;

use serde::{Serialize, Serializer};

use crate::error::{DkitError, Result};
use crate::scalar::Scalar;

/// A value in `[0, +inf]`. Infinity is a symbolic state, never a large float.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ExtReal<T> {
    Finite(T),
    Infinite,
}

impl<T: Scalar> ExtReal<T> {
    pub fn zero() -> Self {
        ExtReal::Finite(T::zero())
    }

    /// Checked constructor: rejects negative and NaN values, maps `+inf` to
    /// [`ExtReal::Infinite`].
    pub fn new(v: T) -> Result<Self> {
        if v.is_nan() {
            return Err(DkitError::Input("distance value is NaN".into()));
        }
        if v.is_infinite() {
            return if v > T::zero() {
                Ok(ExtReal::Infinite)
            } else {
                Err(DkitError::Input("distance value is -inf".into()))
            };
        }
        if v < T::zero() {
            return Err(DkitError::Input(format!("negative distance value {v}")));
        }
        Ok(ExtReal::Finite(v))
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, ExtReal::Infinite)
    }

    pub fn finite(self) -> Option<T> {
        match self {
            ExtReal::Finite(v) => Some(v),
            ExtReal::Infinite => None,
        }
    }

    /// `+inf` maps to the float infinity of `T`.
    pub fn to_scalar(self) -> T {
        self.finite().unwrap_or_else(T::infinity)
    }

    /// Positive beyond the tolerance, or infinite.
    pub fn exceeds(self, tol: T) -> bool {
        match self {
            ExtReal::Finite(v) => v > tol,
            ExtReal::Infinite => true,
        }
    }

    pub fn approx_eq(self, other: Self, tol: T) -> bool {
        match (self, other) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => (a - b).abs() <= tol,
            (ExtReal::Infinite, ExtReal::Infinite) => true,
            _ => false,
        }
    }

    /// `self <= other` up to `tol`.
    pub fn approx_le(self, other: Self, tol: T) -> bool {
        match (self, other) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => a <= b + tol,
            (_, ExtReal::Infinite) => true,
            (ExtReal::Infinite, ExtReal::Finite(_)) => false,
        }
    }

    /// Absolute difference; `None` when exactly one side is infinite.
    pub fn abs_diff(self, other: Self) -> Option<T> {
        match (self, other) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => Some((a - b).abs()),
            (ExtReal::Infinite, ExtReal::Infinite) => Some(T::zero()),
            _ => None,
        }
    }

    pub fn map_finite(self, f: impl FnOnce(T) -> T) -> Self {
        match self {
            ExtReal::Finite(v) => ExtReal::Finite(f(v)),
            ExtReal::Infinite => ExtReal::Infinite,
        }
    }
}

impl<T: Scalar> Add for ExtReal<T> {
    type Output = Self;

    fn add(self, rhs: Self) -> Self {
        match (self, rhs) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => {
                let s = a + b;
                if s.is_infinite() {
                    ExtReal::Infinite
                } else {
                    ExtReal::Finite(s)
                }
            }
            _ => ExtReal::Infinite,
        }
    }
}

impl<T: Scalar> PartialOrd for ExtReal<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self, other) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => a.partial_cmp(b),
            (ExtReal::Infinite, ExtReal::Infinite) => Some(Ordering::Equal),
            (ExtReal::Infinite, _) => Some(Ordering::Greater),
            (_, ExtReal::Infinite) => Some(Ordering::Less),
        }
    }
}

impl<T: Scalar> From<T> for ExtReal<T> {
    /// Unchecked conversion; negative inputs are clamped to zero.
    fn from(v: T) -> Self {
        if v.is_infinite() && v > T::zero() {
            ExtReal::Infinite
        } else {
            ExtReal::Finite(v.max(T::zero()))
        }
    }
}

impl<T: Scalar> fmt::Display for ExtReal<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::Finite(v) => write!(f, "{v}"),
            ExtReal::Infinite => f.write_str("inf"),
        }
    }
}

impl<T: Scalar> FromStr for ExtReal<T> {
    type Err = DkitError;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("inf") || s == "+inf" {
            return Ok(ExtReal::Infinite);
        }
        let v: f64 = s
            .parse()
            .map_err(|_| DkitError::Input(format!("cannot parse distance value `{s}`")))?;
        ExtReal::new(T::lit(v))
    }
}

impl<T: Scalar> Serialize for ExtReal<T> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            ExtReal::Finite(v) => v.serialize(s),
            ExtReal::Infinite => s.serialize_str("inf"),
        }
    }
}
