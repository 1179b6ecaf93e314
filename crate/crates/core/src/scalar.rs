//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating point scalar the toolkit is generic over (`f32` or `f64`).
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Sum
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + serde::Serialize
    + 'static
{
    /// Absolute tolerance for comparing distance values.
    fn default_tol() -> Self;

    /// Coordinate tolerance below which a displacement is treated as null
    /// (on the light cone) by the analytic models.
    fn null_eps() -> Self;

    /// Lossless-enough conversion from an `f64` literal.
    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("f64 literal representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f64 {
    fn default_tol() -> Self {
        1e-9
    }
    fn null_eps() -> Self {
        1e-12
    }
}

impl Scalar for f32 {
    fn default_tol() -> Self {
        1e-4
    }
    fn null_eps() -> Self {
        1e-5
    }
}
