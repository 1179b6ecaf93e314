//! Two-dimensional coordinates `(t, x)` used for events and displacements.

use std::ops::{Add, Mul, Neg, Sub};

use serde::Serialize;

use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize)]
pub struct Point<T> {
    pub t: T,
    pub x: T,
}

/// Displacements share the representation of points.
pub type Vector<T> = Point<T>;

impl<T: Scalar> Point<T> {
    pub fn new(t: T, x: T) -> Self {
        Self { t, x }
    }

    pub fn from_f64(t: f64, x: f64) -> Self {
        Self::new(T::lit(t), T::lit(x))
    }

    pub fn norm(self) -> T {
        self.t.hypot(self.x)
    }

    pub fn is_finite(self) -> bool {
        self.t.is_finite() && self.x.is_finite()
    }

    /// Lorentz boost with the given rapidity, fixing the origin.
    pub fn boost(self, rapidity: T) -> Self {
        let (c, s) = (rapidity.cosh(), rapidity.sinh());
        Self::new(c * self.t + s * self.x, s * self.t + c * self.x)
    }
}

impl<T: Scalar> Add for Point<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.t + o.t, self.x + o.x)
    }
}

impl<T: Scalar> Sub for Point<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.t - o.t, self.x - o.x)
    }
}

impl<T: Scalar> Mul<T> for Point<T> {
    type Output = Self;
    fn mul(self, s: T) -> Self {
        Self::new(self.t * s, self.x * s)
    }
}

impl<T: Scalar> Neg for Point<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.t, -self.x)
    }
}

/// Axis-aligned coordinate box `[t_lo, t_hi] x [x_lo, x_hi]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CoordBox<T> {
    pub t: (T, T),
    pub x: (T, T),
}

impl<T: Scalar> CoordBox<T> {
    pub fn new(t: (T, T), x: (T, T)) -> Self {
        Self { t, x }
    }

    pub fn square(lo: f64, hi: f64) -> Self {
        Self::new((T::lit(lo), T::lit(hi)), (T::lit(lo), T::lit(hi)))
    }

    pub fn is_valid(&self) -> bool {
        self.t.0 < self.t.1 && self.x.0 < self.x.1 && self.t.0.is_finite() && self.x.1.is_finite()
    }

    pub fn contains(&self, p: Point<T>) -> bool {
        p.t >= self.t.0 && p.t <= self.t.1 && p.x >= self.x.0 && p.x <= self.x.1
    }

    pub fn contains_strictly(&self, p: Point<T>) -> bool {
        p.t > self.t.0 && p.t < self.t.1 && p.x > self.x.0 && p.x < self.x.1
    }

    pub fn area(&self) -> T {
        (self.t.1 - self.t.0) * (self.x.1 - self.x.0)
    }

    /// Largest side length, used as the coordinate scale.
    pub fn extent(&self) -> T {
        (self.t.1 - self.t.0).max(self.x.1 - self.x.0)
    }
}
