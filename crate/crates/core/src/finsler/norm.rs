use serde::Serialize;

use crate::error::{DkitError, Result};
use crate::geom::Vector;
use crate::scalar::Scalar;

/// Largest admissible Randers drift.
pub const MAX_DRIFT: f64 = 0.3;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NormKind<T> {
    /// `F(y) = sqrt(y_t^2 - y_x^2)`
    Minkowski,
    /// `F(y) = sqrt(y_t^2 - y_x^2) - b y_x`
    Randers { drift: T },
}

/// An `x`-independent Lorentz-Finsler fundamental function on the plane.
///
/// The future cone is `{y_t > |y_x|, F(y) > 0}`; `F` is extended by zero
/// outside it. `L = -F^2 / 2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FinslerNorm<T> {
    pub kind: NormKind<T>,
}

impl<T: Scalar> FinslerNorm<T> {
    pub fn minkowski() -> Self {
        Self {
            kind: NormKind::Minkowski,
        }
    }

    pub fn randers(drift: T) -> Result<Self> {
        if !(drift.abs() <= T::lit(MAX_DRIFT)) {
            return Err(DkitError::Input(format!(
                "Randers drift {drift} outside [-{MAX_DRIFT}, {MAX_DRIFT}]"
            )));
        }
        Ok(Self {
            kind: NormKind::Randers { drift },
        })
    }

    pub fn drift(&self) -> T {
        match self.kind {
            NormKind::Minkowski => T::zero(),
            NormKind::Randers { drift } => drift,
        }
    }

    pub fn is_quadratic(&self) -> bool {
        self.drift() == T::zero()
    }

    /// Unclipped formula value; meaningful only inside the light cone.
    fn raw(&self, y: Vector<T>) -> T {
        let q = (y.t * y.t - y.x * y.x).max(T::zero());
        q.sqrt() - self.drift() * y.x
    }

    /// `F(y)`, zero outside the open future cone.
    pub fn evaluate(&self, y: Vector<T>) -> T {
        if self.in_cone(y) {
            self.raw(y)
        } else {
            T::zero()
        }
    }

    pub fn lagrangian(&self, y: Vector<T>) -> T {
        let f = self.evaluate(y);
        -f * f / T::lit(2.0)
    }

    /// Open future cone.
    pub fn in_cone(&self, y: Vector<T>) -> bool {
        y.t > y.x.abs() && self.raw(y) > T::zero()
    }

    /// Closed future cone (including the zero vector), with `eps` slack on
    /// the boundary.
    pub fn in_closed_cone(&self, y: Vector<T>, eps: T) -> bool {
        if y.t.abs() <= eps && y.x.abs() <= eps {
            return true;
        }
        if y.t < y.x.abs() - eps || y.t < T::zero() {
            return false;
        }
        self.raw(y) >= -eps
    }

    /// Closed-cone membership with the model's null tolerance, returning
    /// `F` when the displacement is causal.
    pub fn causal_value(&self, y: Vector<T>, eps: T) -> Option<T> {
        if !self.in_closed_cone(y, eps) {
            return None;
        }
        // Near-null displacements are snapped to zero length.
        if y.t - y.x.abs() <= eps {
            return Some(T::zero());
        }
        Some(self.raw(y).max(T::zero()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn closed_form_values() {
        let m = FinslerNorm::<f64>::minkowski();
        assert!((m.evaluate(Vector::from_f64(3.0, 1.0)) - 8f64.sqrt()).abs() < 1e-15);
        assert_eq!(m.evaluate(Vector::from_f64(1.0, 1.0)), 0.0);
        let r = FinslerNorm::<f64>::randers(0.1).unwrap();
        let want = 0.91f64.sqrt() - 0.03;
        assert!((r.evaluate(Vector::from_f64(1.0, 0.3)) - want).abs() < 1e-15);
        assert!((r.lagrangian(Vector::from_f64(1.0, 0.3)) + want * want / 2.0).abs() < 1e-15);
    }

    #[test]
    fn drift_bound_enforced() {
        assert!(FinslerNorm::<f64>::randers(0.31).is_err());
        assert!(FinslerNorm::<f64>::randers(-0.3).is_ok());
    }

    #[test]
    fn zero_on_and_outside_boundary() {
        let r = FinslerNorm::<f64>::randers(0.2).unwrap();
        for y in [(1.0, 1.0), (1.0, -1.0), (0.3, 1.0), (-1.0, 0.0), (0.0, 0.0)] {
            assert_eq!(r.evaluate(Vector::from_f64(y.0, y.1)), 0.0);
        }
        // Drift side: F vanishes where sqrt(y_t^2 - y_x^2) = b y_x.
        let edge = Vector::from_f64((1.0f64 + 0.04).sqrt(), 1.0);
        assert!(r.evaluate(edge).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn positively_homogeneous(b in -0.3f64..0.3, s in 0.01f64..50.0, ang in -0.9f64..0.9, len in 0.1f64..3.0) {
            let n = FinslerNorm::randers(b).unwrap();
            let y = Vector::from_f64(len, len * ang);
            let lhs = n.evaluate(y * s);
            let rhs = s * n.evaluate(y);
            prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + rhs.abs()));
        }

        #[test]
        fn positive_inside_cone(b in -0.3f64..0.3, ang in -0.69f64..0.69) {
            // |y_x / y_t| < 0.7 keeps every admissible drift away from the F = 0 boundary.
            let n = FinslerNorm::randers(b).unwrap();
            prop_assert!(n.evaluate(Vector::from_f64(1.0, ang)) > 0.0);
        }

        #[test]
        fn reverse_triangle_on_cone(b in -0.3f64..0.3, a1 in -0.6f64..0.6, a2 in -0.6f64..0.6, l1 in 0.1f64..2.0, l2 in 0.1f64..2.0) {
            let n = FinslerNorm::randers(b).unwrap();
            let y1 = Vector::from_f64(l1, l1 * a1);
            let y2 = Vector::from_f64(l2, l2 * a2);
            prop_assert!(n.evaluate(y1 + y2) + 1e-12 >= n.evaluate(y1) + n.evaluate(y2));
        }
    }
}
