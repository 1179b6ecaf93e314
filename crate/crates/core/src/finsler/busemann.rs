use serde::Serialize;

use super::richardson::{halving_schedule, richardson};
use super::FinslerNorm;
use crate::distance::ExtReal;
use crate::error::{DkitError, Result};
use crate::geom::{Point, Vector};
use crate::models::DistanceField;
use crate::scalar::Scalar;

/// The translation-invariant distance `d(p, q) = F(q - p)` of a norm on
/// the whole plane.
#[derive(Clone, Copy, Debug)]
pub struct FlatField<T> {
    pub norm: FinslerNorm<T>,
}

impl<T: Scalar> DistanceField<T> for FlatField<T> {
    fn distance(&self, p: Point<T>, q: Point<T>) -> Result<ExtReal<T>> {
        Ok(ExtReal::Finite(self.norm.evaluate(q - p)))
    }

    fn contains(&self, p: Point<T>) -> bool {
        p.is_finite()
    }
}

/// `t_k = 0.1 / 2^k`, `k = 0..=10`.
pub fn default_schedule<T: Scalar>() -> Vec<T> {
    halving_schedule(T::lit(0.1), 11)
}

#[derive(Clone, Debug, Serialize)]
pub struct LimitEstimate<T: Scalar> {
    pub schedule: Vec<T>,
    /// The quantity whose `t -> 0` limit is taken, per schedule point.
    pub raw: Vec<T>,
    /// Richardson diagonal, per schedule point.
    pub extrapolated: Vec<T>,
    pub estimate: T,
    pub error_estimate: T,
    pub empirical_order: Option<T>,
}

fn curve<T: Scalar>(p: Point<T>, v: Vector<T>, a: Vector<T>, t: T) -> Point<T> {
    p + v * t + a * (t * t)
}

fn finite<T: Scalar>(e: ExtReal<T>) -> Result<T> {
    e.finite()
        .ok_or_else(|| DkitError::Input("distance along the test curve is infinite".into()))
}

fn limit<T: Scalar>(schedule: &[T], raw: Vec<T>) -> LimitEstimate<T> {
    let r = richardson(&raw);
    let extrapolated = r.tableau.iter().map(|row| *row.last().unwrap()).collect();
    LimitEstimate {
        schedule: schedule.to_vec(),
        raw,
        extrapolated,
        estimate: r.estimate,
        error_estimate: r.error_estimate,
        empirical_order: r.empirical_order,
    }
}

fn check_curve<T: Scalar, F: DistanceField<T> + ?Sized>(
    field: &F,
    p: Point<T>,
    v: Vector<T>,
    a: Vector<T>,
    schedule: &[T],
    margin: T,
) -> Result<()> {
    if v.norm() == T::zero() {
        return Err(DkitError::Input("tangent vector must be nonzero".into()));
    }
    for &t in schedule {
        for s in [t * (T::one() - margin), t * (T::one() + margin)] {
            let g = curve(p, v, a, s);
            if !field.contains(g) {
                return Err(DkitError::Input(format!(
                    "test curve leaves the domain at t = {s} (point ({}, {}))",
                    g.t, g.x
                )));
            }
        }
    }
    Ok(())
}

/// `F(v) = lim (1/t) d_p(gamma(t))` along `gamma(t) = p + t v + t^2 a`.
pub fn busemann_mayer_first<T: Scalar, F: DistanceField<T> + ?Sized>(
    field: &F,
    p: Point<T>,
    v: Vector<T>,
    a: Vector<T>,
    schedule: &[T],
) -> Result<LimitEstimate<T>> {
    check_curve(field, p, v, a, schedule, T::zero())?;
    let raw = schedule
        .iter()
        .map(|&t| Ok(finite(field.distance(p, curve(p, v, a, t))?)? / t))
        .collect::<Result<Vec<T>>>()?;
    Ok(limit(schedule, raw))
}

/// `F(v)^2 = 1/2 lim (1/t) d/dt d_p(gamma(t))^2`, with the derivative taken
/// by central differences of step `1e-5 t`.
pub fn busemann_mayer_second<T: Scalar, F: DistanceField<T> + ?Sized>(
    field: &F,
    p: Point<T>,
    v: Vector<T>,
    a: Vector<T>,
    schedule: &[T],
) -> Result<LimitEstimate<T>> {
    let rel = T::lit(1e-5);
    check_curve(field, p, v, a, schedule, rel)?;
    // Smooth-region check: d_p must stay positive under small tilts of v.
    let t0 = schedule.iter().copied().fold(T::zero(), T::max);
    let tilt = Vector::new(-v.x, v.t) * T::lit(1e-3);
    for w in [v, v + tilt, v - tilt] {
        if finite(field.distance(p, p + w * t0)?)? <= T::zero() {
            return Err(DkitError::Precondition(
                "the second formula needs v strictly inside the cone, where d_p is smooth; v is on or near the cone boundary"
                    .into(),
            ));
        }
    }
    let sq = |t: T| -> Result<T> {
        let d = finite(field.distance(p, curve(p, v, a, t))?)?;
        Ok(d * d)
    };
    let raw = schedule
        .iter()
        .map(|&t| {
            let h = rel * t;
            let deriv = (sq(t + h)? - sq(t - h)?) / (T::lit(2.0) * h);
            Ok(deriv / (T::lit(2.0) * t))
        })
        .collect::<Result<Vec<T>>>()?;
    Ok(limit(schedule, raw))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(t: f64, x: f64) -> Point<f64> {
        Point::new(t, x)
    }

    #[test]
    fn flat_minkowski_linear_curve_is_exact() {
        let f = FlatField {
            norm: FinslerNorm::minkowski(),
        };
        let e = busemann_mayer_first(&f, pt(0.0, 0.0), pt(1.0, 0.0), pt(0.0, 0.0), &default_schedule()).unwrap();
        assert!((e.estimate - 1.0).abs() < 1e-12);
        let e2 = busemann_mayer_second(&f, pt(0.0, 0.0), pt(1.0, 0.0), pt(0.0, 0.0), &default_schedule()).unwrap();
        assert!((e2.estimate - 1.0).abs() < 1e-6);
    }

    #[test]
    fn spacelike_tangent_gives_zero() {
        let f = FlatField {
            norm: FinslerNorm::minkowski(),
        };
        let e = busemann_mayer_first(&f, pt(0.0, 0.0), pt(0.3, 1.0), pt(0.0, 0.0), &default_schedule()).unwrap();
        assert_eq!(e.estimate, 0.0);
        assert!(matches!(
            busemann_mayer_second(&f, pt(0.0, 0.0), pt(1.0, 1.0), pt(0.0, 0.0), &default_schedule()),
            Err(DkitError::Precondition(_))
        ));
    }

    #[test]
    fn randers_curved_curve_recovered() {
        let f = FlatField {
            norm: FinslerNorm::randers(0.1).unwrap(),
        };
        let want = 0.91f64.sqrt() - 0.03;
        let e = busemann_mayer_first(&f, pt(0.0, 0.0), pt(1.0, 0.3), pt(0.0, 0.2), &default_schedule()).unwrap();
        assert!((e.estimate - want).abs() < 1e-3);
        // Without extrapolation the leading error is first order in t.
        let raw_err = (e.raw[10] - want).abs();
        assert!(raw_err > 0.0);
    }
}
