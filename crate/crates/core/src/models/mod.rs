//! Analytic catalog of two-dimensional model spacetimes.
//!
//! Every model supplies an exact distance, independent chronology and
//! causality predicates, and a diamond precompactness test. Coordinates are
//! `(t, x)`; all domains are bounded coordinate boxes.

mod oracle;
mod sample;

pub use oracle::{verify_against_grid_oracle, verify_pairs, OracleOptions, OraclePair, OracleReport};
pub use sample::{Event, SampleMode, SampleSpace, SampleSpec};

use serde::Serialize;

use crate::distance::ExtReal;
use crate::error::{DkitError, Result};
use crate::finsler::FinslerNorm;
use crate::geom::{CoordBox, Point, Vector};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelKind<T> {
    Minkowski,
    /// Time is periodic; closed timelike curves make every distance infinite.
    CtcCylinder {
        period: T,
    },
    /// Minkowski with the half-line `{t = 0, x <= 0}` removed.
    SlitMinkowski,
    PuncturedMinkowski {
        removed: Point<T>,
    },
    FlatFinsler {
        norm: FinslerNorm<T>,
    },
}

/// Anything that can be queried for the distance between two coordinate
/// points.
pub trait DistanceField<T: Scalar> {
    fn distance(&self, p: Point<T>, q: Point<T>) -> Result<ExtReal<T>>;
    fn contains(&self, p: Point<T>) -> bool;
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SpacetimeModel<T> {
    pub kind: ModelKind<T>,
    pub domain: CoordBox<T>,
    #[serde(skip)]
    null_eps: T,
}

fn minkowski_value<T: Scalar>(y: Vector<T>, eps: T) -> T {
    let ax = y.x.abs();
    if y.t - ax > eps {
        ((y.t - ax) * (y.t + ax)).sqrt()
    } else {
        T::zero()
    }
}

impl<T: Scalar> SpacetimeModel<T> {
    pub fn new(kind: ModelKind<T>, domain: CoordBox<T>) -> Result<Self> {
        if !domain.is_valid() {
            return Err(DkitError::Input("model domain box is empty or unbounded".into()));
        }
        let zero = T::zero();
        match kind {
            ModelKind::CtcCylinder { period } if !(period > zero) => {
                return Err(DkitError::Input("cylinder period must be positive".into()));
            }
            ModelKind::SlitMinkowski if !domain.contains_strictly(Point::new(zero, zero)) => {
                return Err(DkitError::Input(
                    "slit model domain must contain the slit tip (0, 0) in its interior".into(),
                ));
            }
            ModelKind::PuncturedMinkowski { removed } if !domain.contains_strictly(removed) => {
                return Err(DkitError::Input("removed point must lie inside the domain".into()));
            }
            _ => {}
        }
        Ok(Self {
            kind,
            domain,
            null_eps: T::null_eps() * domain.extent().max(T::one()),
        })
    }

    pub fn minkowski(domain: CoordBox<T>) -> Result<Self> {
        Self::new(ModelKind::Minkowski, domain)
    }

    pub fn null_eps(&self) -> T {
        self.null_eps
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            ModelKind::Minkowski => "minkowski",
            ModelKind::CtcCylinder { .. } => "ctc_cylinder",
            ModelKind::SlitMinkowski => "slit_minkowski",
            ModelKind::PuncturedMinkowski { .. } => "punctured_minkowski",
            ModelKind::FlatFinsler { .. } => "flat_finsler",
        }
    }

    /// The cone norm used locally: Minkowski for every kind except the
    /// flat Finsler one.
    pub fn cone_norm(&self) -> FinslerNorm<T> {
        match self.kind {
            ModelKind::FlatFinsler { norm } => norm,
            _ => FinslerNorm::minkowski(),
        }
    }

    /// Inside the domain box and off every removed set.
    pub fn contains(&self, p: Point<T>) -> bool {
        if !p.is_finite() || !self.domain.contains(p) {
            return false;
        }
        let eps = self.null_eps;
        match self.kind {
            ModelKind::SlitMinkowski => !(p.t.abs() <= eps && p.x <= eps),
            ModelKind::PuncturedMinkowski { removed } => (p - removed).norm() > eps,
            _ => true,
        }
    }

    fn check(&self, p: Point<T>) -> Result<()> {
        if self.contains(p) {
            Ok(())
        } else {
            Err(DkitError::OutsideDomain {
                t: p.t.as_f64(),
                x: p.x.as_f64(),
            })
        }
    }

    /// Supremum of Lorentzian lengths of future causal curves from `p` to `q`.
    pub fn exact_d(&self, p: Point<T>, q: Point<T>) -> Result<ExtReal<T>> {
        self.check(p)?;
        self.check(q)?;
        let eps = self.null_eps;
        let y = q - p;
        let v = match self.kind {
            ModelKind::Minkowski | ModelKind::PuncturedMinkowski { .. } => minkowski_value(y, eps),
            ModelKind::CtcCylinder { .. } => return Ok(ExtReal::Infinite),
            ModelKind::FlatFinsler { norm } => {
                if y.t - y.x.abs() > eps && norm.evaluate(y) > eps {
                    norm.evaluate(y)
                } else {
                    T::zero()
                }
            }
            ModelKind::SlitMinkowski => self.slit_distance(p, q),
        };
        Ok(ExtReal::Finite(v))
    }

    /// Slit distance: the straight segment when it clears the slit,
    /// otherwise the best curve crossing `t = 0` at `x > 0`, which by
    /// concavity is broken at the tip.
    fn slit_distance(&self, p: Point<T>, q: Point<T>) -> T {
        let eps = self.null_eps;
        let zero = T::zero();
        let y = q - p;
        let straight = minkowski_value(y, eps);
        if straight == zero || !(p.t < zero && q.t > zero) {
            return straight;
        }
        let lo = (p.x + p.t).max(q.x - q.t).max(zero);
        let hi = (p.x - p.t).min(q.x + q.t);
        if hi - lo <= eps {
            return zero;
        }
        let crossing = p.x - p.t * y.x / y.t;
        if crossing > zero {
            straight
        } else {
            let leg1 = (p.t * p.t - p.x * p.x).max(zero).sqrt();
            let leg2 = (q.t * q.t - q.x * q.x).max(zero).sqrt();
            leg1 + leg2
        }
    }

    /// Chronology `p << q`, decided geometrically (not through `exact_d`).
    pub fn exact_i(&self, p: Point<T>, q: Point<T>) -> Result<bool> {
        self.check(p)?;
        self.check(q)?;
        let eps = self.null_eps;
        let zero = T::zero();
        let y = q - p;
        let timelike = y.t - y.x.abs() > eps;
        Ok(match self.kind {
            ModelKind::Minkowski | ModelKind::PuncturedMinkowski { .. } => timelike,
            ModelKind::CtcCylinder { .. } => true,
            ModelKind::FlatFinsler { norm } => {
                timelike && {
                    let ax = y.x.abs();
                    // sqrt(t^2 - x^2) > b x + eps, squared on the positive branch
                    let rhs = norm.drift() * y.x + eps;
                    rhs < zero || (y.t - ax) * (y.t + ax) > rhs * rhs
                }
            }
            ModelKind::SlitMinkowski => {
                if !timelike {
                    false
                } else if p.t < zero && q.t > zero {
                    let lo = (p.x + p.t).max(q.x - q.t).max(zero);
                    let hi = (p.x - p.t).min(q.x + q.t);
                    hi - lo > eps
                } else {
                    true
                }
            }
        })
    }

    /// Causality `p <= q` (reflexive).
    pub fn exact_j(&self, p: Point<T>, q: Point<T>) -> Result<bool> {
        self.check(p)?;
        self.check(q)?;
        let eps = self.null_eps;
        let zero = T::zero();
        let y = q - p;
        if y.t.abs() <= eps && y.x.abs() <= eps {
            return Ok(true);
        }
        let causal = y.t >= y.x.abs() - eps && y.t > zero;
        Ok(match self.kind {
            ModelKind::Minkowski => causal,
            ModelKind::CtcCylinder { .. } => true,
            ModelKind::FlatFinsler { norm } => norm.in_closed_cone(y, eps),
            ModelKind::PuncturedMinkowski { removed } => {
                if !causal {
                    false
                } else if y.t - y.x.abs() > eps {
                    true
                } else {
                    !segment_hits_point(p, q, removed, eps)
                }
            }
            ModelKind::SlitMinkowski => {
                if !causal {
                    false
                } else if p.t < zero && q.t > zero {
                    let lo = (p.x + p.t).max(q.x - q.t);
                    let hi = (p.x - p.t).min(q.x + q.t);
                    lo <= hi + eps && hi > zero
                } else {
                    true
                }
            }
        })
    }

    /// Whether the coordinate closure of the chronological diamond `I(p, q)`
    /// stays inside the domain and away from every removed set.
    pub fn diamond_precompact(&self, p: Point<T>, q: Point<T>) -> Result<bool> {
        if !self.exact_i(p, q)? {
            return Err(DkitError::Precondition(format!(
                "diamond_precompact needs p << q; ({}, {}) and ({}, {}) are not chronologically related",
                p.t, p.x, q.t, q.x
            )));
        }
        let eps = self.null_eps;
        let two = T::lit(2.0);
        let zero = T::zero();
        if let ModelKind::CtcCylinder { .. } = self.kind {
            // Every diamond is the whole spacetime.
            return Ok(false);
        }
        // Null coordinates of the closed coordinate diamond.
        let (up, vp) = (p.t + p.x, p.t - p.x);
        let (uq, vq) = (q.t + q.x, q.t - q.x);
        let left = Point::new((up + vq) / two, (up - vq) / two);
        let right = Point::new((uq + vp) / two, (uq - vp) / two);
        let inside = [p, q, left, right].iter().all(|c| self.domain.contains_strictly(*c));
        if !inside {
            return Ok(false);
        }
        Ok(match self.kind {
            ModelKind::PuncturedMinkowski { removed } => {
                let (ur, vr) = (removed.t + removed.x, removed.t - removed.x);
                !(ur >= up - eps && ur <= uq + eps && vr >= vp - eps && vr <= vq + eps)
            }
            ModelKind::SlitMinkowski => {
                // Only the tip can be a limit point of a slit diamond.
                !(p.t < zero && q.t > zero && (p.x + p.t).max(q.x - q.t) <= eps)
            }
            _ => true,
        })
    }

    /// Weight of the straight segment `u -> v` when it is future causal and
    /// avoids every removed set: the local norm of `v - u`.
    pub fn segment_weight(&self, u: Point<T>, v: Point<T>) -> Option<T> {
        let eps = self.null_eps;
        let zero = T::zero();
        let w = self.cone_norm().causal_value(v - u, eps)?;
        match self.kind {
            ModelKind::SlitMinkowski => {
                if u.t < zero && v.t > zero {
                    let y = v - u;
                    let crossing = u.x - u.t * y.x / y.t;
                    if crossing <= eps {
                        return None;
                    }
                }
            }
            ModelKind::PuncturedMinkowski { removed } if segment_hits_point(u, v, removed, eps) => {
                return None;
            }
            _ => {}
        }
        Some(w)
    }
}

impl<T: Scalar> DistanceField<T> for SpacetimeModel<T> {
    fn distance(&self, p: Point<T>, q: Point<T>) -> Result<ExtReal<T>> {
        self.exact_d(p, q)
    }

    fn contains(&self, p: Point<T>) -> bool {
        SpacetimeModel::contains(self, p)
    }
}

fn segment_hits_point<T: Scalar>(a: Point<T>, b: Point<T>, r: Point<T>, eps: T) -> bool {
    let ab = b - a;
    let ar = r - a;
    let len2 = ab.t * ab.t + ab.x * ab.x;
    if len2 == T::zero() {
        return ar.norm() <= eps;
    }
    let s = ((ar.t * ab.t + ar.x * ab.x) / len2).max(T::zero()).min(T::one());
    (a + ab * s - r).norm() <= eps
}
