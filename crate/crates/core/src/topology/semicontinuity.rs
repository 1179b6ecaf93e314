use rayon::prelude::*;
use serde::Serialize;

use crate::causality::{reflectivity_report, Witness, D_REFLECTIVITY};
use crate::distance::ExtReal;
use crate::error::{DkitError, Result};
use crate::geom::{Point, Vector};
use crate::models::{DistanceField, SampleSpace};
use crate::scalar::Scalar;

/// Coordinate directions along which sample targets are approached.
pub const APPROACH_DIRECTIONS: [(f64, f64); 4] = [(1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0)];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SemiDirection {
    Lower,
    Upper,
}

/// Radii `2^-k`, `k = 1..=12`.
pub fn default_radii<T: Scalar>() -> Vec<T> {
    (1..=12).map(|k| T::lit(0.5f64.powi(k))).collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct ProbeRow<T: Scalar> {
    pub k: usize,
    pub radius: T,
    /// `d(p_ref, x_k)`
    pub future_value: ExtReal<T>,
    /// `d(x_k, p_ref)`
    pub past_value: ExtReal<T>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ProbeReport<T: Scalar> {
    pub p_ref: Point<T>,
    pub target: Point<T>,
    pub approach: Vector<T>,
    pub rows: Vec<ProbeRow<T>>,
    pub target_future: ExtReal<T>,
    pub target_past: ExtReal<T>,
    /// Final excess of the sequence over the target value (upper) and of
    /// the target value over the sequence (lower), worst of the two
    /// functions. Infinite gaps are reported as `f64::INFINITY`.
    pub upper_gap: f64,
    pub lower_gap: f64,
    pub upper_pass: bool,
    pub lower_pass: bool,
}

impl<T: Scalar> ProbeReport<T> {
    pub fn passes(&self, dir: SemiDirection) -> bool {
        match dir {
            SemiDirection::Lower => self.lower_pass,
            SemiDirection::Upper => self.upper_pass,
        }
    }
}

fn excess<T: Scalar>(a: ExtReal<T>, b: ExtReal<T>) -> f64 {
    match (a, b) {
        (_, ExtReal::Infinite) => 0.0,
        (ExtReal::Infinite, ExtReal::Finite(_)) => f64::INFINITY,
        (ExtReal::Finite(x), ExtReal::Finite(y)) => (x - y).as_f64(),
    }
}

/// A gap fails when it is above tolerance at the end of the schedule and has
/// not at least halved over the last four radii; continuous functions with
/// square-root behaviour at null cones still shrink by a factor of four.
fn persistent(gaps: &[f64], tol: f64) -> bool {
    let Some(&last) = gaps.last() else { return false };
    if last <= tol {
        return false;
    }
    if last.is_infinite() || gaps.len() < 5 {
        return true;
    }
    last > 0.5 * gaps[gaps.len() - 5]
}

/// Evaluates `d(p_ref, .)` and `d(., p_ref)` along `target + r * approach`
/// for the given radii, skipping points outside the field's domain.
pub fn semicontinuity_probe<T: Scalar, F: DistanceField<T> + ?Sized>(
    field: &F,
    p_ref: Point<T>,
    target: Point<T>,
    approach: Vector<T>,
    radii: &[T],
    tol: T,
) -> Result<ProbeReport<T>> {
    let target_future = field.distance(p_ref, target)?;
    let target_past = field.distance(target, p_ref)?;
    let mut rows = Vec::with_capacity(radii.len());
    for (k, &r) in radii.iter().enumerate() {
        let x = target + approach * r;
        if !field.contains(x) {
            continue;
        }
        let row = ProbeRow {
            k: k + 1,
            radius: r,
            future_value: field.distance(p_ref, x)?,
            past_value: field.distance(x, p_ref)?,
        };
        if (x - target).norm() > r * T::lit(1.0 + 1e-9) * approach.norm() {
            return Err(DkitError::Input(
                "probe sequence does not converge to its target".into(),
            ));
        }
        rows.push(row);
    }
    let tol64 = tol.as_f64();
    let up_f: Vec<f64> = rows.iter().map(|r| excess(r.future_value, target_future)).collect();
    let up_p: Vec<f64> = rows.iter().map(|r| excess(r.past_value, target_past)).collect();
    let lo_f: Vec<f64> = rows.iter().map(|r| excess(target_future, r.future_value)).collect();
    let lo_p: Vec<f64> = rows.iter().map(|r| excess(target_past, r.past_value)).collect();
    let last = |g: &[f64]| g.last().copied().unwrap_or(0.0).max(0.0);
    Ok(ProbeReport {
        p_ref,
        target,
        approach,
        upper_gap: last(&up_f).max(last(&up_p)),
        lower_gap: last(&lo_f).max(last(&lo_p)),
        upper_pass: !persistent(&up_f, tol64) && !persistent(&up_p, tol64),
        lower_pass: !persistent(&lo_f, tol64) && !persistent(&lo_p, tol64),
        rows,
        target_future,
        target_past,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ProbeFailure {
    pub p_ref: String,
    pub target: String,
    pub approach: (f64, f64),
    pub direction: SemiDirection,
    pub gap: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SurrogateReport {
    pub probes_run: usize,
    pub upper_failures: usize,
    pub lower_failures: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_upper_failure: Option<ProbeFailure>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_lower_failure: Option<ProbeFailure>,
}

impl SurrogateReport {
    pub fn all_pass(&self) -> bool {
        self.upper_failures == 0 && self.lower_failures == 0
    }
}

/// Runs the probes for every ordered pair of base events of the sample and
/// every approach direction.
pub fn continuity_surrogate<T: Scalar>(sample: &SampleSpace<T>) -> Result<SurrogateReport> {
    let base = sample.base_indices();
    let radii = default_radii::<T>();
    let tol = sample.matrix.tol();
    let per_ref: Result<Vec<SurrogateReport>> = base
        .par_iter()
        .map(|&i| {
            let mut rep = SurrogateReport {
                probes_run: 0,
                upper_failures: 0,
                lower_failures: 0,
                first_upper_failure: None,
                first_lower_failure: None,
            };
            for &j in &base {
                if i == j {
                    continue;
                }
                for (dt, dx) in APPROACH_DIRECTIONS {
                    let dir = Vector::from_f64(dt, dx);
                    let pr = semicontinuity_probe(&sample.model, sample.coords(i), sample.coords(j), dir, &radii, tol)?;
                    rep.probes_run += 1;
                    let fail = |direction, gap| ProbeFailure {
                        p_ref: sample.events[i].label.clone(),
                        target: sample.events[j].label.clone(),
                        approach: (dt, dx),
                        direction,
                        gap,
                    };
                    if !pr.upper_pass {
                        rep.upper_failures += 1;
                        rep.first_upper_failure
                            .get_or_insert_with(|| fail(SemiDirection::Upper, pr.upper_gap));
                    }
                    if !pr.lower_pass {
                        rep.lower_failures += 1;
                        rep.first_lower_failure
                            .get_or_insert_with(|| fail(SemiDirection::Lower, pr.lower_gap));
                    }
                }
            }
            Ok(rep)
        })
        .collect();
    let mut total = SurrogateReport {
        probes_run: 0,
        upper_failures: 0,
        lower_failures: 0,
        first_upper_failure: None,
        first_lower_failure: None,
    };
    for r in per_ref? {
        total.probes_run += r.probes_run;
        total.upper_failures += r.upper_failures;
        total.lower_failures += r.lower_failures;
        if total.first_upper_failure.is_none() {
            total.first_upper_failure = r.first_upper_failure;
        }
        if total.first_lower_failure.is_none() {
            total.first_lower_failure = r.first_lower_failure;
        }
    }
    Ok(total)
}

#[derive(Clone, Debug, Serialize)]
pub struct ConsistencyReport {
    pub probes: SurrogateReport,
    pub d_reflectivity: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reflectivity_witness: Option<Witness>,
    /// `(implication, holds)` rows.
    pub implications: Vec<(String, bool)>,
    pub consistent: bool,
}

/// Cross-checks the semicontinuity probes against d-reflectivity: passing
/// probes must come with reflectivity, and a reflectivity failure must show
/// up as a failing upper probe.
pub fn reflectivity_continuity_consistency<T: Scalar>(sample: &SampleSpace<T>) -> Result<ConsistencyReport> {
    if !sample.has_probes() {
        return Err(DkitError::Precondition(
            "consistency check needs a sample with probe points".into(),
        ));
    }
    let probes = continuity_surrogate(sample)?;
    let gt = sample.exact_i_relation()?;
    let refl = reflectivity_report(&sample.matrix, Some(&gt));
    let reflective = refl.passed(D_REFLECTIVITY).unwrap_or(false);
    let first = probes.all_pass() <= reflective;
    let second = reflective || probes.upper_failures > 0;
    Ok(ConsistencyReport {
        d_reflectivity: reflective,
        reflectivity_witness: refl.witness(D_REFLECTIVITY).cloned(),
        implications: vec![
            ("probes pass => d_reflectivity".into(), first),
            ("not d_reflectivity => some upper probe fails".into(), second),
        ],
        consistent: first && second,
        probes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::CoordBox;
    use crate::models::{ModelKind, SpacetimeModel};

    fn pt(t: f64, x: f64) -> Point<f64> {
        Point::new(t, x)
    }

    #[test]
    fn minkowski_is_continuous() {
        let m = SpacetimeModel::minkowski(CoordBox::square(-3.0, 3.0)).unwrap();
        let radii = default_radii();
        for (p, q) in [
            (pt(0.0, 0.0), pt(1.0, 1.0)),
            (pt(0.0, 0.0), pt(1.0, 0.2)),
            (pt(0.0, 0.0), pt(0.3, 1.0)),
        ] {
            for (dt, dx) in APPROACH_DIRECTIONS {
                let r = semicontinuity_probe(&m, p, q, Vector::from_f64(dt, dx), &radii, 1e-9).unwrap();
                assert!(
                    r.upper_pass && r.lower_pass,
                    "{p:?} {q:?} {dt} {dx}: {} {}",
                    r.upper_gap,
                    r.lower_gap
                );
            }
        }
    }

    #[test]
    fn slit_limits_differ_across_the_slit() {
        let m = SpacetimeModel::new(ModelKind::SlitMinkowski, CoordBox::square(-2.0, 2.0)).unwrap();
        let p = pt(-1.5, -0.5);
        let below = m.exact_d(p, pt(-1e-6, -0.5)).unwrap().finite().unwrap();
        let above = m.exact_d(p, pt(1e-6, -0.5)).unwrap().finite().unwrap();
        assert!((below - 1.5).abs() < 1e-5);
        assert_eq!(above, 0.0);
    }

    #[test]
    fn slit_upper_failure_near_tip_null_line() {
        let m = SpacetimeModel::new(ModelKind::SlitMinkowski, CoordBox::square(-2.0, 2.0)).unwrap();
        let r = semicontinuity_probe(
            &m,
            pt(-5.0 / 9.0, 1.0 / 9.0),
            pt(1.0 / 9.0, -1.0 / 9.0),
            Vector::from_f64(0.0, 1.0),
            &default_radii(),
            1e-9,
        )
        .unwrap();
        assert!(!r.upper_pass);
        assert!((r.upper_gap - 24f64.sqrt() / 9.0).abs() < 1e-2, "{}", r.upper_gap);
        assert!(r.lower_pass);
    }

    #[test]
    fn cylinder_passes_vacuously() {
        let m = SpacetimeModel::new(
            ModelKind::CtcCylinder { period: 1.0 },
            CoordBox::new((0.0, 1.0), (-1.0, 1.0)),
        )
        .unwrap();
        let r = semicontinuity_probe(
            &m,
            pt(0.5, 0.0),
            pt(0.5, 0.5),
            Vector::from_f64(1.0, 0.0),
            &default_radii(),
            1e-9,
        )
        .unwrap();
        assert!(r.upper_pass && r.lower_pass);
    }
}
