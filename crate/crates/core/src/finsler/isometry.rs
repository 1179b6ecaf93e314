use serde::Serialize;

use super::busemann::{busemann_mayer_first, default_schedule};
use crate::causality::relation_d;
use crate::distance::{chronology, DistanceMatrix, ExtReal};
use crate::error::{DkitError, Result};
use crate::geom::{Point, Vector};
use crate::models::DistanceField;
use crate::scalar::Scalar;
use crate::topology::alexandrov_topology;

/// Data for comparing norms on both sides of a linear map.
pub struct LinearStage<'a, T> {
    pub field: &'a dyn DistanceField<T>,
    pub image_field: &'a dyn DistanceField<T>,
    /// Row-major `(t, x)` matrix of the map.
    pub map: [[T; 2]; 2],
    pub base_point: Point<T>,
    pub directions: Vec<Vector<T>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct StructureStage {
    pub chronology: bool,
    pub relation_d: bool,
    pub alexandrov: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct NormStage {
    pub directions: usize,
    pub max_deviation: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct IsometryReport {
    pub max_deviation: f64,
    pub distance_preserving: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<(String, String)>,
    /// `d'(f p, f q) / d(p, q)` on the witness pair, when both are finite
    /// and `d(p, q) > 0`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness_ratio: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub structure: Option<StructureStage>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub norms: Option<NormStage>,
    pub passed: bool,
}

fn deviation<T: Scalar>(a: ExtReal<T>, b: ExtReal<T>) -> f64 {
    match (a, b) {
        (ExtReal::Infinite, ExtReal::Infinite) => 0.0,
        (ExtReal::Finite(x), ExtReal::Finite(y)) => (x - y).abs().as_f64(),
        _ => f64::INFINITY,
    }
}

/// Checks whether `f` (index `i` of `d` maps to index `f[i]` of `image`)
/// preserves distances, and if so whether it carries the derived causal and
/// topological structure along; optionally compares the recovered norms
/// across a linear map.
pub fn isometry_check<T: Scalar>(
    f: &[usize],
    d: &DistanceMatrix<T>,
    image: &DistanceMatrix<T>,
    linear: Option<&LinearStage<'_, T>>,
) -> Result<IsometryReport> {
    let n = d.len();
    let mut seen = vec![false; n];
    if f.len() != n || image.len() != n || f.iter().any(|&j| j >= n || std::mem::replace(&mut seen[j], true)) {
        return Err(DkitError::Input(
            "map is not a bijection between the two samples".into(),
        ));
    }
    let mut worst = (0.0f64, None);
    for p in 0..n {
        for q in 0..n {
            let dev = deviation(d.get(p, q), image.get(f[p], f[q]));
            if dev > worst.0 {
                worst = (dev, Some((p, q)));
            }
        }
    }
    let tol = d.tol().as_f64();
    let preserving = worst.0 <= tol;
    let witness_ratio = worst.1.and_then(|(p, q)| {
        let a = d.get(p, q).finite()?;
        let b = image.get(f[p], f[q]).finite()?;
        (a > T::zero()).then(|| (b / a).as_f64())
    });
    let mut report = IsometryReport {
        max_deviation: worst.0,
        distance_preserving: preserving,
        witness: if preserving {
            None
        } else {
            worst.1.map(|(p, q)| (d.label(p).to_string(), d.label(q).to_string()))
        },
        witness_ratio: if preserving { None } else { witness_ratio },
        structure: None,
        norms: None,
        passed: preserving,
    };
    if !preserving {
        return Ok(report);
    }
    let pushed =
        |a: &crate::Relation, b: &crate::Relation| (0..n).all(|p| (0..n).all(|q| a.get(p, q) == b.get(f[p], f[q])));
    let (ca, cb) = (chronology(d), chronology(image));
    let (da, db) = (relation_d(d), relation_d(image));
    let (ta, tb) = (alexandrov_topology(d), alexandrov_topology(image));
    // Topologies live on subject points; map subject positions across.
    let subj_a = d.subjects();
    let subj_b = image.subjects();
    let alexandrov = subj_a.len() == subj_b.len()
        && subj_a.iter().enumerate().all(|(ka, &pa)| {
            let Some(kb) = subj_b.iter().position(|&pb| pb == f[pa]) else {
                return false;
            };
            let mapped: Vec<usize> = ta
                .minimal_neighbourhood(ka)
                .ones()
                .filter_map(|k| subj_b.iter().position(|&pb| pb == f[subj_a[k]]))
                .collect();
            let mut want: Vec<usize> = tb.minimal_neighbourhood(kb).ones().collect();
            let mut got = mapped;
            got.sort_unstable();
            want.sort_unstable();
            got == want
        });
    let structure = StructureStage {
        chronology: pushed(&ca, &cb),
        relation_d: pushed(&da, &db),
        alexandrov,
    };
    report.passed = structure.chronology && structure.relation_d && structure.alexandrov;
    report.structure = Some(structure);
    if let Some(stage) = linear {
        let schedule = default_schedule::<T>();
        let zero = Vector::new(T::zero(), T::zero());
        let m = stage.map;
        let image_base = Point::new(
            m[0][0] * stage.base_point.t + m[0][1] * stage.base_point.x,
            m[1][0] * stage.base_point.t + m[1][1] * stage.base_point.x,
        );
        let mut max_dev = 0.0f64;
        for &v in &stage.directions {
            let fv = Vector::new(m[0][0] * v.t + m[0][1] * v.x, m[1][0] * v.t + m[1][1] * v.x);
            let a = busemann_mayer_first(stage.field, stage.base_point, v, zero, &schedule)?.estimate;
            let b = busemann_mayer_first(stage.image_field, image_base, fv, zero, &schedule)?.estimate;
            max_dev = max_dev.max((a - b).abs().as_f64());
        }
        let passed = max_dev <= 1e-9;
        report.passed &= passed;
        report.norms = Some(NormStage {
            directions: stage.directions.len(),
            max_deviation: max_dev,
            passed,
        });
    }
    Ok(report)
}
