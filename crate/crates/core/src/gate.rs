//! Verdict pipelines combining the individual checkers into a
//! three-valued global hyperbolicity verdict.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::causality::{
    column_below, distinction_report, reflectivity_report, relation_d, row_dominates, Witness, D_REFLECTIVITY,
    FUTURE_OR_PAST_D_DISTINCTION, WEAK_D_DISTINCTION,
};
use crate::distance::{check_reverse_triangle, chronology, DistanceMatrix, Relation};
use crate::error::Result;
use crate::models::SampleSpace;
use crate::scalar::Scalar;
use crate::topology::{alexandrov_topology, continuity_surrogate};

pub const FINITENESS: &str = "finiteness";
pub const CONTINUITY_SURROGATE: &str = "continuity_surrogate";
pub const DIAMOND_PRECOMPACTNESS: &str = "diamond_precompactness";
pub const ALEXANDROV_HAUSDORFF: &str = "alexandrov_hausdorff";

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum ConditionStatus {
    Pass,
    Fail { witness: Vec<String>, detail: String },
    NotApplicable { reason: String },
}

impl ConditionStatus {
    pub fn is_fail(&self) -> bool {
        matches!(self, ConditionStatus::Fail { .. })
    }

    fn na(reason: &str) -> Self {
        ConditionStatus::NotApplicable { reason: reason.into() }
    }

    fn from_witness(w: Option<&Witness>, detail: &str) -> Self {
        match w {
            None => ConditionStatus::Pass,
            Some(w) => {
                let mut witness = vec![w.pair.0.clone(), w.pair.1.clone()];
                witness.extend(w.third.clone());
                ConditionStatus::Fail {
                    witness,
                    detail: detail.into(),
                }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    ConsistentWithGh,
    Refuted { conditions: Vec<String> },
    Inconclusive { reason: String },
}

impl Verdict {
    pub fn label(&self) -> &'static str {
        match self {
            Verdict::ConsistentWithGh => "CONSISTENT_WITH_GH",
            Verdict::Refuted { .. } => "REFUTED",
            Verdict::Inconclusive { .. } => "INCONCLUSIVE",
        }
    }

    pub fn refutes(&self, condition: &str) -> bool {
        matches!(self, Verdict::Refuted { conditions } if conditions.iter().any(|c| c == condition))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GateVerdict {
    pub conditions: BTreeMap<String, ConditionStatus>,
    pub verdict: Verdict,
    #[serde(skip)]
    pub reconstructed_j: Relation,
}

/// Any failure refutes; otherwise all applicable conditions passed.
pub fn aggregate(conditions: &BTreeMap<String, ConditionStatus>) -> Verdict {
    let failed: Vec<String> = conditions
        .iter()
        .filter(|(_, s)| s.is_fail())
        .map(|(k, _)| k.clone())
        .collect();
    if !failed.is_empty() {
        Verdict::Refuted { conditions: failed }
    } else if conditions
        .values()
        .all(|s| matches!(s, ConditionStatus::NotApplicable { .. }))
    {
        Verdict::Inconclusive {
            reason: "no applicable condition".into(),
        }
    } else {
        Verdict::ConsistentWithGh
    }
}

/// What a gate is run on: a model-backed sample or a bare matrix.
#[derive(Clone, Copy)]
pub enum GateInput<'a, T: Scalar> {
    Sample(&'a SampleSpace<T>),
    Matrix(&'a DistanceMatrix<T>),
}

impl<'a, T: Scalar> GateInput<'a, T> {
    pub fn matrix(&self) -> &'a DistanceMatrix<T> {
        match self {
            GateInput::Sample(s) => &s.matrix,
            GateInput::Matrix(d) => d,
        }
    }
}

fn finiteness<T: Scalar>(d: &DistanceMatrix<T>) -> ConditionStatus {
    let n = d.len();
    for i in 0..n {
        for j in 0..n {
            if d.get(i, j).is_infinite() {
                return ConditionStatus::Fail {
                    witness: vec![d.label(i).into(), d.label(j).into()],
                    detail: "infinite distance".into(),
                };
            }
        }
    }
    ConditionStatus::Pass
}

fn precompactness<T: Scalar>(s: &SampleSpace<T>) -> Result<ConditionStatus> {
    let base = s.base_indices();
    for &i in &base {
        for &j in &base {
            let (p, q) = (s.coords(i), s.coords(j));
            if s.model.exact_i(p, q)? && !s.model.diamond_precompact(p, q)? {
                return Ok(ConditionStatus::Fail {
                    witness: vec![s.events[i].label.clone(), s.events[j].label.clone()],
                    detail: format!(
                        "closure of the diamond between ({}, {}) and ({}, {}) leaves the spacetime",
                        p.t, p.x, q.t, q.x
                    ),
                });
            }
        }
    }
    Ok(ConditionStatus::Pass)
}

fn hausdorff<T: Scalar>(d: &DistanceMatrix<T>) -> ConditionStatus {
    let h = alexandrov_topology(d).is_hausdorff();
    match h.witness {
        None => ConditionStatus::Pass,
        Some((a, b)) => ConditionStatus::Fail {
            witness: vec![a, b],
            detail: "points without disjoint neighbourhoods (finite ground: Hausdorff iff discrete)".into(),
        },
    }
}

/// Finiteness, the continuity and precompactness surrogates, and
/// future-or-past d-distinction, with `relation_d` as the reconstructed
/// causal relation.
pub fn thm_main_gate<T: Scalar>(input: GateInput<'_, T>) -> Result<GateVerdict> {
    let d = input.matrix();
    let mut c = BTreeMap::new();
    c.insert(FINITENESS.to_string(), finiteness(d));
    match input {
        GateInput::Sample(s) => {
            let surrogate = continuity_surrogate(s)?;
            let status = match (&surrogate.first_upper_failure, &surrogate.first_lower_failure) {
                (None, None) => ConditionStatus::Pass,
                (Some(f), _) | (None, Some(f)) => ConditionStatus::Fail {
                    witness: vec![f.p_ref.clone(), f.target.clone()],
                    detail: format!(
                        "{:?} semicontinuity gap {:.6} approaching along ({}, {}); {} upper and {} lower failures in {} probes",
                        f.direction, f.gap, f.approach.0, f.approach.1, surrogate.upper_failures,
                        surrogate.lower_failures, surrogate.probes_run
                    ),
                },
            };
            c.insert(CONTINUITY_SURROGATE.to_string(), status);
            c.insert(DIAMOND_PRECOMPACTNESS.to_string(), precompactness(s)?);
        }
        GateInput::Matrix(_) => {
            c.insert(
                CONTINUITY_SURROGATE.to_string(),
                ConditionStatus::na("no model: a finite space gives no continuity surrogate"),
            );
            c.insert(
                DIAMOND_PRECOMPACTNESS.to_string(),
                ConditionStatus::na("no model: every subset of a finite space is compact, so the check is vacuous"),
            );
        }
    }
    let dist = distinction_report(d);
    c.insert(
        WEAK_D_DISTINCTION.to_string(),
        ConditionStatus::from_witness(dist.witness(WEAK_D_DISTINCTION), "equal rows and columns"),
    );
    c.insert(
        FUTURE_OR_PAST_D_DISTINCTION.to_string(),
        ConditionStatus::from_witness(
            dist.witness(FUTURE_OR_PAST_D_DISTINCTION),
            "equal rows, and some pair with equal columns",
        ),
    );
    c.insert(
        D_REFLECTIVITY.to_string(),
        ConditionStatus::na("not a condition of this characterization"),
    );
    c.insert(
        ALEXANDROV_HAUSDORFF.to_string(),
        ConditionStatus::na("not a condition of this characterization"),
    );
    Ok(GateVerdict {
        verdict: aggregate(&c),
        conditions: c,
        reconstructed_j: relation_d(d),
    })
}

/// Hausdorffness of the Alexandrov topology plus precompactness of every
/// sampled diamond. Needs a model for the second part.
pub fn diamond_gate<T: Scalar>(input: GateInput<'_, T>) -> Result<GateVerdict> {
    let d = input.matrix();
    let mut c = BTreeMap::new();
    c.insert(ALEXANDROV_HAUSDORFF.to_string(), hausdorff(d));
    let verdict = match input {
        GateInput::Sample(s) => {
            c.insert(DIAMOND_PRECOMPACTNESS.to_string(), precompactness(s)?);
            aggregate(&c)
        }
        GateInput::Matrix(_) => {
            c.insert(
                DIAMOND_PRECOMPACTNESS.to_string(),
                ConditionStatus::na("no precompactness oracle"),
            );
            Verdict::Inconclusive {
                reason: "no precompactness oracle".into(),
            }
        }
    };
    Ok(GateVerdict {
        conditions: c,
        verdict,
        reconstructed_j: relation_d(d),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct AxiomReport {
    pub finiteness: bool,
    pub reverse_triangle: bool,
    pub reverse_triangle_violations: u64,
    pub weak_d_distinction: bool,
    /// Weak d-distinction over pairs of non-boundary points only.
    pub weak_d_distinction_off_boundary: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub undistinguished_pair: Option<(String, String)>,
    /// Subject points lying in no chronological diamond.
    pub boundary_points: Vec<String>,
    pub continuity: &'static str,
    pub compactness: &'static str,
    pub d_reflective: bool,
    /// Finiteness, reverse triangle and weak d-distinction away from the
    /// boundary; boundary points are only flagged.
    pub passed: bool,
}

/// Axioms of a Lorentzian metric space on a finite matrix.
pub fn lms_axiom_check<T: Scalar>(d: &DistanceMatrix<T>) -> AxiomReport {
    let finite = !finiteness(d).is_fail();
    let tri = check_reverse_triangle(d);
    let refl = reflectivity_report(d, None);
    let weak = refl.passed(WEAK_D_DISTINCTION).unwrap_or(false);
    let chron = chronology(d);
    let n = d.len();
    let (boundary, interior): (Vec<usize>, Vec<usize>) = d.subjects().into_iter().partition(|&r| {
        let has_past = (0..n).any(|p| chron.get(p, r));
        let has_future = (0..n).any(|q| chron.get(r, q));
        !(has_past && has_future)
    });
    let same = |p: usize, q: usize| {
        row_dominates(d, p, q) && row_dominates(d, q, p) && column_below(d, p, q) && column_below(d, q, p)
    };
    let undistinguished_pair = interior
        .iter()
        .enumerate()
        .find_map(|(a, &p)| interior[a + 1..].iter().find(|&&q| same(p, q)).map(|&q| (p, q)))
        .map(|(p, q)| (d.label(p).to_string(), d.label(q).to_string()));
    let off_boundary = undistinguished_pair.is_none();
    let boundary_points = boundary.into_iter().map(|r| d.label(r).to_string()).collect();
    AxiomReport {
        finiteness: finite,
        reverse_triangle: tri.passed(),
        reverse_triangle_violations: tri.violation_count,
        weak_d_distinction: weak,
        weak_d_distinction_off_boundary: off_boundary,
        undistinguished_pair,
        boundary_points,
        continuity: "trivially satisfied: finite ground with the discrete topology",
        compactness: "trivially satisfied: every subset of a finite set is compact",
        d_reflective: refl.passed(D_REFLECTIVITY).unwrap_or(false),
        passed: finite && tri.passed() && off_boundary,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ExcessReport {
    pub base_pairs: usize,
    pub exact_j_pairs: usize,
    /// Pairs of `exact_J` missing from the reconstruction.
    pub missing_pairs: usize,
    /// Reconstructed pairs outside `exact_J`.
    pub excess_pairs: usize,
    /// Excess pairs over the base pairs not in `exact_J`.
    pub excess_fraction: f64,
}

/// Compares `relation_d` with the model's causal relation on base events.
pub fn reconstruction_excess<T: Scalar>(sample: &SampleSpace<T>, reconstructed: &Relation) -> Result<ExcessReport> {
    let base = sample.base_indices();
    let mut r = ExcessReport {
        base_pairs: base.len() * base.len(),
        exact_j_pairs: 0,
        missing_pairs: 0,
        excess_pairs: 0,
        excess_fraction: 0.0,
    };
    for &i in &base {
        for &j in &base {
            let exact = sample.model.exact_j(sample.coords(i), sample.coords(j))?;
            let rec = reconstructed.get(i, j);
            r.exact_j_pairs += exact as usize;
            r.missing_pairs += (exact && !rec) as usize;
            r.excess_pairs += (!exact && rec) as usize;
        }
    }
    let outside = r.base_pairs - r.exact_j_pairs;
    r.excess_fraction = if outside == 0 {
        0.0
    } else {
        r.excess_pairs as f64 / outside as f64
    };
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::causality::fixtures::Fixture;

    #[test]
    fn aggregation_is_monotone() {
        let mut c = BTreeMap::new();
        c.insert("a".to_string(), ConditionStatus::Pass);
        c.insert("b".to_string(), ConditionStatus::na("x"));
        assert_eq!(aggregate(&c), Verdict::ConsistentWithGh);
        c.insert(
            "c".to_string(),
            ConditionStatus::Fail {
                witness: vec!["p".into()],
                detail: String::new(),
            },
        );
        assert!(aggregate(&c).refutes("c"));
    }

    #[test]
    fn chain3_diamond_gate_inconclusive() {
        let d = Fixture::Chain3.matrix::<f64>();
        let g = diamond_gate(GateInput::Matrix(&d)).unwrap();
        assert_eq!(g.verdict.label(), "INCONCLUSIVE");
        assert!(g.conditions[ALEXANDROV_HAUSDORFF].is_fail());
    }

    #[test]
    fn f1_axioms() {
        let r = lms_axiom_check(&Fixture::F1.matrix::<f64>());
        assert!(r.finiteness && r.reverse_triangle && r.weak_d_distinction && r.passed);
        assert_eq!(r.boundary_points, vec!["c".to_string(), "e".to_string()]);
    }

    #[test]
    fn matrix_only_main_gate_marks_surrogates() {
        let d = Fixture::Chain3.matrix::<f64>();
        let g = thm_main_gate(GateInput::Matrix(&d)).unwrap();
        assert!(matches!(
            g.conditions[DIAMOND_PRECOMPACTNESS],
            ConditionStatus::NotApplicable { .. }
        ));
        assert_eq!(g.verdict, Verdict::ConsistentWithGh);
    }
}
