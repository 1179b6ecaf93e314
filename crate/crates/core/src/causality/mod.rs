//! Distinction and reflectivity predicates of a distance matrix, the
//! reconstructed causal relation, and the one-sided relations it splits into.
//!
//! Predicates quantify over subject points only; probe points still take
//! part in every row and column comparison.

pub mod fixtures;

use std::collections::BTreeMap;

use serde::Serialize;

use crate::distance::{chronology, DistanceMatrix, Relation};
use crate::scalar::Scalar;

pub const FUTURE_D_DISTINCTION: &str = "future_d_distinction";
pub const PAST_D_DISTINCTION: &str = "past_d_distinction";
pub const D_DISTINCTION: &str = "d_distinction";
pub const WEAK_D_DISTINCTION: &str = "weak_d_distinction";
pub const FUTURE_OR_PAST_D_DISTINCTION: &str = "future_or_past_d_distinction";
pub const FUTURE_D_REFLECTIVITY: &str = "future_d_reflectivity";
pub const PAST_D_REFLECTIVITY: &str = "past_d_reflectivity";
pub const D_REFLECTIVITY: &str = "d_reflectivity";
pub const STRONG_FUTURE_REFLECTIVITY: &str = "strong_future_reflectivity";
pub const STRONG_PAST_REFLECTIVITY: &str = "strong_past_reflectivity";
pub const CAUSAL_CONTINUITY: &str = "causal_continuity";

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub pair: (String, String),
    /// A point whose entries tell the pair apart, when there is one.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub third: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PredicateResult {
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
}

impl PredicateResult {
    fn pass() -> Self {
        Self {
            passed: true,
            witness: None,
        }
    }

    fn from_witness(w: Option<Witness>) -> Self {
        Self {
            passed: w.is_none(),
            witness: w,
        }
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct CausalityReport {
    pub predicates: BTreeMap<String, PredicateResult>,
    pub tol: f64,
    /// Which chronological relation the strong reflectivity checks used.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub i_source: Option<String>,
}

impl CausalityReport {
    pub fn passed(&self, name: &str) -> Option<bool> {
        self.predicates.get(name).map(|p| p.passed)
    }

    pub fn witness(&self, name: &str) -> Option<&Witness> {
        self.predicates.get(name).and_then(|p| p.witness.as_ref())
    }

    pub fn merge(mut self, other: CausalityReport) -> Self {
        self.predicates.extend(other.predicates);
        if other.i_source.is_some() {
            self.i_source = other.i_source;
        }
        self
    }

    /// Implications every report must satisfy; returns the broken ones.
    pub fn lattice_violations(&self) -> Vec<String> {
        let get = |k: &str| self.passed(k);
        let mut out = Vec::new();
        let mut implies = |a: &str, b: &str| {
            if let (Some(true), Some(false)) = (get(a), get(b)) {
                out.push(format!("{a} => {b}"));
            }
        };
        implies(D_DISTINCTION, FUTURE_OR_PAST_D_DISTINCTION);
        implies(FUTURE_OR_PAST_D_DISTINCTION, WEAK_D_DISTINCTION);
        implies(STRONG_FUTURE_REFLECTIVITY, FUTURE_D_REFLECTIVITY);
        implies(STRONG_PAST_REFLECTIVITY, PAST_D_REFLECTIVITY);
        let mut iff = |a: Option<bool>, b: Option<bool>, name: &str| {
            if let (Some(x), Some(y)) = (a, b) {
                if x != y {
                    out.push(name.to_string());
                }
            }
        };
        let and = |a: Option<bool>, b: Option<bool>| Some(a? && b?);
        iff(
            get(D_DISTINCTION),
            and(get(FUTURE_D_DISTINCTION), get(PAST_D_DISTINCTION)),
            "d_distinction <=> future and past",
        );
        iff(
            get(D_REFLECTIVITY),
            and(get(FUTURE_D_REFLECTIVITY), get(PAST_D_REFLECTIVITY)),
            "d_reflectivity <=> future and past",
        );
        iff(
            get(CAUSAL_CONTINUITY),
            and(get(WEAK_D_DISTINCTION), get(D_REFLECTIVITY)),
            "causal_continuity <=> weak_d_distinction and d_reflectivity",
        );
        out
    }
}

/// First column where `d(p, r) > d(q, r) + tol`, if any. `None` means
/// `d_p <= d_q` entrywise.
fn row_excess<T: Scalar>(d: &DistanceMatrix<T>, p: usize, q: usize) -> Option<usize> {
    let tol = d.tol();
    (0..d.len()).find(|&r| !d.get(p, r).approx_le(d.get(q, r), tol))
}

/// First row where `d(r, p) > d(r, q) + tol`, if any. `None` means
/// `d^p <= d^q` entrywise.
fn column_excess<T: Scalar>(d: &DistanceMatrix<T>, p: usize, q: usize) -> Option<usize> {
    let tol = d.tol();
    (0..d.len()).find(|&r| !d.get(r, p).approx_le(d.get(r, q), tol))
}

/// `d_p >= d_q` entrywise.
pub fn row_dominates<T: Scalar>(d: &DistanceMatrix<T>, p: usize, q: usize) -> bool {
    row_excess(d, q, p).is_none()
}

/// `d^p <= d^q` entrywise.
pub fn column_below<T: Scalar>(d: &DistanceMatrix<T>, p: usize, q: usize) -> bool {
    column_excess(d, p, q).is_none()
}

fn rows_equal<T: Scalar>(d: &DistanceMatrix<T>, p: usize, q: usize) -> bool {
    row_dominates(d, p, q) && row_dominates(d, q, p)
}

fn columns_equal<T: Scalar>(d: &DistanceMatrix<T>, p: usize, q: usize) -> bool {
    column_below(d, p, q) && column_below(d, q, p)
}

fn witness<T: Scalar>(d: &DistanceMatrix<T>, p: usize, q: usize, third: Option<usize>) -> Witness {
    Witness {
        pair: (d.label(p).to_string(), d.label(q).to_string()),
        third: third.map(|r| d.label(r).to_string()),
    }
}

/// First unordered subject pair `(p, q)`, `p < q`, satisfying `f`.
fn first_pair<T: Scalar>(d: &DistanceMatrix<T>, f: impl Fn(usize, usize) -> bool) -> Option<Witness> {
    let s = d.subjects();
    for (a, &p) in s.iter().enumerate() {
        for &q in &s[a + 1..] {
            if f(p, q) {
                return Some(witness(d, p, q, None));
            }
        }
    }
    None
}

/// First ordered subject pair `(p, q)`, `p != q`, for which `f` returns a
/// discriminating point.
fn first_ordered<T: Scalar>(
    d: &DistanceMatrix<T>,
    f: impl Fn(usize, usize) -> Option<Option<usize>>,
) -> Option<Witness> {
    let s = d.subjects();
    for &p in &s {
        for &q in &s {
            if p != q {
                if let Some(r) = f(p, q) {
                    return Some(witness(d, p, q, r));
                }
            }
        }
    }
    None
}

pub fn distinction_report<T: Scalar>(d: &DistanceMatrix<T>) -> CausalityReport {
    let future = first_pair(d, |p, q| rows_equal(d, p, q));
    let past = first_pair(d, |p, q| columns_equal(d, p, q));
    let weak = first_pair(d, |p, q| rows_equal(d, p, q) && columns_equal(d, p, q));
    let both = future.clone().or_else(|| past.clone());
    let either = if future.is_some() && past.is_some() {
        future.clone()
    } else {
        None
    };
    let mut predicates = BTreeMap::new();
    predicates.insert(FUTURE_D_DISTINCTION.into(), PredicateResult::from_witness(future));
    predicates.insert(PAST_D_DISTINCTION.into(), PredicateResult::from_witness(past));
    predicates.insert(WEAK_D_DISTINCTION.into(), PredicateResult::from_witness(weak));
    predicates.insert(D_DISTINCTION.into(), PredicateResult::from_witness(both));
    predicates.insert(
        FUTURE_OR_PAST_D_DISTINCTION.into(),
        PredicateResult::from_witness(either),
    );
    CausalityReport {
        predicates,
        tol: d.tol().as_f64(),
        i_source: None,
    }
}

/// Reflectivity variants. Strong variants use `ground_truth_i` when given,
/// otherwise `I = {d > tol}`. Causal continuity needs the weak distinction
/// verdict, so the distinction predicates are included.
pub fn reflectivity_report<T: Scalar>(d: &DistanceMatrix<T>, ground_truth_i: Option<&Relation>) -> CausalityReport {
    let computed;
    let (i_rel, i_source) = match ground_truth_i {
        Some(r) => (r, "ground_truth"),
        None => {
            computed = chronology(d);
            (&computed, "chronology(d > tol)")
        }
    };
    let n = d.len();
    let future = first_ordered(d, |p, q| {
        // d^p <= d^q  =>  d_q <= d_p
        if column_below(d, p, q) {
            row_excess(d, q, p).map(Some)
        } else {
            None
        }
    });
    let past = first_ordered(d, |p, q| {
        // d_q <= d_p  =>  d^p <= d^q
        if row_dominates(d, p, q) {
            column_excess(d, p, q).map(Some)
        } else {
            None
        }
    });
    let strong_past = first_ordered(d, |p, q| {
        // I+(p) contains I+(q)  =>  d^p <= d^q
        let contains = (0..n).all(|r| !i_rel.get(q, r) || i_rel.get(p, r));
        if contains {
            column_excess(d, p, q).map(Some)
        } else {
            None
        }
    });
    let strong_future = first_ordered(d, |p, q| {
        // I-(p) inside I-(q)  =>  d_q <= d_p
        let inside = (0..n).all(|r| !i_rel.get(r, p) || i_rel.get(r, q));
        if inside {
            row_excess(d, q, p).map(Some)
        } else {
            None
        }
    });
    let reflective = future.clone().or_else(|| past.clone());
    let distinction = distinction_report(d);
    let weak = distinction.predicates[WEAK_D_DISTINCTION].clone();
    let continuity = if weak.passed {
        reflective.clone()
    } else {
        weak.witness.clone()
    };
    let mut predicates = BTreeMap::new();
    predicates.insert(FUTURE_D_REFLECTIVITY.into(), PredicateResult::from_witness(future));
    predicates.insert(PAST_D_REFLECTIVITY.into(), PredicateResult::from_witness(past));
    predicates.insert(D_REFLECTIVITY.into(), PredicateResult::from_witness(reflective));
    predicates.insert(
        STRONG_FUTURE_REFLECTIVITY.into(),
        PredicateResult::from_witness(strong_future),
    );
    predicates.insert(
        STRONG_PAST_REFLECTIVITY.into(),
        PredicateResult::from_witness(strong_past),
    );
    predicates.insert(
        CAUSAL_CONTINUITY.into(),
        if weak.passed && continuity.is_none() {
            PredicateResult::pass()
        } else {
            PredicateResult {
                passed: false,
                witness: continuity,
            }
        },
    );
    let report = CausalityReport {
        predicates,
        tol: d.tol().as_f64(),
        i_source: Some(i_source.into()),
    };
    distinction.merge(report)
}

/// `D = {(p, q) : d_p >= d_q and d^p <= d^q}`.
pub fn relation_d<T: Scalar>(d: &DistanceMatrix<T>) -> Relation {
    Relation::from_fn(d.labels().clone(), |p, q| {
        row_dominates(d, p, q) && column_below(d, p, q)
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct Eq1Report {
    #[serde(skip)]
    pub r_future: Relation,
    #[serde(skip)]
    pub r_past: Relation,
    /// Equality over subject pairs.
    pub equal: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
}

/// The two one-sided relations `{d_p >= d_q}` and `{d^p <= d^q}`.
pub fn eq1_relations<T: Scalar>(d: &DistanceMatrix<T>) -> Eq1Report {
    let r_future = Relation::from_fn(d.labels().clone(), |p, q| row_dominates(d, p, q));
    let r_past = Relation::from_fn(d.labels().clone(), |p, q| column_below(d, p, q));
    let w = first_ordered(d, |p, q| (r_future.get(p, q) != r_past.get(p, q)).then_some(None));
    Eq1Report {
        r_future,
        r_past,
        equal: w.is_none(),
        witness: w,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct InclusionReport {
    pub pairs_checked: usize,
    /// `d_q <= d_p` but `I+(q)` not inside `I+(p)` on the sample. Never
    /// expected.
    pub exact_direction_failures: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact_witness: Option<Witness>,
    /// Sampled inclusion without the row comparison.
    pub surrogate_failures: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub surrogate_witness: Option<Witness>,
    pub surrogate_label: String,
}

/// Compares `I+(q) ∩ S ⊆ I+(p) ∩ S` (from the ground-truth relation) with
/// `d_q <= d_p` over all subject pairs.
pub fn inclusion_equivalence_check<T: Scalar>(d: &DistanceMatrix<T>, ground_truth_i: &Relation) -> InclusionReport {
    let n = d.len();
    let s = d.subjects();
    let mut report = InclusionReport {
        pairs_checked: 0,
        exact_direction_failures: 0,
        exact_witness: None,
        surrogate_failures: 0,
        surrogate_witness: None,
        surrogate_label: "sampling artifact".into(),
    };
    for &p in &s {
        for &q in &s {
            if p == q {
                continue;
            }
            report.pairs_checked += 1;
            let compared = row_dominates(d, p, q);
            let missing = (0..n).find(|&r| ground_truth_i.get(q, r) && !ground_truth_i.get(p, r));
            if compared && missing.is_some() {
                report.exact_direction_failures += 1;
                report.exact_witness.get_or_insert_with(|| witness(d, p, q, missing));
            }
            if missing.is_none() && !compared {
                report.surrogate_failures += 1;
                report
                    .surrogate_witness
                    .get_or_insert_with(|| witness(d, p, q, row_excess(d, q, p)));
            }
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::causality::fixtures::Fixture;

    fn chain3() -> DistanceMatrix<f64> {
        Fixture::Chain3.matrix()
    }

    #[test]
    fn f1_distinction() {
        let d = Fixture::F1.matrix::<f64>();
        let r = distinction_report(&d);
        assert_eq!(r.passed(FUTURE_D_DISTINCTION), Some(false));
        assert_eq!(r.witness(FUTURE_D_DISTINCTION).unwrap().pair, ("a".into(), "b".into()));
        assert_eq!(r.passed(PAST_D_DISTINCTION), Some(true));
        assert_eq!(r.passed(WEAK_D_DISTINCTION), Some(true));
        assert_eq!(r.passed(FUTURE_OR_PAST_D_DISTINCTION), Some(true));
        assert_eq!(r.passed(D_DISTINCTION), Some(false));
        assert!(r.lattice_violations().is_empty());
    }

    #[test]
    fn f1_relation_d() {
        let d = Fixture::F1.matrix::<f64>();
        let mut edges = relation_d(&d).edges();
        edges.retain(|(a, b)| a != b);
        edges.sort();
        let want: Vec<(String, String)> = [("a", "b"), ("a", "c"), ("b", "c"), ("e", "a"), ("e", "b"), ("e", "c")]
            .iter()
            .map(|(a, b)| (a.to_string(), b.to_string()))
            .collect();
        assert_eq!(edges, want);
        assert!(relation_d(&d).is_reflexive());
    }

    #[test]
    fn chain3_reflective() {
        let r = reflectivity_report(&chain3(), None);
        for k in [
            FUTURE_D_REFLECTIVITY,
            PAST_D_REFLECTIVITY,
            D_REFLECTIVITY,
            STRONG_FUTURE_REFLECTIVITY,
            STRONG_PAST_REFLECTIVITY,
            CAUSAL_CONTINUITY,
        ] {
            assert_eq!(r.passed(k), Some(true), "{k}");
        }
        assert_eq!(r.i_source.as_deref(), Some("chronology(d > tol)"));
        assert!(eq1_relations(&chain3()).equal);
    }

    #[test]
    fn infinite_rows_fail_all_distinction() {
        let d = DistanceMatrix::<f64>::from_fn(vec!["x".into(), "y".into(), "z".into()], |_, _| {
            crate::ExtReal::Infinite
        })
        .unwrap();
        let r = distinction_report(&d);
        for k in [FUTURE_D_DISTINCTION, PAST_D_DISTINCTION, WEAK_D_DISTINCTION] {
            assert_eq!(r.passed(k), Some(false));
        }
    }

    #[test]
    fn comparison_implies_inclusion() {
        let d = Fixture::F1.matrix::<f64>();
        let r = inclusion_equivalence_check(&d, &chronology(&d));
        assert_eq!(r.exact_direction_failures, 0);
        assert_eq!(r.pairs_checked, 12);
    }
}
