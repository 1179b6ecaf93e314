//! Extended reals, distance matrices, and the chronology relation `I = {d > 0}`.

mod ext_real;
mod matrix;
mod relation;

pub use ext_real::ExtReal;
pub use matrix::DistanceMatrix;
pub use relation::Relation;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::scalar::Scalar;

/// `{(p, q) : d(p, q) > tol or d(p, q) = +inf}`
pub fn chronology<T: Scalar>(d: &DistanceMatrix<T>) -> Relation {
    let tol = d.tol();
    Relation::from_fn(d.labels().clone(), |i, j| d.get(i, j).exceeds(tol))
}

/// Indices `r` with `d(p, r) > 0` and `d(r, q) > 0`.
pub fn diamond_indices<T: Scalar>(d: &DistanceMatrix<T>, p: usize, q: usize) -> Vec<usize> {
    let tol = d.tol();
    (0..d.len())
        .filter(|&r| d.get(p, r).exceeds(tol) && d.get(r, q).exceeds(tol))
        .collect()
}

/// The chronological diamond `I(p, q)` restricted to the sample, by label.
pub fn diamond<T: Scalar>(d: &DistanceMatrix<T>, p: &str, q: &str) -> Result<Vec<String>> {
    let (pi, qi) = (d.index_of(p)?, d.index_of(q)?);
    Ok(diamond_indices(d, pi, qi)
        .into_iter()
        .map(|r| d.label(r).to_string())
        .collect())
}

const MAX_REPORTED_VIOLATIONS: usize = 1000;

#[derive(Clone, Debug, Serialize)]
pub struct TriangleViolation {
    pub p: String,
    pub q: String,
    pub r: String,
    /// `d(p,q) + d(q,r) - d(p,r)`; infinite when only the left side is.
    pub excess: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ViolationReport {
    pub triples_checked: u64,
    pub violation_count: u64,
    /// The first violations in lexicographic `(p, q, r)` order, capped.
    pub violations: Vec<TriangleViolation>,
    pub tol: f64,
}

impl ViolationReport {
    pub fn passed(&self) -> bool {
        self.violation_count == 0
    }
}

type Triple = (usize, usize, usize, f64);

/// Scans every triple `p << q << r` for `d(p,r) + tol < d(p,q) + d(q,r)`.
pub fn check_reverse_triangle<T: Scalar>(d: &DistanceMatrix<T>) -> ViolationReport {
    let n = d.len();
    let tol = d.tol();
    let per_p: Vec<(u64, Vec<Triple>)> = (0..n)
        .into_par_iter()
        .map(|p| {
            let mut checked = 0u64;
            let mut found = Vec::new();
            for q in 0..n {
                let pq = d.get(p, q);
                if !pq.exceeds(tol) {
                    continue;
                }
                for r in 0..n {
                    let qr = d.get(q, r);
                    if !qr.exceeds(tol) {
                        continue;
                    }
                    checked += 1;
                    let pr = d.get(p, r);
                    let lhs = pq + qr;
                    if !lhs.approx_le(pr, tol) {
                        let excess = match (lhs, pr) {
                            (ExtReal::Finite(a), ExtReal::Finite(b)) => (a - b).as_f64(),
                            _ => f64::INFINITY,
                        };
                        found.push((p, q, r, excess));
                    }
                }
            }
            (checked, found)
        })
        .collect();
    let mut report = ViolationReport {
        triples_checked: 0,
        violation_count: 0,
        violations: Vec::new(),
        tol: tol.as_f64(),
    };
    for (checked, found) in per_p {
        report.triples_checked += checked;
        report.violation_count += found.len() as u64;
        for (p, q, r, excess) in found {
            if report.violations.len() < MAX_REPORTED_VIOLATIONS {
                report.violations.push(TriangleViolation {
                    p: d.label(p).into(),
                    q: d.label(q).into(),
                    r: d.label(r).into(),
                    excess,
                });
            }
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain3() -> DistanceMatrix<f64> {
        DistanceMatrix::from_rows(
            &["a", "b", "c"],
            &[&[0.0, 1.0, 2.0], &[0.0, 0.0, 1.0], &[0.0, 0.0, 0.0]],
        )
        .unwrap()
    }

    #[test]
    fn chronology_thresholds() {
        let m = DistanceMatrix::<f64>::from_rows(
            &["o", "p", "n", "c"],
            &[
                &[0.0, 8f64.sqrt(), 0.0, f64::INFINITY],
                &[0.0; 4],
                &[0.0, 0.0, 0.0, 5e-10],
                &[0.0; 4],
            ],
        )
        .unwrap();
        let i = chronology(&m);
        assert!(i.get(0, 1));
        assert!(!i.get(0, 2));
        assert!(i.get(0, 3));
        assert!(!i.get(2, 3), "below tolerance is not chronological");
    }

    #[test]
    fn chain_diamonds() {
        let m = chain3();
        assert_eq!(diamond(&m, "a", "c").unwrap(), vec!["b".to_string()]);
        assert!(diamond(&m, "a", "b").unwrap().is_empty());
        assert!(diamond(&m, "a", "zz").is_err());
    }

    #[test]
    fn diamond_equals_future_meet_past() {
        let m = chain3();
        let i = chronology(&m);
        for p in 0..3 {
            for q in 0..3 {
                let brute: Vec<usize> = (0..3).filter(|&r| i.get(p, r) && i.get(r, q)).collect();
                assert_eq!(diamond_indices(&m, p, q), brute);
            }
        }
    }

    #[test]
    fn reverse_triangle_cases() {
        let ok = DistanceMatrix::<f64>::from_rows(
            &["p", "q", "r"],
            &[&[0.0, 1.0, 8f64.sqrt()], &[0.0, 0.0, 3f64.sqrt()], &[0.0, 0.0, 0.0]],
        )
        .unwrap();
        assert!(check_reverse_triangle(&ok).passed());

        let bad = DistanceMatrix::<f64>::from_rows(
            &["a", "b", "c"],
            &[&[0.0, 1.0, 1.5], &[0.0, 0.0, 1.0], &[0.0, 0.0, 0.0]],
        )
        .unwrap();
        let rep = check_reverse_triangle(&bad);
        assert_eq!(rep.violation_count, 1);
        let v = &rep.violations[0];
        assert_eq!((v.p.as_str(), v.q.as_str(), v.r.as_str()), ("a", "b", "c"));
        assert!((v.excess - 0.5).abs() < 1e-12);
    }

    #[test]
    fn infinite_sum_against_finite_is_a_violation() {
        let m = DistanceMatrix::<f64>::from_rows(
            &["a", "b", "c"],
            &[&[0.0, f64::INFINITY, 3.0], &[0.0, 0.0, 1.0], &[0.0, 0.0, 0.0]],
        )
        .unwrap();
        let rep = check_reverse_triangle(&m);
        assert_eq!(rep.violation_count, 1);
        assert!(rep.violations[0].excess.is_infinite());
    }
}
