//! Finite topologies on the subject points of a distance matrix.
//!
//! A topology on a finite set is determined by the minimal open
//! neighbourhood `U_x` of every point (the intersection of all subbasis sets
//! containing `x`): the opens are exactly the unions of these sets.

mod semicontinuity;

pub use semicontinuity::{
    continuity_surrogate, reflectivity_continuity_consistency, semicontinuity_probe, ConsistencyReport, ProbeFailure,
    ProbeReport, ProbeRow, SemiDirection, SurrogateReport, APPROACH_DIRECTIONS,
};

use std::collections::HashSet;
use std::sync::Arc;

use fixedbitset::FixedBitSet;
use serde::Serialize;

use crate::distance::{DistanceMatrix, ExtReal};
use crate::error::{DkitError, Result};
use crate::scalar::Scalar;

/// Default ceiling on the number of opens that will be materialized.
pub const DEFAULT_OPEN_CAP: usize = 1 << 20;

#[derive(Clone, Debug, PartialEq)]
pub struct FiniteTopology {
    ground: Arc<[String]>,
    subbasis: Vec<FixedBitSet>,
    minimal: Vec<FixedBitSet>,
}

#[derive(Clone, Debug, Serialize)]
pub struct HausdorffReport {
    pub hausdorff: bool,
    pub discrete: bool,
    /// The pair whose neighbourhoods overlap most, when not Hausdorff.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<(String, String)>,
    pub note: &'static str,
}

impl FiniteTopology {
    pub fn from_subbasis(ground: Arc<[String]>, subbasis: Vec<FixedBitSet>) -> Self {
        let n = ground.len();
        let mut full = FixedBitSet::with_capacity(n);
        full.insert_range(..);
        let mut minimal = vec![full; n];
        for s in &subbasis {
            for x in s.ones() {
                minimal[x].intersect_with(s);
            }
        }
        Self {
            ground,
            subbasis,
            minimal,
        }
    }

    pub fn discrete(ground: Arc<[String]>) -> Self {
        let n = ground.len();
        let subbasis = (0..n)
            .map(|i| {
                let mut s = FixedBitSet::with_capacity(n);
                s.insert(i);
                s
            })
            .collect();
        Self::from_subbasis(ground, subbasis)
    }

    pub fn indiscrete(ground: Arc<[String]>) -> Self {
        Self::from_subbasis(ground, Vec::new())
    }

    pub fn ground(&self) -> &Arc<[String]> {
        &self.ground
    }

    pub fn len(&self) -> usize {
        self.ground.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ground.is_empty()
    }

    pub fn subbasis(&self) -> &[FixedBitSet] {
        &self.subbasis
    }

    pub fn minimal_neighbourhood(&self, x: usize) -> &FixedBitSet {
        &self.minimal[x]
    }

    pub fn is_open(&self, set: &FixedBitSet) -> bool {
        set.ones().all(|x| self.minimal[x].is_subset(set))
    }

    pub fn is_discrete(&self) -> bool {
        self.minimal.iter().all(|u| u.count_ones(..) == 1)
    }

    /// All opens, sorted, or an error when there are more than `cap`.
    pub fn opens(&self, cap: usize) -> Result<Vec<FixedBitSet>> {
        let n = self.len();
        let mut seen: HashSet<FixedBitSet> = HashSet::new();
        seen.insert(FixedBitSet::with_capacity(n));
        let mut distinct: Vec<&FixedBitSet> = Vec::new();
        for u in &self.minimal {
            if !distinct.contains(&u) {
                distinct.push(u);
            }
        }
        for u in distinct {
            let current: Vec<FixedBitSet> = seen.iter().cloned().collect();
            for o in current {
                let mut v = o;
                v.union_with(u);
                seen.insert(v);
                if seen.len() > cap {
                    return Err(DkitError::TopologyTooLarge { ground: n, cap });
                }
            }
        }
        let mut out: Vec<FixedBitSet> = seen.into_iter().collect();
        out.sort_by(|a, b| {
            a.count_ones(..)
                .cmp(&b.count_ones(..))
                .then_with(|| a.ones().collect::<Vec<_>>().cmp(&b.ones().collect::<Vec<_>>()))
        });
        Ok(out)
    }

    /// Opens as sorted label lists.
    pub fn open_labels(&self, cap: usize) -> Result<Vec<Vec<String>>> {
        Ok(self
            .opens(cap)?
            .iter()
            .map(|o| {
                let mut v: Vec<String> = o.ones().map(|i| self.ground[i].clone()).collect();
                v.sort();
                v
            })
            .collect())
    }

    /// On a finite ground set a topology is Hausdorff exactly when it is
    /// discrete, so only minimal neighbourhoods are inspected.
    pub fn is_hausdorff(&self) -> HausdorffReport {
        let mut witness: Option<(usize, usize, usize)> = None;
        for x in 0..self.len() {
            for y in x + 1..self.len() {
                let overlap = self.minimal[x].intersection(&self.minimal[y]).count();
                if overlap > 0 && witness.is_none_or(|(_, _, o)| overlap > o) {
                    witness = Some((x, y, overlap));
                }
            }
        }
        let discrete = self.is_discrete();
        HausdorffReport {
            hausdorff: witness.is_none(),
            discrete,
            witness: witness.map(|(x, y, _)| (self.ground[x].clone(), self.ground[y].clone())),
            note: "finite ground set: Hausdorff is equivalent to discrete",
        }
    }

    /// Whether every open of `coarser` is open here.
    pub fn finer_than(&self, coarser: &FiniteTopology) -> Result<bool> {
        if self.ground != coarser.ground {
            return Err(DkitError::Input("topologies live on different ground sets".into()));
        }
        Ok((0..self.len()).all(|x| self.minimal[x].is_subset(&coarser.minimal[x])))
    }
}

fn ground_of<T: Scalar>(d: &DistanceMatrix<T>) -> (Vec<usize>, Arc<[String]>) {
    let subjects = d.subjects();
    let labels: Arc<[String]> = subjects
        .iter()
        .map(|&i| d.label(i).to_string())
        .collect::<Vec<_>>()
        .into();
    (subjects, labels)
}

/// Topology generated by the chronological diamonds of all sample corners,
/// restricted to the subject points.
pub fn alexandrov_topology<T: Scalar>(d: &DistanceMatrix<T>) -> FiniteTopology {
    let (subjects, labels) = ground_of(d);
    let m = subjects.len();
    let tol = d.tol();
    let n = d.len();
    // future[p] = subjects in I+(p), past[q] = subjects in I-(q)
    let mut future = vec![FixedBitSet::with_capacity(m); n];
    let mut past = vec![FixedBitSet::with_capacity(m); n];
    for (k, &r) in subjects.iter().enumerate() {
        for p in 0..n {
            if d.get(p, r).exceeds(tol) {
                future[p].insert(k);
            }
            if d.get(r, p).exceeds(tol) {
                past[p].insert(k);
            }
        }
    }
    let mut seen = HashSet::new();
    let mut subbasis = Vec::new();
    for fut in future.iter().filter(|f| !f.is_clear()) {
        for pst in &past {
            let mut dia = fut.clone();
            dia.intersect_with(pst);
            if !dia.is_clear() && seen.insert(dia.clone()) {
                subbasis.push(dia);
            }
        }
    }
    FiniteTopology::from_subbasis(labels, subbasis)
}

/// Classes of attained values: everything within `tol` of zero first, then
/// gaps wider than `tol` separate classes, and `+inf` is its own class.
/// Returns the class rank of every input value.
fn value_ranks<T: Scalar>(values: &[ExtReal<T>], tol: T) -> Vec<usize> {
    let mut finite: Vec<T> = values.iter().filter_map(|v| v.finite()).filter(|&v| v > tol).collect();
    finite.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut starts: Vec<T> = Vec::new();
    let mut last: Option<T> = None;
    for v in finite {
        if last.is_none_or(|l| v - l > tol) {
            starts.push(v);
        }
        last = Some(v);
    }
    values
        .iter()
        .map(|v| match v {
            ExtReal::Infinite => starts.len() + 1,
            ExtReal::Finite(x) if *x <= tol => 0,
            ExtReal::Finite(x) => starts.partition_point(|s| *s <= *x),
        })
        .collect()
}

/// Coarsest topology making every `d_p` and `d^p` continuous, with rays cut
/// midway between consecutive attained value classes.
pub fn initial_topology<T: Scalar>(d: &DistanceMatrix<T>) -> FiniteTopology {
    let (subjects, labels) = ground_of(d);
    let m = subjects.len();
    let tol = d.tol();
    let mut seen = HashSet::new();
    let mut subbasis = Vec::new();
    let mut push = |s: FixedBitSet| {
        if !s.is_clear() && s.count_ones(..) < m && seen.insert(s.clone()) {
            subbasis.push(s);
        }
    };
    for p in 0..d.len() {
        for column in [false, true] {
            let values: Vec<ExtReal<T>> = subjects
                .iter()
                .map(|&r| if column { d.get(r, p) } else { d.get(p, r) })
                .collect();
            let ranks = value_ranks(&values, tol);
            let mut classes: Vec<usize> = ranks.clone();
            classes.sort_unstable();
            classes.dedup();
            for w in classes.windows(2) {
                let (lo, hi) = (w[0], w[1]);
                let upper: FixedBitSet = (0..m).filter(|&k| ranks[k] >= hi).collect_set(m);
                let lower: FixedBitSet = (0..m).filter(|&k| ranks[k] <= lo).collect_set(m);
                push(upper);
                push(lower);
            }
        }
    }
    FiniteTopology::from_subbasis(labels, subbasis)
}

trait CollectSet {
    fn collect_set(self, len: usize) -> FixedBitSet;
}

impl<I: Iterator<Item = usize>> CollectSet for I {
    fn collect_set(self, len: usize) -> FixedBitSet {
        let mut s = FixedBitSet::with_capacity(len);
        s.extend(self);
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::causality::fixtures::Fixture;

    fn labels(n: usize) -> Arc<[String]> {
        (0..n).map(|i| format!("x{i}")).collect::<Vec<_>>().into()
    }

    #[test]
    fn chain3_alexandrov() {
        let d = Fixture::Chain3.matrix::<f64>();
        let t = alexandrov_topology(&d);
        let opens = t.open_labels(DEFAULT_OPEN_CAP).unwrap();
        let want: Vec<Vec<String>> = vec![vec![], vec!["b".into()], vec!["a".into(), "b".into(), "c".into()]];
        assert_eq!(opens, want);
        let h = t.is_hausdorff();
        assert!(!h.hausdorff);
        assert_eq!(h.witness, Some(("a".into(), "c".into())));
        assert!(!t.finer_than(&FiniteTopology::discrete(t.ground().clone())).unwrap());
        assert!(t.finer_than(&t).unwrap());
    }

    #[test]
    fn antichain_is_indiscrete() {
        let d = Fixture::Antichain3.matrix::<f64>();
        let t = alexandrov_topology(&d);
        assert_eq!(t.opens(16).unwrap().len(), 2);
        assert_eq!(initial_topology(&d).opens(16).unwrap().len(), 2);
    }

    #[test]
    fn chain4_middle_points_separated() {
        let d = DistanceMatrix::<f64>::from_rows(
            &["a", "b", "c", "e"],
            &[
                &[0.0, 1.0, 2.0, 3.0],
                &[0.0, 0.0, 1.0, 2.0],
                &[0.0, 0.0, 0.0, 1.0],
                &[0.0; 4],
            ],
        )
        .unwrap();
        let t = alexandrov_topology(&d);
        assert_eq!(t.minimal_neighbourhood(1).ones().collect::<Vec<_>>(), vec![1]);
        assert_eq!(t.minimal_neighbourhood(2).ones().collect::<Vec<_>>(), vec![2]);
        assert_eq!(t.minimal_neighbourhood(0).count_ones(..), 4);
        assert_eq!(t.minimal_neighbourhood(3).count_ones(..), 4);
    }

    #[test]
    fn hausdorff_basics() {
        assert!(FiniteTopology::discrete(labels(5)).is_hausdorff().hausdorff);
        assert!(!FiniteTopology::indiscrete(labels(2)).is_hausdorff().hausdorff);
    }

    #[test]
    fn opens_are_a_lattice() {
        for f in Fixture::ALL {
            let d = f.matrix::<f64>();
            for t in [alexandrov_topology(&d), initial_topology(&d)] {
                let opens = t.opens(DEFAULT_OPEN_CAP).unwrap();
                let set: HashSet<_> = opens.iter().cloned().collect();
                for a in &opens {
                    assert!(t.is_open(a));
                    for b in &opens {
                        let mut u = a.clone();
                        u.union_with(b);
                        let mut i = a.clone();
                        i.intersect_with(b);
                        assert!(set.contains(&u) && set.contains(&i));
                    }
                }
                // Regenerating from the opens gives the same topology.
                let again = FiniteTopology::from_subbasis(t.ground().clone(), opens.clone());
                assert_eq!(again.opens(DEFAULT_OPEN_CAP).unwrap(), opens);
                assert_eq!(t.is_hausdorff().hausdorff, t.is_discrete());
            }
            assert!(initial_topology(&d).finer_than(&alexandrov_topology(&d)).unwrap());
        }
    }

    #[test]
    fn open_cap_enforced() {
        let t = FiniteTopology::discrete(labels(20));
        assert!(matches!(t.opens(1000), Err(DkitError::TopologyTooLarge { .. })));
    }

    #[test]
    fn initial_topology_invariant_under_monotone_map() {
        let d = Fixture::F1.matrix::<f64>();
        let squeezed = d.map_finite(|x| x / (1.0 + x));
        assert_eq!(
            initial_topology(&d).opens(DEFAULT_OPEN_CAP).unwrap(),
            initial_topology(&squeezed).opens(DEFAULT_OPEN_CAP).unwrap()
        );
    }
}
