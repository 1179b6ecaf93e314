use std::sync::Arc;

use crate::error::{DkitError, Result};

/// A binary relation over the labels of a distance matrix, stored densely.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Relation {
    labels: Arc<[String]>,
    bits: Vec<bool>,
}

impl Relation {
    pub fn empty(labels: Arc<[String]>) -> Self {
        let n = labels.len();
        Self {
            labels,
            bits: vec![false; n * n],
        }
    }

    pub fn from_fn(labels: Arc<[String]>, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let n = labels.len();
        let mut bits = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                bits.push(f(i, j));
            }
        }
        Self { labels, bits }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &Arc<[String]> {
        &self.labels
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        self.bits[i * self.len() + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: bool) {
        let n = self.len();
        self.bits[i * n + j] = v;
    }

    /// Number of related ordered pairs.
    pub fn count(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }

    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.len();
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, b)| **b)
            .map(move |(k, _)| (k / n, k % n))
    }

    /// Related pairs as label pairs, in row-major order.
    pub fn edges(&self) -> Vec<(String, String)> {
        self.pairs()
            .map(|(i, j)| (self.labels[i].clone(), self.labels[j].clone()))
            .collect()
    }

    fn check_compatible(&self, other: &Relation) -> Result<()> {
        if self.labels != other.labels {
            return Err(DkitError::Input(
                "relations are defined over different label sets".into(),
            ));
        }
        Ok(())
    }

    pub fn is_subset_of(&self, other: &Relation) -> Result<bool> {
        self.check_compatible(other)?;
        Ok(self.bits.iter().zip(&other.bits).all(|(a, b)| !a || *b))
    }

    /// Pairs in `self` that are missing from `other`.
    pub fn difference(&self, other: &Relation) -> Result<Vec<(usize, usize)>> {
        self.check_compatible(other)?;
        Ok(self.pairs().filter(|&(i, j)| !other.get(i, j)).collect())
    }

    pub fn intersection(&self, other: &Relation) -> Result<Relation> {
        self.check_compatible(other)?;
        Ok(Relation {
            labels: self.labels.clone(),
            bits: self.bits.iter().zip(&other.bits).map(|(a, b)| *a && *b).collect(),
        })
    }

    pub fn is_reflexive(&self) -> bool {
        (0..self.len()).all(|i| self.get(i, i))
    }

    pub fn is_irreflexive(&self) -> bool {
        (0..self.len()).all(|i| !self.get(i, i))
    }

    /// First `(i, j, k)` with `i R j`, `j R k` but not `i R k`.
    pub fn transitivity_violation(&self) -> Option<(usize, usize, usize)> {
        let n = self.len();
        for i in 0..n {
            for j in 0..n {
                if !self.get(i, j) {
                    continue;
                }
                for k in 0..n {
                    if self.get(j, k) && !self.get(i, k) {
                        return Some((i, j, k));
                    }
                }
            }
        }
        None
    }

    pub fn is_transitive(&self) -> bool {
        self.transitivity_violation().is_none()
    }

    /// First pair `i != j` of `subjects` related in both directions.
    pub fn antisymmetry_violation(&self, subjects: &[usize]) -> Option<(usize, usize)> {
        for (a, &i) in subjects.iter().enumerate() {
            for &j in &subjects[a + 1..] {
                if self.get(i, j) && self.get(j, i) {
                    return Some((i, j));
                }
            }
        }
        None
    }

    /// Image of the relation under an index map `f` into a relation over
    /// `target_labels`.
    pub fn push_forward(&self, f: &[usize], target_labels: Arc<[String]>) -> Relation {
        let mut out = Relation::empty(target_labels);
        for (i, j) in self.pairs() {
            out.set(f[i], f[j], true);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(n: usize) -> Arc<[String]> {
        (0..n).map(|i| format!("e{i}")).collect::<Vec<_>>().into()
    }

    #[test]
    fn order_properties() {
        let lt = Relation::from_fn(labels(4), |i, j| i < j);
        assert!(lt.is_transitive());
        assert!(lt.is_irreflexive());
        assert_eq!(lt.count(), 6);
        let le = Relation::from_fn(labels(4), |i, j| i <= j);
        assert!(lt.is_subset_of(&le).unwrap());
        assert!(!le.is_subset_of(&lt).unwrap());
        assert_eq!(le.difference(&lt).unwrap().len(), 4);
        assert!(le.antisymmetry_violation(&[0, 1, 2, 3]).is_none());
    }

    #[test]
    fn detects_non_transitive() {
        let r = Relation::from_fn(labels(3), |i, j| j == i + 1);
        assert_eq!(r.transitivity_violation(), Some((0, 1, 2)));
    }

    #[test]
    fn label_mismatch_is_an_error() {
        let a = Relation::empty(labels(2));
        let b = Relation::empty(labels(3));
        assert!(a.is_subset_of(&b).is_err());
    }
}
