//! Small hand-built matrices, each isolating a predicate failure. They ship
//! as CSV files under `fixtures/`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::distance::{DistanceMatrix, ExtReal};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Fixture {
    /// Rows of `a` and `b` coincide; their columns do not.
    F1,
    F1Transposed,
    Chain3,
    Antichain3,
    FutureReflectivityFailure,
    PastReflectivityFailure,
    /// d-reflective but neither strongly future nor strongly past reflective.
    StrongReflectivityFailure,
}

impl Fixture {
    pub const ALL: [Fixture; 7] = [
        Fixture::F1,
        Fixture::F1Transposed,
        Fixture::Chain3,
        Fixture::Antichain3,
        Fixture::FutureReflectivityFailure,
        Fixture::PastReflectivityFailure,
        Fixture::StrongReflectivityFailure,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Fixture::F1 => "f1",
            Fixture::F1Transposed => "f1_transposed",
            Fixture::Chain3 => "chain3",
            Fixture::Antichain3 => "antichain3",
            Fixture::FutureReflectivityFailure => "future_reflectivity_failure",
            Fixture::PastReflectivityFailure => "past_reflectivity_failure",
            Fixture::StrongReflectivityFailure => "strong_reflectivity_failure",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|f| f.name() == name)
    }

    pub fn csv(self) -> &'static str {
        match self {
            Fixture::F1 => include_str!("../../fixtures/f1.csv"),
            Fixture::F1Transposed => include_str!("../../fixtures/f1_transposed.csv"),
            Fixture::Chain3 => include_str!("../../fixtures/chain3.csv"),
            Fixture::Antichain3 => include_str!("../../fixtures/antichain3.csv"),
            Fixture::FutureReflectivityFailure => include_str!("../../fixtures/future_reflectivity_failure.csv"),
            Fixture::PastReflectivityFailure => include_str!("../../fixtures/past_reflectivity_failure.csv"),
            Fixture::StrongReflectivityFailure => include_str!("../../fixtures/strong_reflectivity_failure.csv"),
        }
    }

    pub fn matrix<T: Scalar>(self) -> DistanceMatrix<T> {
        DistanceMatrix::read_csv(self.csv().as_bytes()).expect("shipped fixture parses")
    }
}

/// Random matrix satisfying the reverse triangle inequality by construction.
///
/// A random DAG on `n` nodes gets integer edge weights in `1..=3`; `d(p, q)`
/// is the heaviest path weight from `p` to `q` (0 without a path). About one
/// node in five is then replaced by a copy of an earlier node, so
/// non-distinguishing pairs occur regularly. Values are integers, so no
/// comparison sits near the tolerance band.
pub fn random_longest_path_matrix<T: Scalar>(n: usize, edge_prob: f64, seed: u64) -> DistanceMatrix<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut w = vec![0u32; n * n];
    for i in 0..n {
        for j in i + 1..n {
            if rng.random_bool(edge_prob) {
                w[i * n + j] = rng.random_range(1..=3);
            }
        }
    }
    // Longest paths in the natural topological order.
    let mut d = vec![0u32; n * n];
    for i in (0..n).rev() {
        for k in i + 1..n {
            let e = w[i * n + k];
            if e == 0 {
                continue;
            }
            for j in 0..n {
                let via = if j == k {
                    e
                } else if d[k * n + j] > 0 {
                    e + d[k * n + j]
                } else {
                    0
                };
                d[i * n + j] = d[i * n + j].max(via);
            }
        }
    }
    for c in 1..n {
        if rng.random_bool(0.2) {
            let src = rng.random_range(0..c);
            for j in 0..n {
                d[c * n + j] = d[src * n + j];
                d[j * n + c] = d[j * n + src];
            }
            d[c * n + src] = 0;
            d[src * n + c] = 0;
            d[c * n + c] = 0;
        }
    }
    let labels = (0..n).map(|i| format!("v{i}")).collect();
    DistanceMatrix::from_fn(labels, |i, j| ExtReal::Finite(T::lit(d[i * n + j] as f64)))
        .expect("generated entries are finite and non-negative")
}
