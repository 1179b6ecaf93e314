//! Discrete Lorentzian metric spaces: Poisson sprinklings and the
//! longest-chain distance.

use std::io::Write;
use std::sync::Arc;

use fixedbitset::FixedBitSet;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::Serialize;

use crate::distance::{DistanceMatrix, ExtReal, Relation};
use crate::error::{DkitError, Result};
use crate::geom::{CoordBox, Point};
use crate::models::SpacetimeModel;
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SprinkleRegion<T> {
    Box(CoordBox<T>),
    /// The closed causal diamond between two timelike separated corners.
    Diamond {
        bottom: Point<T>,
        top: Point<T>,
    },
}

impl<T: Scalar> SprinkleRegion<T> {
    /// The diamond between `(0, 0)` and `(1, 0)`, of area 1/2.
    pub fn unit_diamond() -> Self {
        SprinkleRegion::Diamond {
            bottom: Point::new(T::zero(), T::zero()),
            top: Point::new(T::one(), T::zero()),
        }
    }

    pub fn area(&self) -> T {
        match *self {
            SprinkleRegion::Box(b) => b.area(),
            SprinkleRegion::Diamond { bottom, top } => {
                let du = (top.t + top.x) - (bottom.t + bottom.x);
                let dv = (top.t - top.x) - (bottom.t - bottom.x);
                du * dv / T::lit(2.0)
            }
        }
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> Point<T> {
        let a = T::lit(rng.random::<f64>());
        let b = T::lit(rng.random::<f64>());
        match *self {
            SprinkleRegion::Box(bx) => Point::new(bx.t.0 + (bx.t.1 - bx.t.0) * a, bx.x.0 + (bx.x.1 - bx.x.0) * b),
            SprinkleRegion::Diamond { bottom, top } => {
                // Uniform in null coordinates is uniform in the diamond.
                let (u0, v0) = (bottom.t + bottom.x, bottom.t - bottom.x);
                let (u1, v1) = (top.t + top.x, top.t - top.x);
                let u = u0 + (u1 - u0) * a;
                let v = v0 + (v1 - v0) * b;
                let two = T::lit(2.0);
                Point::new((u + v) / two, (u - v) / two)
            }
        }
    }
}

/// A finite partial order with its covering relation.
#[derive(Clone, Debug)]
pub struct CausalSet<T> {
    pub labels: Arc<[String]>,
    pub coords: Vec<Point<T>>,
    succ: Vec<FixedBitSet>,
    link_succ: Vec<FixedBitSet>,
    topo: Vec<usize>,
}

impl<T: Scalar> CausalSet<T> {
    /// Builds a causal set from points and a strict order predicate,
    /// verifying irreflexivity, acyclicity and transitivity.
    pub fn from_order(coords: Vec<Point<T>>, mut less: impl FnMut(usize, usize) -> Result<bool>) -> Result<Self> {
        let n = coords.len();
        let mut succ = vec![FixedBitSet::with_capacity(n); n];
        for (i, row) in succ.iter_mut().enumerate() {
            for j in 0..n {
                if i != j && less(i, j)? {
                    row.insert(j);
                }
            }
        }
        let topo = topological_order(&succ).ok_or_else(|| DkitError::Construction("order not acyclic".into()))?;
        for i in 0..n {
            for k in succ[i].ones() {
                if !succ[k].is_subset(&succ[i]) {
                    let j = succ[k].difference(&succ[i]).next().unwrap_or(k);
                    return Err(DkitError::Construction(format!(
                        "order not transitive: {i} < {k} < {j} but not {i} < {j}"
                    )));
                }
            }
        }
        let link_succ = (0..n)
            .map(|i| {
                let mut covered = FixedBitSet::with_capacity(n);
                for k in succ[i].ones() {
                    covered.union_with(&succ[k]);
                }
                let mut links = succ[i].clone();
                links.difference_with(&covered);
                links
            })
            .collect();
        let labels: Arc<[String]> = (0..n).map(|i| format!("n{i}")).collect::<Vec<_>>().into();
        Ok(Self {
            labels,
            coords,
            succ,
            link_succ,
            topo,
        })
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn precedes(&self, i: usize, j: usize) -> bool {
        self.succ[i].contains(j)
    }

    pub fn order(&self) -> Relation {
        Relation::from_fn(self.labels.clone(), |i, j| self.succ[i].contains(j))
    }

    pub fn links(&self) -> Relation {
        Relation::from_fn(self.labels.clone(), |i, j| self.link_succ[i].contains(j))
    }

    pub fn topological_order(&self) -> &[usize] {
        &self.topo
    }

    /// Longest chain from `src` to every node, counted in edges.
    pub fn longest_chains_from(&self, src: usize) -> Vec<Option<usize>> {
        let n = self.len();
        let mut len = vec![None; n];
        len[src] = Some(0);
        let start = self.topo.iter().position(|&v| v == src).unwrap_or(0);
        for &u in &self.topo[start..] {
            let Some(lu) = len[u] else { continue };
            for v in self.link_succ[u].ones() {
                if len[v].is_none_or(|lv| lu + 1 > lv) {
                    len[v] = Some(lu + 1);
                }
            }
        }
        len
    }

    /// `d(p, q)` = number of links in the longest chain from `p` to `q`.
    pub fn chain_distance_matrix(&self) -> Result<DistanceMatrix<T>> {
        let n = self.len();
        let mut entries = vec![ExtReal::zero(); n * n];
        for i in 0..n {
            for (j, l) in self.longest_chains_from(i).into_iter().enumerate() {
                if let Some(l) = l {
                    entries[i * n + j] = ExtReal::Finite(T::lit(l as f64));
                }
            }
        }
        DistanceMatrix::new(self.labels.to_vec(), entries)
    }

    /// Edge list, one `u v` line per link.
    pub fn write_links<W: Write>(&self, mut w: W) -> Result<()> {
        for i in 0..self.len() {
            for j in self.link_succ[i].ones() {
                writeln!(w, "{} {}", self.labels[i], self.labels[j])?;
            }
        }
        Ok(())
    }

    pub fn write_coordinates<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["label", "t", "x"])?;
        for (l, p) in self.labels.iter().zip(&self.coords) {
            out.write_record([l.clone(), p.t.to_string(), p.x.to_string()])?;
        }
        out.flush()?;
        Ok(())
    }
}

fn topological_order(succ: &[FixedBitSet]) -> Option<Vec<usize>> {
    let n = succ.len();
    let mut indeg = vec![0usize; n];
    for s in succ {
        for j in s.ones() {
            indeg[j] += 1;
        }
    }
    let mut ready: Vec<usize> = (0..n).filter(|&i| indeg[i] == 0).rev().collect();
    let mut order = Vec::with_capacity(n);
    while let Some(u) = ready.pop() {
        order.push(u);
        for v in succ[u].ones() {
            indeg[v] -= 1;
            if indeg[v] == 0 {
                ready.push(v);
            }
        }
    }
    (order.len() == n).then_some(order)
}

/// Poisson sprinkling into `region` with order induced by the model's
/// causal relation. Points are sorted by `(t, x)`.
pub fn sprinkle<T: Scalar>(
    model: &SpacetimeModel<T>,
    region: SprinkleRegion<T>,
    density: T,
    seed: u64,
) -> Result<CausalSet<T>> {
    if !(density > T::zero()) {
        return Err(DkitError::Input("sprinkling density must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let count = draw_count((density * region.area()).as_f64(), &mut rng)?;
    let mut coords = Vec::with_capacity(count);
    for _ in 0..count {
        let p = region.draw(&mut rng);
        if !model.contains(p) {
            return Err(DkitError::Input(format!(
                "sprinkled point ({}, {}) lies outside the model",
                p.t, p.x
            )));
        }
        coords.push(p);
    }
    coords.sort_by(|a, b| a.t.partial_cmp(&b.t).unwrap().then(a.x.partial_cmp(&b.x).unwrap()));
    let pts = coords.clone();
    CausalSet::from_order(coords, |i, j| model.exact_j(pts[i], pts[j]))
}

fn draw_count(lambda: f64, rng: &mut ChaCha8Rng) -> Result<usize> {
    if lambda <= 0.0 {
        return Ok(0);
    }
    let dist = Poisson::new(lambda).map_err(|e| DkitError::Input(format!("bad Poisson mean {lambda}: {e}")))?;
    Ok(dist.sample(rng) as usize)
}

/// Longest chain between `(0, 0)` and `(1, 0)` through a Minkowski
/// sprinkling of the unit diamond, in edges. Interior points form a chain
/// exactly when both null coordinates increase, so this is a longest
/// increasing subsequence plus one.
pub fn corner_chain_length<T: Scalar>(points: &[Point<T>]) -> usize {
    let mut uv: Vec<(T, T)> = points.iter().map(|p| (p.t + p.x, p.t - p.x)).collect();
    uv.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(b.1.partial_cmp(&a.1).unwrap()));
    let mut tails: Vec<T> = Vec::new();
    for (_, v) in uv {
        let k = tails.partition_point(|&t| t < v);
        if k == tails.len() {
            tails.push(v);
        } else {
            tails[k] = v;
        }
    }
    tails.len() + 1
}

#[derive(Clone, Debug, Serialize)]
pub struct ScalingRow {
    pub density: f64,
    pub median_n: f64,
    pub median_chain: f64,
    /// Median chain length over the square root of the median size.
    pub ratio: Option<f64>,
    pub insufficient_sample: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ScalingReport {
    pub trials: usize,
    pub rows: Vec<ScalingRow>,
}

impl ScalingReport {
    pub fn medians_increase(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].median_chain > w[0].median_chain)
    }
}

fn median(mut xs: Vec<f64>) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let m = xs.len() / 2;
    if xs.len() % 2 == 1 {
        xs[m]
    } else {
        (xs[m - 1] + xs[m]) / 2.0
    }
}

/// Median corner-to-corner chain length of Minkowski unit-diamond
/// sprinklings, per density.
pub fn chain_scaling_probe(densities: &[f64], trials: usize, seed: u64) -> Result<ScalingReport> {
    if densities.windows(2).any(|w| w[1] <= w[0]) {
        return Err(DkitError::Input("densities must be strictly increasing".into()));
    }
    if trials == 0 {
        return Err(DkitError::Input("need at least one trial".into()));
    }
    let mut master = ChaCha8Rng::seed_from_u64(seed);
    let region = SprinkleRegion::<f64>::unit_diamond();
    let mut rows = Vec::with_capacity(densities.len());
    for &density in densities {
        let mut sizes = Vec::with_capacity(trials);
        let mut chains = Vec::with_capacity(trials);
        for _ in 0..trials {
            let mut rng = ChaCha8Rng::seed_from_u64(master.random());
            let n = draw_count(density * region.area(), &mut rng)?;
            let pts: Vec<Point<f64>> = (0..n).map(|_| region.draw(&mut rng)).collect();
            sizes.push(n as f64);
            chains.push(corner_chain_length(&pts) as f64);
        }
        let median_n = median(sizes);
        let median_chain = median(chains);
        let insufficient_sample = median_n < 2.0;
        rows.push(ScalingRow {
            density,
            median_n,
            median_chain,
            ratio: (!insufficient_sample).then(|| median_chain / median_n.sqrt()),
            insufficient_sample,
        });
    }
    Ok(ScalingReport { trials, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distance::check_reverse_triangle;
    use crate::models::ModelKind;

    fn poset(n: usize, rel: &[(usize, usize)]) -> CausalSet<f64> {
        let coords = vec![Point::new(0.0, 0.0); n];
        CausalSet::from_order(coords, |i, j| Ok(rel.contains(&(i, j)))).unwrap()
    }

    fn all_chains_brute(cs: &CausalSet<f64>, i: usize, j: usize) -> usize {
        // Depth-first over the order itself, not the links.
        if i == j {
            return 0;
        }
        let mut best = 0;
        for k in 0..cs.len() {
            if cs.precedes(i, k) && (k == j || cs.precedes(k, j)) {
                let rest = if k == j { 0 } else { all_chains_brute(cs, k, j) };
                best = best.max(1 + rest);
            }
        }
        best
    }

    #[test]
    fn three_chain_distances() {
        let cs = poset(3, &[(0, 1), (1, 2), (0, 2)]);
        let d = cs.chain_distance_matrix().unwrap();
        assert_eq!(d.get(0, 1), ExtReal::Finite(1.0));
        assert_eq!(d.get(0, 2), ExtReal::Finite(2.0));
        assert_eq!(cs.links().count(), 2);
    }

    #[test]
    fn antichain_is_zero() {
        let cs = poset(2, &[]);
        let d = cs.chain_distance_matrix().unwrap();
        assert!(d.entries().iter().all(|e| *e == ExtReal::zero()));
    }

    #[test]
    fn n_poset_matches_brute_force() {
        // a=0, b=1, c=2, d=3 with a<c, b<c, b<d
        let cs = poset(4, &[(0, 2), (1, 2), (1, 3)]);
        let d = cs.chain_distance_matrix().unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let want = if cs.precedes(i, j) {
                    all_chains_brute(&cs, i, j)
                } else {
                    0
                };
                assert_eq!(d.get(i, j), ExtReal::Finite(want as f64), "({i},{j})");
            }
        }
        assert_eq!(d.get(0, 2), ExtReal::Finite(1.0));
        assert_eq!(d.get(1, 3), ExtReal::Finite(1.0));
    }

    #[test]
    fn non_transitive_order_rejected() {
        let coords = vec![Point::new(0.0, 0.0); 3];
        let r = CausalSet::from_order(coords, |i, j| Ok((i, j) == (0, 1) || (i, j) == (1, 2)));
        assert!(matches!(r, Err(DkitError::Construction(_))));
    }

    #[test]
    fn minkowski_sprinkle_is_deterministic_and_consistent() {
        let m = SpacetimeModel::minkowski(CoordBox::square(-1.0, 2.0)).unwrap();
        let a = sprinkle(&m, SprinkleRegion::unit_diamond(), 200.0, 7).unwrap();
        let b = sprinkle(&m, SprinkleRegion::unit_diamond(), 200.0, 7).unwrap();
        assert_eq!(a.coords, b.coords);
        assert!(a.len() > 50 && a.len() < 160, "{}", a.len());
        let d = a.chain_distance_matrix().unwrap();
        assert!(check_reverse_triangle(&d).passed());
        let order = a.order();
        for i in 0..a.len() {
            for j in 0..a.len() {
                assert_eq!(d.get(i, j).exceeds(0.0), order.get(i, j));
            }
        }
        // Transitive reduction: closure of links is the order.
        let links = a.links();
        for i in 0..a.len() {
            for j in links.pairs().filter(|&(x, _)| x == i).map(|(_, y)| y) {
                assert!(!(0..a.len()).any(|k| order.get(i, k) && order.get(k, j)));
            }
        }
    }

    #[test]
    fn cylinder_order_rejected() {
        let m = SpacetimeModel::new(
            ModelKind::CtcCylinder { period: 1.0 },
            CoordBox::new((0.0, 1.0), (-1.0, 1.0)),
        )
        .unwrap();
        let err = sprinkle(&m, SprinkleRegion::Box(m.domain), 20.0, 1).unwrap_err();
        assert!(err.to_string().contains("order not acyclic"));
    }

    #[test]
    fn lis_agrees_with_chain_dp() {
        let m = SpacetimeModel::minkowski(CoordBox::square(-1.0, 2.0)).unwrap();
        for seed in 0..5 {
            let cs = sprinkle(&m, SprinkleRegion::unit_diamond(), 120.0, seed).unwrap();
            let mut pts = cs.coords.clone();
            pts.insert(0, Point::new(0.0, 0.0));
            pts.push(Point::new(1.0, 0.0));
            let with_corners = CausalSet::from_order(pts.clone(), |i, j| m.exact_j(pts[i], pts[j])).unwrap();
            let dp = with_corners.longest_chains_from(0)[pts.len() - 1].unwrap();
            assert_eq!(dp, corner_chain_length(&cs.coords), "seed {seed}");
        }
    }

    #[test]
    fn tiny_density_is_flagged() {
        let r = chain_scaling_probe(&[0.001], 5, 3).unwrap();
        assert!(r.rows[0].insufficient_sample);
    }

    #[test]
    fn empty_sprinkle_is_a_value() {
        let m = SpacetimeModel::minkowski(CoordBox::square(-1.0, 2.0)).unwrap();
        let cs = sprinkle(&m, SprinkleRegion::unit_diamond(), 1e-9, 0).unwrap();
        assert!(cs.is_empty());
        assert_eq!(cs.chain_distance_matrix().unwrap().len(), 0);
    }
}
