use rayon::prelude::*;
use serde::Serialize;

use super::{SampleSpace, SpacetimeModel};
use crate::distance::ExtReal;
use crate::geom::Point;
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug)]
pub struct OracleOptions {
    /// Grid cells per side of the domain box.
    pub resolution: usize,
    /// Cap on the number of sample pairs checked.
    pub max_pairs: usize,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self {
            resolution: 64,
            max_pairs: 24,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct OraclePair<T: Scalar> {
    pub p: Point<T>,
    pub q: Point<T>,
    pub exact: ExtReal<T>,
    pub oracle: T,
    /// `exact - oracle`; `None` when the exact value is infinite.
    pub gap: Option<T>,
    pub rel_gap: Option<T>,
}

#[derive(Clone, Debug, Serialize)]
pub struct OracleReport<T: Scalar> {
    pub resolution: usize,
    pub pairs: Vec<OraclePair<T>>,
    pub max_gap: T,
    pub min_gap: T,
    pub max_rel_gap: T,
}

impl<T: Scalar> OracleReport<T> {
    /// The oracle never exceeds the exact value by more than `tol`.
    pub fn lower_bound_holds(&self, tol: T) -> bool {
        self.min_gap >= -tol
    }
}

struct Grid<T> {
    t0: T,
    x0: T,
    ht: T,
    hx: T,
    n: usize,
}

impl<T: Scalar> Grid<T> {
    fn point(&self, i: usize, j: usize) -> Point<T> {
        Point::new(
            self.t0 + self.ht * T::lit(i as f64),
            self.x0 + self.hx * T::lit(j as f64),
        )
    }

    fn cell(&self, p: Point<T>) -> (isize, isize) {
        (
            ((p.t - self.t0) / self.ht).floor().to_isize().unwrap_or(0),
            ((p.x - self.x0) / self.hx).floor().to_isize().unwrap_or(0),
        )
    }

    fn in_range(&self, i: isize, j: isize) -> bool {
        i >= 0 && j >= 0 && (i as usize) <= self.n && (j as usize) <= self.n
    }
}

/// Nearest grid point `g` with `accept(g)`, searched in a few cells around `p`.
fn snap<T: Scalar>(grid: &Grid<T>, p: Point<T>, accept: impl Fn(Point<T>) -> bool) -> Option<Point<T>> {
    let (ci, cj) = grid.cell(p);
    let mut best: Option<(T, Point<T>)> = None;
    for di in -4..=5 {
        for dj in -4..=5 {
            let (i, j) = (ci + di, cj + dj);
            if !grid.in_range(i, j) {
                continue;
            }
            let g = grid.point(i as usize, j as usize);
            if !accept(g) {
                continue;
            }
            let dist = (g - p).norm();
            if best.is_none_or(|(b, _)| dist < b) {
                best = Some((dist, g));
            }
        }
    }
    best.map(|(_, g)| g)
}

fn longest_path<T: Scalar>(model: &SpacetimeModel<T>, grid: &Grid<T>, p: Point<T>, q: Point<T>) -> T {
    let zero = T::zero();
    let Some(ps) = snap(grid, p, |g| model.contains(g) && model.segment_weight(p, g).is_some()) else {
        return zero;
    };
    let Some(qs) = snap(grid, q, |g| model.contains(g) && model.segment_weight(g, q).is_some()) else {
        return zero;
    };
    let eps = model.null_eps();
    let (up, vp) = (ps.t + ps.x, ps.t - ps.x);
    let (uq, vq) = (qs.t + qs.x, qs.t - qs.x);
    if uq < up - eps || vq < vp - eps {
        return zero;
    }
    // Grid points of the closed coordinate diamond, in (t, x) order.
    let mut nodes = Vec::new();
    for i in 0..=grid.n {
        for j in 0..=grid.n {
            let g = grid.point(i, j);
            let (u, v) = (g.t + g.x, g.t - g.x);
            if u >= up - eps && u <= uq + eps && v >= vp - eps && v <= vq + eps && model.contains(g) {
                nodes.push(g);
            }
        }
    }
    let start = nodes.iter().position(|g| (*g - ps).norm() <= eps);
    let end = nodes.iter().position(|g| (*g - qs).norm() <= eps);
    let (Some(start), Some(end)) = (start, end) else {
        return zero;
    };
    let mut best: Vec<Option<T>> = vec![None; nodes.len()];
    best[start] = Some(zero);
    for k in start + 1..=end {
        let v = nodes[k];
        let mut acc: Option<T> = None;
        for u in start..k {
            let Some(bu) = best[u] else { continue };
            if let Some(w) = model.segment_weight(nodes[u], v) {
                let c = bu + w;
                if acc.is_none_or(|a| c > a) {
                    acc = Some(c);
                }
            }
        }
        best[k] = acc;
    }
    best[end].unwrap_or(zero)
}

/// Longest inscribed causal polygon on a regular grid, for explicit pairs.
pub fn verify_pairs<T: Scalar>(
    model: &SpacetimeModel<T>,
    pairs: &[(Point<T>, Point<T>)],
    resolution: usize,
) -> OracleReport<T> {
    let dom = model.domain;
    let res = resolution.max(1);
    let grid = Grid {
        t0: dom.t.0,
        x0: dom.x.0,
        ht: (dom.t.1 - dom.t.0) / T::lit(res as f64),
        hx: (dom.x.1 - dom.x.0) / T::lit(res as f64),
        n: res,
    };
    let rows: Vec<OraclePair<T>> = pairs
        .par_iter()
        .map(|&(p, q)| {
            let exact = model.exact_d(p, q).unwrap_or(ExtReal::zero());
            let oracle = longest_path(model, &grid, p, q);
            let gap = exact.finite().map(|e| e - oracle);
            let rel_gap = match (exact.finite(), gap) {
                (Some(e), Some(g)) if e > T::zero() => Some(g / e),
                _ => None,
            };
            OraclePair {
                p,
                q,
                exact,
                oracle,
                gap,
                rel_gap,
            }
        })
        .collect();
    let gaps = rows.iter().filter_map(|r| r.gap);
    let max_gap = gaps.clone().fold(T::zero(), T::max);
    let min_gap = gaps.fold(T::zero(), T::min);
    let max_rel_gap = rows.iter().filter_map(|r| r.rel_gap).fold(T::zero(), T::max);
    OracleReport {
        resolution: res,
        pairs: rows,
        max_gap,
        min_gap,
        max_rel_gap,
    }
}

/// Runs the grid oracle on base pairs of a sample that are related in the
/// Minkowski cone, striding evenly when there are more than `max_pairs`.
pub fn verify_against_grid_oracle<T: Scalar>(
    model: &SpacetimeModel<T>,
    sample: &SampleSpace<T>,
    opts: OracleOptions,
) -> OracleReport<T> {
    let base = sample.base_indices();
    let eps = model.null_eps();
    let mut candidates = Vec::new();
    for &i in &base {
        for &j in &base {
            let y = sample.coords(j) - sample.coords(i);
            if y.t - y.x.abs() > eps {
                candidates.push((sample.coords(i), sample.coords(j)));
            }
        }
    }
    let stride = (candidates.len() / opts.max_pairs.max(1)).max(1);
    let chosen: Vec<_> = candidates.into_iter().step_by(stride).take(opts.max_pairs).collect();
    verify_pairs(model, &chosen, opts.resolution)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::CoordBox;
    use crate::models::ModelKind;

    fn pt(t: f64, x: f64) -> Point<f64> {
        Point::new(t, x)
    }

    #[test]
    fn slit_blocked_pair_has_no_path() {
        let m = SpacetimeModel::new(ModelKind::SlitMinkowski, CoordBox::square(-2.0, 2.0)).unwrap();
        let r = verify_pairs(&m, &[(pt(-1.0, -1.0), pt(1.0, -1.0))], 32);
        assert_eq!(r.pairs[0].oracle, 0.0);
        assert_eq!(r.pairs[0].gap, Some(0.0));
    }

    #[test]
    fn slit_broken_geodesic_is_approached() {
        let m = SpacetimeModel::new(ModelKind::SlitMinkowski, CoordBox::square(-2.0, 2.0)).unwrap();
        let r = verify_pairs(&m, &[(pt(-1.0, -0.3), pt(1.0, -0.3))], 64);
        let p = &r.pairs[0];
        assert!(p.gap.unwrap() >= -1e-9);
        assert!(p.rel_gap.unwrap() < 0.1, "{:?}", p);
    }

    #[test]
    fn minkowski_gap_shrinks() {
        let m = SpacetimeModel::minkowski(CoordBox::square(-2.0, 2.0)).unwrap();
        let pairs = [(pt(-1.3, 0.1), pt(1.1, 0.45))];
        let a = verify_pairs(&m, &pairs, 32);
        let b = verify_pairs(&m, &pairs, 64);
        assert!(a.lower_bound_holds(1e-9) && b.lower_bound_holds(1e-9));
        assert!(b.max_rel_gap < a.max_rel_gap);
    }
}
