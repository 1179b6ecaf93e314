use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::SpacetimeModel;
use crate::distance::{DistanceMatrix, ExtReal, Relation};
use crate::error::{DkitError, Result};
use crate::geom::{CoordBox, Point};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleMode {
    Poisson,
    Grid,
    GridWithProbes,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EventRole {
    Base,
    PastProbe,
    FutureProbe,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Event<T> {
    pub label: String,
    pub coords: Point<T>,
    pub role: EventRole,
    /// Index of the base event a probe belongs to.
    pub parent: Option<usize>,
}

#[derive(Clone, Debug)]
pub struct SampleSpec<T> {
    pub mode: SampleMode,
    /// Number of base events. Grid modes need a perfect square.
    pub n: usize,
    pub region: CoordBox<T>,
    /// Past and future probes per base event in `GridWithProbes` mode.
    pub probe_multiplicity: usize,
    /// Overrides the default probe offset of one eighth of the grid spacing.
    pub probe_offset: Option<T>,
    pub tol: T,
}

impl<T: Scalar> SampleSpec<T> {
    pub fn new(mode: SampleMode, n: usize, region: CoordBox<T>) -> Self {
        Self {
            mode,
            n,
            region,
            probe_multiplicity: 1,
            probe_offset: None,
            tol: T::default_tol(),
        }
    }

    pub fn with_probe_multiplicity(mut self, m: usize) -> Self {
        self.probe_multiplicity = m;
        self
    }
}

/// A finite sample of a model: events, their exact distance matrix, and the
/// probe bookkeeping.
#[derive(Clone, Debug)]
pub struct SampleSpace<T: Scalar> {
    pub model: SpacetimeModel<T>,
    pub events: Vec<Event<T>>,
    pub matrix: DistanceMatrix<T>,
    pub probe_offset: Option<T>,
}

fn grid_axis<T: Scalar>(lo: T, hi: T, k: usize) -> Vec<T> {
    let two = T::lit(2.0);
    let mid = (lo + hi) / two;
    let half = (hi - lo) / two;
    if k == 1 {
        return vec![mid];
    }
    let denom = T::lit((k - 1) as f64);
    // Symmetric about the centre so null diagonals through it are exact.
    (0..k)
        .map(|j| mid + half * (T::lit((2 * j) as f64) - denom) / denom)
        .collect()
}

impl<T: Scalar> SampleSpace<T> {
    pub fn generate(model: SpacetimeModel<T>, spec: &SampleSpec<T>, seed: u64) -> Result<Self> {
        if spec.n < 2 {
            return Err(DkitError::Input(format!("sample needs n >= 2, got {}", spec.n)));
        }
        if !spec.region.is_valid() {
            return Err(DkitError::Input("sampling region is empty".into()));
        }
        let mut events = Vec::with_capacity(spec.n);
        let mut probe_offset = None;
        match spec.mode {
            SampleMode::Poisson => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let r = spec.region;
                let mut attempts = 0usize;
                while events.len() < spec.n {
                    attempts += 1;
                    if attempts > 1000 * spec.n {
                        return Err(DkitError::Construction(
                            "sampling region barely intersects the model".into(),
                        ));
                    }
                    let u: f64 = rng.random();
                    let v: f64 = rng.random();
                    let p = Point::new(r.t.0 + (r.t.1 - r.t.0) * T::lit(u), r.x.0 + (r.x.1 - r.x.0) * T::lit(v));
                    if model.contains(p) {
                        events.push(Event {
                            label: format!("e{}", events.len()),
                            coords: p,
                            role: EventRole::Base,
                            parent: None,
                        });
                    }
                }
            }
            SampleMode::Grid | SampleMode::GridWithProbes => {
                let k = (spec.n as f64).sqrt().round() as usize;
                if k * k != spec.n {
                    return Err(DkitError::Input(format!(
                        "grid sampling needs a perfect square count, got {}",
                        spec.n
                    )));
                }
                let ts = grid_axis(spec.region.t.0, spec.region.t.1, k);
                let xs = grid_axis(spec.region.x.0, spec.region.x.1, k);
                for &t in &ts {
                    for &x in &xs {
                        let p = Point::new(t, x);
                        if !model.contains(p) {
                            return Err(DkitError::Construction(format!(
                                "grid point ({t}, {x}) is not in the model"
                            )));
                        }
                        events.push(Event {
                            label: format!("e{}", events.len()),
                            coords: p,
                            role: EventRole::Base,
                            parent: None,
                        });
                    }
                }
                if spec.mode == SampleMode::GridWithProbes {
                    let spacing = (ts[1] - ts[0]).min(xs[1] - xs[0]);
                    let delta = spec.probe_offset.unwrap_or(spacing / T::lit(8.0));
                    probe_offset = Some(delta);
                    let probes = make_probes(&model, &events, delta, spec.probe_multiplicity)?;
                    events.extend(probes);
                }
            }
        }
        let matrix = fill_matrix(&model, &events, spec.tol)?;
        Ok(Self {
            model,
            events,
            matrix,
            probe_offset,
        })
    }

    /// Sample from explicit coordinates, without probes.
    pub fn from_points(model: SpacetimeModel<T>, points: &[Point<T>], tol: T) -> Result<Self> {
        let events: Vec<_> = points
            .iter()
            .enumerate()
            .map(|(i, &p)| Event {
                label: format!("e{i}"),
                coords: p,
                role: EventRole::Base,
                parent: None,
            })
            .collect();
        let matrix = fill_matrix(&model, &events, tol)?;
        Ok(Self {
            model,
            events,
            matrix,
            probe_offset: None,
        })
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn coords(&self, i: usize) -> Point<T> {
        self.events[i].coords
    }

    pub fn base_indices(&self) -> Vec<usize> {
        (0..self.len())
            .filter(|&i| self.events[i].role == EventRole::Base)
            .collect()
    }

    pub fn has_probes(&self) -> bool {
        self.events.iter().any(|e| e.role != EventRole::Base)
    }

    pub fn exact_i_relation(&self) -> Result<Relation> {
        self.relation_from(|p, q| self.model.exact_i(p, q))
    }

    pub fn exact_j_relation(&self) -> Result<Relation> {
        self.relation_from(|p, q| self.model.exact_j(p, q))
    }

    fn relation_from(&self, f: impl Fn(Point<T>, Point<T>) -> Result<bool> + Sync) -> Result<Relation> {
        let n = self.len();
        let bits: Result<Vec<Vec<bool>>> = (0..n)
            .into_par_iter()
            .map(|i| (0..n).map(|j| f(self.coords(i), self.coords(j))).collect())
            .collect();
        let bits = bits?;
        Ok(Relation::from_fn(self.matrix.labels().clone(), |i, j| bits[i][j]))
    }

    pub fn write_coordinates_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["label", "t", "x", "role", "parent"])?;
        for e in &self.events {
            let role = match e.role {
                EventRole::Base => "base",
                EventRole::PastProbe => "past_probe",
                EventRole::FutureProbe => "future_probe",
            };
            let parent = e.parent.map(|i| self.events[i].label.clone()).unwrap_or_default();
            w.write_record([
                e.label.clone(),
                e.coords.t.to_string(),
                e.coords.x.to_string(),
                role.to_string(),
                parent,
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn make_probes<T: Scalar>(
    model: &SpacetimeModel<T>,
    base: &[Event<T>],
    delta: T,
    multiplicity: usize,
) -> Result<Vec<Event<T>>> {
    if multiplicity == 0 {
        return Err(DkitError::Input("probe multiplicity must be at least 1".into()));
    }
    let m = T::lit(multiplicity as f64);
    // Tilts spread inside the cone; a single probe sits on the time axis.
    let tilts: Vec<T> = (0..multiplicity)
        .map(|j| T::lit(0.8) * (T::lit((2 * j + 1) as f64) / m - T::one()))
        .collect();
    let mut out = Vec::with_capacity(2 * multiplicity * base.len());
    for (i, e) in base.iter().enumerate() {
        for (role, sign, tag) in [
            (EventRole::PastProbe, -T::one(), "past"),
            (EventRole::FutureProbe, T::one(), "fut"),
        ] {
            for (j, &s) in tilts.iter().enumerate() {
                let p = e.coords + Point::new(T::one(), s) * (delta * sign);
                let ok = model.contains(p)
                    && match role {
                        EventRole::PastProbe => model.exact_i(p, e.coords)?,
                        _ => model.exact_i(e.coords, p)?,
                    };
                if !ok {
                    return Err(DkitError::Construction(format!(
                        "domain too small for probes: {} probe of {} at ({}, {}) is not usable",
                        tag, e.label, p.t, p.x
                    )));
                }
                out.push(Event {
                    label: format!("{}-{}{}", e.label, tag, j),
                    coords: p,
                    role,
                    parent: Some(i),
                });
            }
        }
    }
    Ok(out)
}

fn fill_matrix<T: Scalar>(model: &SpacetimeModel<T>, events: &[Event<T>], tol: T) -> Result<DistanceMatrix<T>> {
    let n = events.len();
    let rows: Result<Vec<Vec<ExtReal<T>>>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (0..n)
                .map(|j| model.exact_d(events[i].coords, events[j].coords))
                .collect()
        })
        .collect();
    let entries: Vec<_> = rows?.into_iter().flatten().collect();
    let labels: Vec<String> = events.iter().map(|e| e.label.clone()).collect();
    let probes: Vec<bool> = events.iter().map(|e| e.role != EventRole::Base).collect();
    DistanceMatrix::new(labels, entries)?.with_tol(tol).with_probes(probes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::ModelKind;

    fn mink() -> SpacetimeModel<f64> {
        SpacetimeModel::minkowski(CoordBox::square(-2.0, 2.0)).unwrap()
    }

    #[test]
    fn grid_with_probes_meets_constraints() {
        let spec = SampleSpec::new(SampleMode::GridWithProbes, 100, CoordBox::square(-1.0, 1.0));
        let s = SampleSpace::generate(mink(), &spec, 0).unwrap();
        assert_eq!(s.base_indices().len(), 100);
        assert_eq!(s.len(), 300);
        for i in s.base_indices() {
            let past = (0..s.len()).any(|x| s.matrix.get(x, i).exceeds(0.0) && s.matrix.is_probe(x));
            let fut = (0..s.len()).any(|y| s.matrix.get(i, y).exceeds(0.0) && s.matrix.is_probe(y));
            assert!(past && fut, "event {i}");
        }
    }

    #[test]
    fn seed_repetition_is_identical() {
        let spec = SampleSpec::new(SampleMode::Poisson, 40, CoordBox::square(-1.0, 1.0));
        let a = SampleSpace::generate(mink(), &spec, 11).unwrap();
        let b = SampleSpace::generate(mink(), &spec, 11).unwrap();
        assert_eq!(a.events, b.events);
        assert_eq!(a.matrix.entries(), b.matrix.entries());
        let c = SampleSpace::generate(mink(), &spec, 12).unwrap();
        assert_ne!(a.events, c.events);
    }

    #[test]
    fn cylinder_matrix_is_infinite() {
        let m = SpacetimeModel::new(
            ModelKind::CtcCylinder { period: 1.0 },
            CoordBox::new((0.0, 1.0), (-1.0, 1.0)),
        )
        .unwrap();
        let spec = SampleSpec::new(SampleMode::Poisson, 50, m.domain);
        let s = SampleSpace::generate(m, &spec, 3).unwrap();
        assert!(s.matrix.entries().iter().all(|e| e.is_infinite()));
    }

    #[test]
    fn probes_outside_domain_rejected() {
        let spec = SampleSpec::new(SampleMode::GridWithProbes, 9, CoordBox::square(-2.0, 2.0));
        assert!(matches!(
            SampleSpace::generate(mink(), &spec, 0),
            Err(DkitError::Construction(_))
        ));
    }

    #[test]
    fn non_square_grid_rejected() {
        let spec = SampleSpec::new(SampleMode::Grid, 10, CoordBox::square(-1.0, 1.0));
        assert!(SampleSpace::generate(mink(), &spec, 0).is_err());
    }
}
