//! Scenario files: what to build, which suites to run on it, and what the
//! suites are expected to report.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use dkit_core::causal_set::SprinkleRegion;
use dkit_core::finsler::FinslerNorm;
use dkit_core::models::{ModelKind, SampleMode, SampleSpec, SpacetimeModel};
use dkit_core::{CoordBox64, Point64, SpacetimeModel64};
use serde::Deserialize;
use serde_json::Value;

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Axioms,
    Distinction,
    Reflectivity,
    Topology,
    Gate,
    Oracle,
    Busemann,
    Isometry,
}

impl Suite {
    /// Execution order. Later suites may reuse nothing from earlier ones, but
    /// a fixed order keeps reports and logs stable.
    pub const ORDER: [Suite; 8] = [
        Suite::Axioms,
        Suite::Distinction,
        Suite::Reflectivity,
        Suite::Topology,
        Suite::Gate,
        Suite::Oracle,
        Suite::Busemann,
        Suite::Isometry,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Axioms => "axioms",
            Suite::Distinction => "distinction",
            Suite::Reflectivity => "reflectivity",
            Suite::Topology => "topology",
            Suite::Gate => "gate",
            Suite::Oracle => "oracle",
            Suite::Busemann => "busemann",
            Suite::Isometry => "isometry",
        }
    }

    pub fn parse(name: &str) -> Result<Self, CliError> {
        Self::ORDER
            .into_iter()
            .find(|s| s.name() == name)
            .ok_or_else(|| CliError::Parse(format!("unknown suite `{name}`")))
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// `[[t_lo, t_hi], [x_lo, x_hi]]`
pub type BoxSpec = [[f64; 2]; 2];

fn to_box(b: BoxSpec) -> CoordBox64 {
    CoordBox64::new((b[0][0], b[0][1]), (b[1][0], b[1][1]))
}

fn to_point(p: [f64; 2]) -> Point64 {
    Point64::new(p[0], p[1])
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelName {
    Minkowski,
    CtcCylinder,
    SlitMinkowski,
    PuncturedMinkowski,
    FlatFinsler,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub kind: ModelName,
    #[serde(rename = "box")]
    pub domain: BoxSpec,
    /// Cylinder period.
    pub period: Option<f64>,
    /// Punctured model: the removed point `[t, x]`.
    pub removed: Option<[f64; 2]>,
    /// Flat Finsler model: Randers drift; omitted means the Minkowski norm.
    pub drift: Option<f64>,
}

impl ModelSpec {
    pub fn build(&self) -> Result<SpacetimeModel64, CliError> {
        let kind = match self.kind {
            ModelName::Minkowski => ModelKind::Minkowski,
            ModelName::CtcCylinder => ModelKind::CtcCylinder {
                period: self
                    .period
                    .ok_or_else(|| CliError::Parse("ctc_cylinder needs `period`".into()))?,
            },
            ModelName::SlitMinkowski => ModelKind::SlitMinkowski,
            ModelName::PuncturedMinkowski => ModelKind::PuncturedMinkowski {
                removed: to_point(self.removed.unwrap_or([0.0, 0.0])),
            },
            ModelName::FlatFinsler => ModelKind::FlatFinsler {
                norm: match self.drift {
                    Some(b) => FinslerNorm::randers(b).map_err(|e| CliError::Parse(e.to_string()))?,
                    None => FinslerNorm::minkowski(),
                },
            },
        };
        SpacetimeModel::new(kind, to_box(self.domain)).map_err(|e| CliError::Parse(e.to_string()))
    }

    /// Flat models have translation-invariant distance `F(q - p)`.
    pub fn is_flat(&self) -> bool {
        matches!(self.kind, ModelName::Minkowski | ModelName::FlatFinsler)
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplingSpec {
    pub mode: SampleMode,
    pub n: usize,
    /// Defaults to the model box.
    pub region: Option<BoxSpec>,
    #[serde(default = "one")]
    pub probe_multiplicity: usize,
    pub probe_offset: Option<f64>,
}

fn one() -> usize {
    1
}

impl SamplingSpec {
    pub fn build(&self, model: &ModelSpec, tol: f64) -> SampleSpec<f64> {
        let mut spec = SampleSpec::new(self.mode, self.n, to_box(self.region.unwrap_or(model.domain)));
        spec.probe_multiplicity = self.probe_multiplicity;
        spec.probe_offset = self.probe_offset;
        spec.tol = tol;
        spec
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case", deny_unknown_fields)]
pub enum RegionSpec {
    UnitDiamond,
    Box {
        #[serde(rename = "box")]
        domain: BoxSpec,
    },
    Diamond {
        bottom: [f64; 2],
        top: [f64; 2],
    },
}

impl RegionSpec {
    pub fn build(&self) -> SprinkleRegion<f64> {
        match *self {
            RegionSpec::UnitDiamond => SprinkleRegion::unit_diamond(),
            RegionSpec::Box { domain } => SprinkleRegion::Box(to_box(domain)),
            RegionSpec::Diamond { bottom, top } => SprinkleRegion::Diamond {
                bottom: to_point(bottom),
                top: to_point(top),
            },
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Source {
    /// A catalog model sampled at finitely many events.
    Model { model: ModelSpec, sampling: SamplingSpec },
    /// A distance matrix CSV (path relative to the scenario file) or a
    /// shipped fixture by name.
    Matrix {
        path: Option<PathBuf>,
        fixture: Option<String>,
    },
    /// A Poisson sprinkling with the longest-chain distance.
    CausalSet {
        model: ModelSpec,
        region: RegionSpec,
        density: f64,
    },
}

impl Source {
    pub fn is_stochastic(&self) -> bool {
        match self {
            Source::Model { sampling, .. } => sampling.mode == SampleMode::Poisson,
            Source::Matrix { .. } => false,
            Source::CausalSet { .. } => true,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Source::Model { .. } => "model",
            Source::Matrix { .. } => "matrix",
            Source::CausalSet { .. } => "causal_set",
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default = "default_tol")]
    pub d: f64,
}

fn default_tol() -> f64 {
    1e-9
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { d: default_tol() }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSpec {
    #[serde(default = "default_resolutions")]
    pub resolutions: Vec<usize>,
    #[serde(default = "default_max_pairs")]
    pub max_pairs: usize,
}

fn default_resolutions() -> Vec<usize> {
    vec![64]
}

fn default_max_pairs() -> usize {
    24
}

impl Default for OracleSpec {
    fn default() -> Self {
        Self {
            resolutions: default_resolutions(),
            max_pairs: default_max_pairs(),
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BusemannSpec {
    #[serde(default)]
    pub point: [f64; 2],
    #[serde(default = "default_direction")]
    pub direction: [f64; 2],
    /// Curvature vectors `a` of the test curves `p + t v + t^2 a`; the first
    /// one feeds the CSV output.
    #[serde(default = "default_curvatures")]
    pub curvatures: Vec<[f64; 2]>,
    #[serde(default = "default_quad_dirs")]
    pub quadraticity_directions: usize,
}

fn default_direction() -> [f64; 2] {
    [1.0, 0.3]
}

fn default_curvatures() -> Vec<[f64; 2]> {
    vec![[0.0, 0.2], [0.5, -0.4]]
}

fn default_quad_dirs() -> usize {
    9
}

impl Default for BusemannSpec {
    fn default() -> Self {
        Self {
            point: [0.0, 0.0],
            direction: default_direction(),
            curvatures: default_curvatures(),
            quadraticity_directions: default_quad_dirs(),
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "map", rename_all = "snake_case", deny_unknown_fields)]
pub enum IsometrySpec {
    Boost {
        rapidity: f64,
    },
    Scale {
        factor: f64,
    },
    /// A seeded random relabelling of the sample.
    Permutation,
}

impl IsometrySpec {
    pub fn is_stochastic(&self) -> bool {
        matches!(self, IsometrySpec::Permutation)
    }
}

/// Expected observations per suite. Each listed key must be reported by the
/// suite with exactly this value.
pub type Expectations = BTreeMap<Suite, BTreeMap<String, Value>>;

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    #[serde(default)]
    pub description: Option<String>,
    pub seed: Option<u64>,
    pub source: Source,
    pub suites: Vec<Suite>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub expect: Expectations,
    #[serde(default)]
    pub oracle: Option<OracleSpec>,
    #[serde(default)]
    pub busemann: Option<BusemannSpec>,
    #[serde(default)]
    pub isometry: Option<IsometrySpec>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let s: Scenario = serde_json::from_str(text).map_err(|e| CliError::Parse(e.to_string()))?;
        s.validate()?;
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<(Self, Vec<u8>), CliError> {
        let bytes = std::fs::read(path).map_err(|e| CliError::Parse(format!("cannot read {}: {e}", path.display())))?;
        let text = std::str::from_utf8(&bytes).map_err(|e| CliError::Parse(format!("scenario is not UTF-8: {e}")))?;
        Ok((Self::from_json(text)?, bytes))
    }

    /// Suites in execution order, without duplicates.
    pub fn ordered_suites(&self) -> Vec<Suite> {
        Suite::ORDER.into_iter().filter(|s| self.suites.contains(s)).collect()
    }

    pub fn needs_seed(&self) -> bool {
        self.source.is_stochastic()
            || (self.suites.contains(&Suite::Isometry)
                && self.isometry.as_ref().is_some_and(IsometrySpec::is_stochastic))
    }

    fn validate(&self) -> Result<(), CliError> {
        if self.name.is_empty() || self.name.contains(['/', '\\']) {
            return Err(CliError::Parse(
                "scenario name must be non-empty and free of path separators".into(),
            ));
        }
        if self.suites.is_empty() {
            return Err(CliError::Parse("scenario lists no suites".into()));
        }
        if !(self.tolerances.d >= 0.0) {
            return Err(CliError::Parse("tolerance must be non-negative".into()));
        }
        for s in self.expect.keys() {
            if !self.suites.contains(s) {
                return Err(CliError::Parse(format!("expectation for suite `{s}` which is not run")));
            }
        }
        if let Source::Matrix { path, fixture } = &self.source {
            if path.is_some() == fixture.is_some() {
                return Err(CliError::Parse(
                    "matrix source needs exactly one of `path` and `fixture`".into(),
                ));
            }
        }
        let model = match &self.source {
            Source::Model { model, .. } => Some(model),
            _ => None,
        };
        for &s in &self.suites {
            let ok = match s {
                Suite::Oracle => model.is_some(),
                Suite::Busemann | Suite::Isometry => model.is_some_and(ModelSpec::is_flat),
                _ => true,
            };
            if !ok {
                return Err(CliError::Parse(format!(
                    "suite `{s}` needs a flat model source (minkowski or flat_finsler){}",
                    if s == Suite::Oracle {
                        " or any catalog model"
                    } else {
                        ""
                    }
                )));
            }
        }
        if self.suites.contains(&Suite::Isometry) && self.isometry.is_none() {
            return Err(CliError::Parse("suite `isometry` needs an `isometry` block".into()));
        }
        if let Some(o) = &self.oracle {
            if o.resolutions.is_empty() || o.resolutions.iter().any(|&r| r < 2) {
                return Err(CliError::Parse("oracle resolutions must be at least 2".into()));
            }
        }
        Ok(())
    }
}
