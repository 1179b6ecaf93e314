//! Finsler norms, sprays, and recovery of the norm from a distance.

mod busemann;
mod isometry;
mod norm;
mod quadraticity;
mod richardson;
mod spray;

pub use busemann::{busemann_mayer_first, busemann_mayer_second, default_schedule, FlatField, LimitEstimate};
pub use isometry::{isometry_check, IsometryReport, LinearStage, NormStage, StructureStage};
pub use norm::{FinslerNorm, NormKind, MAX_DRIFT};
pub use quadraticity::{quadraticity_test, QuadraticityReport};
pub use richardson::{halving_schedule, richardson, Richardson};
pub use spray::{
    exp_inverse, exp_jacobian, exp_map, exp_zero_section_probe, self_convergence, spray_flow, GeodesicState,
    JacobianReport, SelfConvergence, Spray,
};
