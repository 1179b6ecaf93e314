//! Toolkit for Lorentzian distance functions: axioms, causality predicates,
//! order and topology reconstruction, and Finsler norm recovery.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod causal_set;
pub mod causality;
pub mod distance;
pub mod error;
pub mod finsler;
pub mod gate;
pub mod geom;
pub mod models;
pub mod scalar;
pub mod topology;

pub use distance::{DistanceMatrix, ExtReal, Relation};
pub use error::{DkitError, Result};
pub use geom::{CoordBox, Point, Vector};
pub use scalar::Scalar;

pub type ExtReal64 = ExtReal<f64>;
pub type DistanceMatrix64 = DistanceMatrix<f64>;
pub type Point64 = Point<f64>;
pub type CoordBox64 = CoordBox<f64>;
pub type FinslerNorm64 = finsler::FinslerNorm<f64>;
pub type SpacetimeModel64 = models::SpacetimeModel<f64>;
pub type SampleSpace64 = models::SampleSpace<f64>;
