//! Numerical laboratory for the weakly self-dual manifolds attached to the
//! polytope of `CP^n`.
//!
//! Modules, bottom-up: [`polytope`] (exact lattice algebra), [`ambient`]
//! (the self-dual structure on the fibred product), [`reduction`] (the reduced
//! manifolds and their WSD structure), [`maps`] (projections, `φ`, complex
//! structures, deformation flow) and [`metgeo`] (finite metric geometry).

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ambient;
pub mod error;
pub mod maps;
pub mod metgeo;
pub mod polytope;
pub mod reduction;
pub mod scalar;
pub mod wsd;

pub use error::{Error, Result};

pub type Polytope64 = polytope::Polytope<i64>;
pub type LatticeMaps64 = polytope::LatticeMaps<i64>;
pub type AmbientPoint64 = ambient::AmbientPoint<f64>;
pub type LevelSetSpec64 = reduction::LevelSetSpec<f64>;
pub type ReducedPoint64 = reduction::ReducedPoint<f64>;
pub type CPnPoint64 = maps::CPnPoint<f64>;
pub type HnPoint64 = maps::HnPoint<f64>;
pub type FiniteMetricSample64 = metgeo::FiniteMetricSample<f64>;
pub type FlatTorusSpec64 = metgeo::FlatTorusSpec<f64>;
