//! Rearrangements of the flat torus: geometry, a zoo of explicit maps and
//! flows, a multiscale mixing analyzer, and energy lower bounds.
//!
//! Everything is generic over [`Scalar`] (`f32` or `f64`); the aliases below
//! fix `f64`.

pub mod energy;
pub mod error;
pub mod flow;
pub mod geometry;
pub mod jacobian;
pub mod maps;
pub mod mixing;
pub mod scalar;
pub mod tolerances;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Point = geometry::TorusPoint<f64>;
pub type Field = geometry::ScalarField<f64>;
pub type Jacobian = jacobian::Jacobian2<f64>;
pub type Map = maps::MapDescriptor<f64>;
pub type MapStage = maps::Stage<f64>;
pub type Velocity = flow::VectorField<f64>;
pub type Flow = flow::FlowSpec<f64>;
pub type Constants = energy::BoundConstants<f64>;
