//! Periodic geometry on the unit torus: points, metric, balls, sampled fields
//! and midpoint quadrature.

mod ball;
mod field;
mod point;

pub use ball::{ball_fraction, Ball, BallCounter, BallCount, MIN_CELLS_PER_BALL};
pub use field::{cell_center, integrate, IndicatorField, ScalarField};
pub use point::{torus_delta, torus_dist, wrap, wrap_coord, TorusPoint};
