// Negated comparisons are how NaN inputs get rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

//! Solar-aware UAV path planning and reactive collision avoidance.

pub mod cli;
pub mod control;
pub mod energy;
pub mod env;
pub mod geometry;
pub mod grid;
pub mod planners;
pub mod sim;

pub use geometry::Vec3;
