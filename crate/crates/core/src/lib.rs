//! Slippery-cross-slope navigation: a Finsler metric defined implicitly by a
//! quartic, its spray, time-minimizing geodesics and indicatrices on graph
//! surfaces.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod geometry;
pub mod indicatrix;
pub mod ode;
pub mod policy;
pub mod poly;
pub mod slope_metric;
pub mod spray;
pub mod trajectories;

pub use error::{Error, Result};
pub use geometry::{Coordinates, HeightFunction, Mat2, MetricTensor, Surface, SurfaceChart, Vec2};
pub use policy::NumericPolicy;
pub use slope_metric::{ConvexityGate, NavigationSetup};
