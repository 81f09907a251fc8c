//! Sphere families with shortcut metrics on the closed unit ball of R³,
//! the chain pseudo-metric they induce, and a boundary construction that
//! turns functions on S² into ball metrics.

pub mod ball;
pub mod boundary;
pub mod chain;
pub mod error;
pub mod function;
pub mod geometry;
pub mod graph;
pub mod shortcut;
pub mod verify;

pub use ball::{estimate_distance, MetricEstimate};
pub use chain::{
    chain_cost, normalize_to_antipodal, segment_chain, Chain, ScaledSphere, SphereFamily,
};
pub use error::{Error, Result};
pub use function::BoundaryFunction;
pub use geometry::{Point3, SpherePose};
pub use graph::DiscretizationConfig;
pub use shortcut::{alpha, shortcut_distance, Branch, ShortcutParam};
