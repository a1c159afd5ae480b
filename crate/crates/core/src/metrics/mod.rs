//! OSPA and OSPA(2) evaluation metrics.

mod hungarian;
mod ospa;

pub use hungarian::min_cost_assignment;
pub use ospa::{ospa, ospa2, ospa2_series, position, MetricConfig, TrajectorySet, TrajectoryWindow};
