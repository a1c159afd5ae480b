//! Multi-sensor multi-target tracking with labeled random finite sets.
//!
//! Gaussian-mixture LMB and δ-GLMB filters whose association and adaptive
//! birth steps are driven by herded (deterministic) or stochastic Gibbs
//! samplers, plus OSPA/OSPA(2) metrics and a seeded scenario simulator.

pub mod birth;
pub mod error;
pub mod experiment;
pub mod filters;
pub mod gibbs;
pub mod io;
pub mod metrics;
pub mod models;
pub mod rfs;
pub mod rng;
pub mod scenario;

pub use birth::{adaptive_birth, psi_bar, AssociationProbabilities, BirthCandidate, BirthConfig};
pub use error::{Error, Result};
pub use filters::{FilterConfig, FilterDensity, FilterKind, Tracker};
pub use gibbs::{sample_chain, ChainStats, GibbsConfig, SamplerMode};
pub use metrics::{ospa, ospa2, MetricConfig, TrajectorySet, TrajectoryWindow};
pub use models::{BirthPrior, MeasurementFrame, MotionModel, Region, SensorModel};
pub use rfs::{Estimate, Label, LmbDensity, GlmbDensity, Measurement, StateVector};
pub use scenario::{simulate, ModeSpec, ScenarioConfig, Simulation};
