//! Labeled random-finite-set densities: Gaussian mixtures, labels, LMB and
//! δ-GLMB densities, with pruning and state extraction.

mod density;
mod gaussian;
mod label;

pub use density::{
    extract_glmb, extract_lmb, normalize_hypotheses, prune_glmb, prune_lmb, Estimate,
    GlmbDensity, GlmbHypothesis, GlmbTrack, LabeledTrack, LmbDensity, PruneConfig,
};
pub use gaussian::{
    cap_mixture, min_eigenvalue, mixture_mean, normalize_mixture, symmetrize,
    GaussianComponent, Measurement, MeasurementCovariance, MeasurementMatrix, StateMatrix,
    StateVector,
};
pub use label::{Label, LabelOrigin, MeasurementTuple};
