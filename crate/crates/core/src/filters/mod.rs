//! Gaussian-mixture LMB and δ-GLMB filters.
//!
//! The multi-sensor update is an iterated corrector: single-sensor updates
//! applied in sensor order. Each single-sensor update samples association
//! maps with a herded or stochastic Gibbs chain, and reports per-measurement
//! association probabilities that drive adaptive birth for the next step.

mod assignment;
mod update;

pub use assignment::AssignmentProblem;
pub use update::{update_one_sensor, SensorUpdate};

use log::{debug, warn};
use serde::{Deserialize, Serialize};

use crate::birth::{adaptive_birth, AssociationProbabilities, BirthConfig};
use crate::error::{Error, Result};
use crate::gibbs::{ChainStats, GibbsConfig};
use crate::models::{predict_component, MeasurementFrame, MotionModel, SensorModel};
use crate::rfs::{
    extract_glmb, extract_lmb, prune_lmb, Estimate, GlmbDensity, GlmbTrack, LabeledTrack,
    LmbDensity, PruneConfig,
};
use crate::rng::derive_seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FilterKind {
    Lmb,
    Glmb,
}

impl std::fmt::Display for FilterKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            FilterKind::Lmb => "lmb",
            FilterKind::Glmb => "glmb",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FilterConfig {
    pub kind: FilterKind,
    pub update: GibbsConfig,
    pub birth: BirthConfig,
    pub prune: PruneConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FilterDensity {
    Lmb(LmbDensity),
    Glmb(GlmbDensity),
}

impl FilterDensity {
    pub fn empty(kind: FilterKind) -> Self {
        match kind {
            FilterKind::Lmb => FilterDensity::Lmb(LmbDensity::empty()),
            FilterKind::Glmb => FilterDensity::Glmb(GlmbDensity::empty()),
        }
    }

    pub fn estimates(&self) -> Vec<Estimate> {
        match self {
            FilterDensity::Lmb(d) => extract_lmb(d),
            FilterDensity::Glmb(d) => extract_glmb(d),
        }
    }
}

fn predict_track(t: &LabeledTrack, motion: &MotionModel) -> LabeledTrack {
    LabeledTrack::new(
        t.label.clone(),
        t.existence * motion.survival_probability,
        t.mixture.iter().map(|c| predict_component(c, motion)).collect(),
    )
}

/// Chapman-Kolmogorov prediction plus union with the birth LMB.
///
/// For a δ-GLMB the survival probability is stored as the existence of each
/// table entry and the birth tracks are added to every hypothesis; the next
/// update decides survival through its death column.
pub fn predict(density: &FilterDensity, motion: &MotionModel, birth: &LmbDensity) -> Result<FilterDensity> {
    match density {
        FilterDensity::Lmb(lmb) => {
            let tracks = lmb
                .tracks()
                .iter()
                .map(|t| predict_track(t, motion))
                .chain(birth.tracks().iter().cloned())
                .collect();
            Ok(FilterDensity::Lmb(LmbDensity::new(tracks)?))
        }
        FilterDensity::Glmb(glmb) => {
            if let Some(t) = birth
                .tracks()
                .iter()
                .find(|b| glmb.tracks.iter().any(|t| t.label == b.label))
            {
                return Err(Error::LabelCollision(t.label.to_string()));
            }
            let mut tracks: Vec<GlmbTrack> = glmb
                .tracks
                .iter()
                .map(|t| GlmbTrack {
                    label: t.label.clone(),
                    existence: t.existence * motion.survival_probability,
                    mixture: t.mixture.iter().map(|c| predict_component(c, motion)).collect(),
                    history: t.history.clone(),
                })
                .collect();
            let first_birth = tracks.len();
            tracks.extend(birth.tracks().iter().map(|b| GlmbTrack {
                label: b.label.clone(),
                existence: b.existence,
                mixture: b.mixture.clone(),
                history: Vec::new(),
            }));
            let mut hypotheses = glmb.hypotheses.clone();
            for h in &mut hypotheses {
                h.tracks.extend(first_birth..tracks.len());
                h.tracks.sort_by(|&a, &b| tracks[a].label.cmp(&tracks[b].label));
            }
            Ok(FilterDensity::Glmb(GlmbDensity { hypotheses, tracks }))
        }
    }
}

#[derive(Debug, Clone)]
pub struct StepOutput {
    pub time: usize,
    pub estimates: Vec<Estimate>,
    pub association: AssociationProbabilities,
    /// Number of tracks in the birth LMB prepared for the next step.
    pub births: usize,
    pub birth_stats: ChainStats,
}

/// A filter instance: current posterior plus the birth LMB built from the
/// last frame.
#[derive(Debug, Clone)]
pub struct Tracker {
    config: FilterConfig,
    motion: MotionModel,
    sensors: Vec<SensorModel>,
    density: FilterDensity,
    pending_birth: LmbDensity,
}

impl Tracker {
    pub fn new(config: FilterConfig, motion: MotionModel, sensors: Vec<SensorModel>) -> Result<Self> {
        if sensors.is_empty() {
            return Err(Error::Config("sensors: at least one sensor is required".into()));
        }
        Ok(Self {
            density: FilterDensity::empty(config.kind),
            config,
            motion,
            sensors,
            pending_birth: LmbDensity::empty(),
        })
    }

    pub fn density(&self) -> &FilterDensity {
        &self.density
    }

    pub fn pending_birth(&self) -> &LmbDensity {
        &self.pending_birth
    }

    pub fn config(&self) -> &FilterConfig {
        &self.config
    }

    /// Predict, update with every sensor of `frame`, extract estimates and
    /// build the birth LMB for the next step from this frame.
    pub fn step(&mut self, frame: &MeasurementFrame) -> Result<StepOutput> {
        if frame.sensors() != self.sensors.len() {
            return Err(Error::DimensionMismatch {
                expected: self.sensors.len(),
                found: frame.sensors(),
            });
        }
        let k = frame.time;
        let predicted = predict(&self.density, &self.motion, &self.pending_birth)?;
        let mut association = Vec::with_capacity(self.sensors.len());
        let mut density = predicted;
        for (s, sensor) in self.sensors.iter().enumerate() {
            let sampler = GibbsConfig {
                seed: derive_seed(self.config.update.seed, &[k as u64, s as u64]),
                ..self.config.update.clone()
            };
            let glmb = match &density {
                FilterDensity::Lmb(lmb) => GlmbDensity::from_lmb(lmb),
                FilterDensity::Glmb(g) => g.clone(),
            };
            let up = update_one_sensor(&glmb, &frame.per_sensor[s], sensor, s, &sampler, &self.config.prune)?;
            association.push(up.association);
            density = match self.config.kind {
                FilterKind::Lmb => FilterDensity::Lmb(up.density.to_lmb(self.config.prune.max_components)),
                FilterKind::Glmb => FilterDensity::Glmb(up.density),
            };
        }
        if let FilterDensity::Lmb(lmb) = density {
            density = FilterDensity::Lmb(prune_lmb(lmb, &self.config.prune));
        }
        let estimates = density.estimates();
        let association = AssociationProbabilities::new(association);

        let birth_config = BirthConfig {
            sampler: GibbsConfig {
                seed: derive_seed(self.config.birth.sampler.seed, &[k as u64]),
                ..self.config.birth.sampler.clone()
            },
            ..self.config.birth.clone()
        };
        let (births, birth_stats) =
            match adaptive_birth(frame, &self.sensors, &association, &birth_config, &self.motion, k) {
                Ok(out) => (prune_lmb(out.lmb, &self.config.prune), out.stats),
                Err(Error::Evaluator { source, .. }) if matches!(*source, Error::DegenerateConditional { .. }) => {
                    warn!("step {k}: birth conditionals degenerate, no births");
                    (LmbDensity::empty(), ChainStats::default())
                }
                Err(e) => return Err(e),
            };
        debug!(
            "step {k}: {} estimates, {} births, {} evaluator calls",
            estimates.len(),
            births.len(),
            birth_stats.evaluator_calls
        );
        self.density = density;
        self.pending_birth = births;
        Ok(StepOutput {
            time: k,
            estimates,
            association,
            births: self.pending_birth.len(),
            birth_stats,
        })
    }
}
