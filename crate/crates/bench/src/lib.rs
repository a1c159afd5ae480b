//! Benchmark fixtures built from the desk scenario.

use herdtrack::birth::{AssociationProbabilities, BirthConfig};
use herdtrack::filters::{predict, FilterDensity};
use herdtrack::gibbs::SamplerMode;
use herdtrack::models::{MeasurementFrame, MotionModel, SensorModel};
use herdtrack::rfs::GlmbDensity;
use herdtrack::{simulate, FilterKind, ModeSpec, ScenarioConfig, Simulation, Tracker};

const DESK: &str = include_str!("../../../scenarios/desk.toml");

pub fn desk() -> ScenarioConfig {
    ScenarioConfig::from_toml_str(DESK).expect("desk scenario parses")
}

/// A tracker run up to `step` on one desk simulation, with the frame it
/// will see next.
pub struct Warm {
    pub config: ScenarioConfig,
    pub sim: Simulation,
    pub tracker: Tracker,
    pub step: usize,
}

impl Warm {
    pub fn new(filter: FilterKind, birth: SamplerMode, update: SamplerMode, step: usize) -> Self {
        let config = desk();
        let sim = simulate(&config, config.seed).expect("simulation");
        let mode = ModeSpec { filter, birth, update };
        let mut tracker = Tracker::new(config.filter_config(mode, config.seed), config.motion_model(), config.sensor_models())
            .expect("tracker");
        for frame in &sim.frames[..step] {
            tracker.step(frame).expect("warm-up step");
        }
        Self {
            config,
            sim,
            tracker,
            step,
        }
    }

    pub fn frame(&self) -> &MeasurementFrame {
        &self.sim.frames[self.step]
    }

    pub fn sensors(&self) -> Vec<SensorModel> {
        self.config.sensor_models()
    }

    pub fn motion(&self) -> MotionModel {
        self.config.motion_model()
    }

    /// Predicted density for the next frame, as a δ-GLMB.
    pub fn predicted(&self) -> GlmbDensity {
        match predict(self.tracker.density(), &self.motion(), self.tracker.pending_birth()).expect("prediction") {
            FilterDensity::Lmb(lmb) => GlmbDensity::from_lmb(&lmb),
            FilterDensity::Glmb(g) => g,
        }
    }

    pub fn birth_config(&self, mode: SamplerMode) -> BirthConfig {
        let mut birth = self.tracker.config().birth.clone();
        birth.sampler.mode = mode;
        birth
    }

    pub fn unassociated(&self) -> AssociationProbabilities {
        AssociationProbabilities::unassociated(self.frame())
    }
}
