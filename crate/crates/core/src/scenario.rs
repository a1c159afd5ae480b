//! Scenario configuration (TOML) and the seeded truth/measurement simulator.

use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Normal, Poisson};
use serde::{Deserialize, Serialize};

use crate::birth::BirthConfig;
use crate::error::{Error, Result};
use crate::filters::{FilterConfig, FilterKind};
use crate::gibbs::{GibbsConfig, SamplerMode};
use crate::metrics::MetricConfig;
use crate::models::{BirthPrior, MeasurementFrame, MotionModel, Region, SensorModel};
use crate::rfs::{Measurement, PruneConfig, StateMatrix, StateVector};
use crate::rng::{derive_seed, rng_from_seed};

const TAG_TRUTH: u64 = 1;
const TAG_MEASUREMENTS: u64 = 2;
const TAG_UPDATE: u64 = 3;
const TAG_BIRTH: u64 = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub horizon: usize,
    #[serde(default = "default_runs")]
    pub runs: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub motion: MotionSection,
    pub sensors: Option<Vec<SensorSection>>,
    #[serde(default)]
    pub birth: BirthSection,
    #[serde(default)]
    pub update: UpdateSection,
    #[serde(default)]
    pub filter: FilterSection,
    #[serde(default)]
    pub prune: PruneSection,
    #[serde(default)]
    pub metric: MetricConfig,
    #[serde(default)]
    pub truth: TruthSection,
    #[serde(default)]
    pub targets: Vec<TargetSection>,
    #[serde(default)]
    pub campaign: CampaignSection,
}

fn default_runs() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MotionSection {
    pub delta_t: f64,
    /// Acceleration noise variance per axis.
    pub process_noise: [f64; 2],
    pub survival_probability: f64,
}

impl Default for MotionSection {
    fn default() -> Self {
        Self {
            delta_t: 1.0,
            process_noise: [5.0, 5.0],
            survival_probability: 0.99,
        }
    }
}

/// `count` identical position sensors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensorSection {
    #[serde(default = "one")]
    pub count: usize,
    pub detection_probability: f64,
    /// Diagonal of the measurement noise covariance.
    pub noise: [f64; 2],
    pub clutter_rate: f64,
    #[serde(default)]
    pub region: Region,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BirthSection {
    pub r_max: f64,
    pub lambda: f64,
    pub psi_bar_cap: f64,
    pub mean: [f64; 4],
    /// Diagonal of the prior covariance.
    pub covariance: [f64; 4],
    pub iterations: usize,
    pub mode: SamplerMode,
    pub cycling: bool,
}

impl Default for BirthSection {
    fn default() -> Self {
        Self {
            r_max: 0.1,
            lambda: 2.0,
            psi_bar_cap: 1e4,
            mean: [0.0; 4],
            covariance: [1e10, 2500.0, 1e10, 2500.0],
            iterations: 250,
            mode: SamplerMode::Herded,
            cycling: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UpdateSection {
    pub iterations: usize,
    pub mode: SamplerMode,
    pub cycling: bool,
}

impl Default for UpdateSection {
    fn default() -> Self {
        Self {
            iterations: 250,
            mode: SamplerMode::Herded,
            cycling: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FilterSection {
    pub kind: FilterKind,
}

impl Default for FilterSection {
    fn default() -> Self {
        Self { kind: FilterKind::Glmb }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PruneSection {
    pub hypothesis_threshold: f64,
    pub max_hypotheses: usize,
    pub existence_threshold: f64,
    pub max_components: usize,
}

impl Default for PruneSection {
    fn default() -> Self {
        let p = PruneConfig::default();
        Self {
            hypothesis_threshold: p.hypothesis_threshold,
            max_hypotheses: p.max_hypotheses,
            existence_threshold: p.existence_threshold,
            max_components: p.max_components,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TruthSection {
    /// Drive the truth with the motion model's process noise instead of
    /// exact constant velocity.
    pub process_noise: bool,
}

/// A target present for `birth <= k < death` (death defaults to the horizon).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetSection {
    pub birth: usize,
    pub death: Option<usize>,
    /// `[p_x, v_x, p_y, v_y]` at the birth step.
    pub state: [f64; 4],
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CampaignSection {
    pub modes: Vec<ModeSpec>,
}

/// Filter kind plus the sampler used in each of the two Gibbs steps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeSpec {
    pub filter: FilterKind,
    pub birth: SamplerMode,
    pub update: SamplerMode,
}

impl std::fmt::Display for ModeSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}/{}/{}", self.filter, self.birth, self.update)
    }
}

impl ModeSpec {
    /// Apply an override of the form `mode`, `birth/update` or
    /// `filter/birth/update`.
    pub fn with_override(self, spec: &str) -> Result<Self> {
        let bad = || Error::Config(format!("--mode: cannot parse '{spec}'"));
        let parts: Vec<&str> = spec.split('/').map(str::trim).collect();
        let sampler = |s: &str| s.parse::<SamplerMode>().map_err(|_| bad());
        match parts.as_slice() {
            [m] => {
                let m = sampler(m)?;
                Ok(Self { birth: m, update: m, ..self })
            }
            [b, u] => Ok(Self {
                birth: sampler(b)?,
                update: sampler(u)?,
                ..self
            }),
            [f, b, u] => Ok(Self {
                filter: match *f {
                    "lmb" => FilterKind::Lmb,
                    "glmb" => FilterKind::Glmb,
                    _ => return Err(bad()),
                },
                birth: sampler(b)?,
                update: sampler(u)?,
            }),
            _ => Err(bad()),
        }
    }
}

fn line_of(source: &str, offset: usize) -> usize {
    source[..offset.min(source.len())].matches('\n').count() + 1
}

impl ScenarioConfig {
    pub fn from_toml_str(source: &str) -> Result<Self> {
        let config: Self = toml::from_str(source).map_err(|e| Error::Parse {
            line: e.span().map(|s| line_of(source, s.start)).unwrap_or(0),
            message: e.message().to_string(),
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let source = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&source)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("scenario config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        fn check(ok: bool, key: &str, what: &str) -> Result<()> {
            if ok {
                Ok(())
            } else {
                Err(Error::Config(format!("{key}: {what}")))
            }
        }
        let unit_open = |x: f64| x > 0.0 && x < 1.0;

        let sensors = self
            .sensors
            .as_ref()
            .ok_or_else(|| Error::Config("sensors: required".into()))?;
        check(!sensors.is_empty(), "sensors", "at least one sensor block is required")?;
        for (i, s) in sensors.iter().enumerate() {
            let key = |f: &str| format!("sensors[{i}].{f}");
            check(s.count >= 1, &key("count"), "must be at least 1")?;
            check(unit_open(s.detection_probability), &key("detection_probability"), "must lie in (0, 1)")?;
            check(s.noise.iter().all(|&v| v > 0.0), &key("noise"), "variances must be positive")?;
            check(s.clutter_rate > 0.0, &key("clutter_rate"), "must be positive")?;
            check(
                s.region.x[0] < s.region.x[1] && s.region.y[0] < s.region.y[1],
                &key("region"),
                "bounds must be increasing",
            )?;
        }

        let m = &self.motion;
        check(m.delta_t > 0.0, "motion.delta_t", "must be positive")?;
        check(m.process_noise.iter().all(|&v| v >= 0.0), "motion.process_noise", "must be non-negative")?;
        check(unit_open(m.survival_probability), "motion.survival_probability", "must lie in (0, 1)")?;

        let b = &self.birth;
        check(unit_open(b.r_max), "birth.r_max", "must lie in (0, 1)")?;
        check(b.lambda > 0.0, "birth.lambda", "must be positive")?;
        check(b.psi_bar_cap > 0.0, "birth.psi_bar_cap", "must be positive")?;
        check(b.covariance.iter().all(|&v| v > 0.0), "birth.covariance", "variances must be positive")?;
        check(b.iterations >= 1, "birth.iterations", "must be at least 1")?;
        check(self.update.iterations >= 1, "update.iterations", "must be at least 1")?;

        let p = &self.prune;
        check(
            (0.0..1.0).contains(&p.hypothesis_threshold),
            "prune.hypothesis_threshold",
            "must lie in [0, 1)",
        )?;
        check(p.max_hypotheses >= 1, "prune.max_hypotheses", "must be at least 1")?;
        check(
            (0.0..1.0).contains(&p.existence_threshold),
            "prune.existence_threshold",
            "must lie in [0, 1)",
        )?;
        check(p.max_components >= 1, "prune.max_components", "must be at least 1")?;

        self.metric.validate()?;
        check(self.runs >= 1, "runs", "must be at least 1")?;
        for (i, t) in self.targets.iter().enumerate() {
            if let Some(death) = t.death {
                check(t.birth < death, &format!("targets[{i}].death"), "must come after birth")?;
            }
            check(t.state.iter().all(|v| v.is_finite()), &format!("targets[{i}].state"), "must be finite")?;
        }
        Ok(())
    }

    /// Sensor models with ids assigned in declaration order.
    pub fn sensor_models(&self) -> Vec<SensorModel> {
        self.sensors
            .iter()
            .flatten()
            .flat_map(|s| std::iter::repeat_n(s, s.count))
            .enumerate()
            .map(|(id, s)| SensorModel::position(id, s.noise, s.detection_probability, s.clutter_rate, s.region))
            .collect()
    }

    pub fn motion_model(&self) -> MotionModel {
        let m = &self.motion;
        MotionModel::constant_velocity(m.delta_t, m.process_noise, m.survival_probability)
    }

    pub fn prune_config(&self) -> PruneConfig {
        let p = &self.prune;
        PruneConfig {
            hypothesis_threshold: p.hypothesis_threshold,
            max_hypotheses: p.max_hypotheses,
            existence_threshold: p.existence_threshold,
            max_components: p.max_components,
        }
    }

    pub fn default_mode(&self) -> ModeSpec {
        ModeSpec {
            filter: self.filter.kind,
            birth: self.birth.mode,
            update: self.update.mode,
        }
    }

    /// Modes compared by a campaign; the configured mode when none are listed.
    pub fn campaign_modes(&self) -> Vec<ModeSpec> {
        if self.campaign.modes.is_empty() {
            vec![self.default_mode()]
        } else {
            self.campaign.modes.clone()
        }
    }

    /// Filter configuration for `mode`. Sampler seeds are derived from `seed`
    /// and only matter in stochastic mode.
    pub fn filter_config(&self, mode: ModeSpec, seed: u64) -> FilterConfig {
        let b = &self.birth;
        FilterConfig {
            kind: mode.filter,
            update: GibbsConfig {
                iterations: self.update.iterations,
                mode: mode.update,
                seed: derive_seed(seed, &[TAG_UPDATE]),
                cycling: self.update.cycling,
            },
            birth: BirthConfig {
                r_b_max: b.r_max,
                lambda_b: b.lambda,
                psi_bar_cap: b.psi_bar_cap,
                prior: BirthPrior {
                    mean: StateVector::from(b.mean),
                    covariance: StateMatrix::from_diagonal(&StateVector::from(b.covariance)),
                },
                sampler: GibbsConfig {
                    iterations: b.iterations,
                    mode: mode.birth,
                    seed: derive_seed(seed, &[TAG_BIRTH]),
                    cycling: b.cycling,
                },
            },
            prune: self.prune_config(),
        }
    }
}

/// Ground truth and measurements of one simulated run.
#[derive(Debug, Clone, PartialEq)]
pub struct Simulation {
    pub sensors: usize,
    /// Per step, the `(target index, state)` of every live target.
    pub truth: Vec<Vec<(usize, StateVector)>>,
    pub frames: Vec<MeasurementFrame>,
}

impl Simulation {
    pub fn horizon(&self) -> usize {
        self.frames.len()
    }
}

/// Simulate the configured truth schedule and sensor returns. The output is
/// a pure function of `(config, seed)`.
pub fn simulate(config: &ScenarioConfig, seed: u64) -> Result<Simulation> {
    config.validate()?;
    let horizon = config.horizon;
    let motion = config.motion_model();
    let sensors = config.sensor_models();

    let mut truth: Vec<Vec<(usize, StateVector)>> = vec![Vec::new(); horizon];
    let mut truth_rng = rng_from_seed(derive_seed(seed, &[TAG_TRUTH]));
    let accel = [
        Normal::new(0.0, config.motion.process_noise[0].sqrt()).map_err(|_| Error::NumericalFailure)?,
        Normal::new(0.0, config.motion.process_noise[1].sqrt()).map_err(|_| Error::NumericalFailure)?,
    ];
    let dt = motion.delta_t;
    for (i, target) in config.targets.iter().enumerate() {
        let end = target.death.unwrap_or(horizon).min(horizon);
        let mut x = StateVector::from(target.state);
        for step in truth.iter_mut().take(end).skip(target.birth) {
            step.push((i, x));
            x = motion.transition * x;
            if config.truth.process_noise {
                let (ax, ay) = (accel[0].sample(&mut truth_rng), accel[1].sample(&mut truth_rng));
                x += StateVector::new(dt * dt / 2.0 * ax, dt * ax, dt * dt / 2.0 * ay, dt * ay);
            }
        }
    }

    let mut frames = Vec::with_capacity(horizon);
    for (k, live) in truth.iter().enumerate() {
        let mut per_sensor = Vec::with_capacity(sensors.len());
        for (s, sensor) in sensors.iter().enumerate() {
            let mut rng = rng_from_seed(derive_seed(seed, &[TAG_MEASUREMENTS, k as u64, s as u64]));
            let noise = [
                Normal::new(0.0, sensor.noise[(0, 0)].sqrt()).map_err(|_| Error::NumericalFailure)?,
                Normal::new(0.0, sensor.noise[(1, 1)].sqrt()).map_err(|_| Error::NumericalFailure)?,
            ];
            let mut zs: Vec<Measurement> = Vec::new();
            for (_, x) in live {
                if rng.random_bool(sensor.detection_probability) {
                    let z = sensor.observation * x
                        + Measurement::new(noise[0].sample(&mut rng), noise[1].sample(&mut rng));
                    if sensor.region.contains(&z) {
                        zs.push(z);
                    }
                }
            }
            let clutter = Poisson::new(sensor.clutter_rate).map_err(|_| Error::NumericalFailure)?;
            let n = clutter.sample(&mut rng) as usize;
            let r = sensor.region;
            for _ in 0..n {
                zs.push(Measurement::new(
                    rng.random_range(r.x[0]..r.x[1]),
                    rng.random_range(r.y[0]..r.y[1]),
                ));
            }
            zs.shuffle(&mut rng);
            per_sensor.push(zs);
        }
        frames.push(MeasurementFrame::new(k, per_sensor));
    }
    Ok(Simulation {
        sensors: sensors.len(),
        truth,
        frames,
    })
}
