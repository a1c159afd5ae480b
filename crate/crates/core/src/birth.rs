//! Multi-sensor measurement-adaptive birth.
//!
//! A birth candidate is a measurement tuple `J` (one index per sensor, `0`
//! for a miss). It is scored by `r_U(J) · ψ̄(J)`, where `ψ̄` is the birth
//! prior integrated against the product of per-sensor pseudolikelihoods and
//! `r_U` the probability that none of its measurements belongs to an existing
//! track. Enumerating all tuples is exponential in the sensor count, so a
//! Gibbs chain over tuples (see [`crate::gibbs`]) picks the candidates.
//!
//! Everything is evaluated in the log domain: with many sensors `ψ̄` spans
//! hundreds of orders of magnitude.

use crate::error::{Error, Result};
use crate::gibbs::{ChainStats, ConditionalEvaluator, GibbsConfig, GibbsSampler};
use crate::models::{
    clutter_intensity, log_measurement_marginal, predict_component, BirthPrior, MeasurementFrame,
    MotionModel, SensorModel,
};
use crate::rfs::{GaussianComponent, Label, LabeledTrack, LmbDensity, MeasurementTuple};

/// Upper clamp margin for association probabilities.
pub const ASSOCIATION_EPSILON: f64 = 1e-6;

/// Per-sensor probability that each measurement is explained by an existing
/// track. Entries are clamped to `[0, 1 - ASSOCIATION_EPSILON]`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AssociationProbabilities {
    per_sensor: Vec<Vec<f64>>,
}

impl AssociationProbabilities {
    pub fn new(per_sensor: Vec<Vec<f64>>) -> Self {
        let per_sensor = per_sensor
            .into_iter()
            .map(|v| v.into_iter().map(clamp_association).collect())
            .collect();
        Self { per_sensor }
    }

    /// No measurement is associated with any track.
    pub fn unassociated(frame: &MeasurementFrame) -> Self {
        Self {
            per_sensor: frame.per_sensor.iter().map(|z| vec![0.0; z.len()]).collect(),
        }
    }

    pub fn sensors(&self) -> usize {
        self.per_sensor.len()
    }

    pub fn sensor(&self, s: usize) -> &[f64] {
        &self.per_sensor[s]
    }

    /// `1 - r_A(j)` for `j >= 1`; `1` for the miss index.
    pub fn unassociated_probability(&self, s: usize, j: usize) -> f64 {
        match j {
            0 => 1.0,
            j => 1.0 - self.per_sensor[s][j - 1],
        }
    }
}

pub fn clamp_association(r: f64) -> f64 {
    r.clamp(0.0, 1.0 - ASSOCIATION_EPSILON)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BirthConfig {
    pub r_b_max: f64,
    pub lambda_b: f64,
    pub psi_bar_cap: f64,
    pub prior: BirthPrior,
    /// Tuple sampler; `sampler.iterations` is the number of Gibbs sweeps.
    pub sampler: GibbsConfig,
}

impl BirthConfig {
    pub fn log_cap(&self) -> f64 {
        self.psi_bar_cap.ln()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BirthCandidate {
    pub tuple: MeasurementTuple,
    /// `ψ̄`, capped.
    pub psi_bar: f64,
    pub log_psi_bar: f64,
    /// Birth density conditioned on the tuple, at the measurement time.
    pub posterior: GaussianComponent,
    pub non_association: f64,
    pub r_hat: f64,
    pub r_birth: f64,
}

fn check_index(frame: &MeasurementFrame, s: usize, j: usize) -> Result<()> {
    let count = frame.count(s);
    if j > count {
        return Err(Error::IndexOutOfRange {
            sensor: s,
            index: j,
            count,
        });
    }
    Ok(())
}

/// Log pseudolikelihood of measurement `j` (or a miss for `j = 0`) of sensor
/// `s`, and the density conditioned on it.
pub fn log_pseudolikelihood(
    density: &GaussianComponent,
    sensor: &SensorModel,
    s: usize,
    j: usize,
    frame: &MeasurementFrame,
) -> Result<(f64, GaussianComponent)> {
    check_index(frame, s, j)?;
    let pd = sensor.detection_probability;
    let Some(z) = frame.measurement(s, j) else {
        return Ok(((1.0 - pd).ln(), density.clone()));
    };
    let kappa = clutter_intensity(z, sensor);
    if !(kappa > 0.0) {
        return Err(Error::InvalidMeasurement {
            sensor: s,
            index: j,
        });
    }
    let (log_g, conditioned) = log_measurement_marginal(density, z, sensor)?;
    Ok((pd.ln() + log_g - kappa.ln(), conditioned))
}

pub fn per_sensor_pseudolikelihood(
    density: &GaussianComponent,
    sensor: &SensorModel,
    s: usize,
    j: usize,
    frame: &MeasurementFrame,
) -> Result<(f64, GaussianComponent)> {
    log_pseudolikelihood(density, sensor, s, j, frame).map(|(l, c)| (l.exp(), c))
}

fn check_tuple(tuple: &MeasurementTuple, frame: &MeasurementFrame, sensors: &[SensorModel]) -> Result<()> {
    if tuple.len() != sensors.len() || frame.sensors() != sensors.len() {
        return Err(Error::DimensionMismatch {
            expected: sensors.len(),
            found: tuple.len().min(frame.sensors()),
        });
    }
    Ok(())
}

/// Fold the pseudolikelihoods of `sensor_order` into the prior.
fn fold_sensors(
    start: GaussianComponent,
    tuple: &[usize],
    frame: &MeasurementFrame,
    sensors: &[SensorModel],
    sensor_order: impl IntoIterator<Item = usize>,
) -> Result<(f64, GaussianComponent)> {
    let mut log_value = 0.0;
    let mut density = start;
    for s in sensor_order {
        let (l, next) = log_pseudolikelihood(&density, &sensors[s], s, tuple[s], frame)?;
        log_value += l;
        density = next;
    }
    Ok((log_value, density))
}

/// `ln ψ̄(J)` and the birth density conditioned on `Z_J`.
pub fn log_psi_bar(
    tuple: &MeasurementTuple,
    frame: &MeasurementFrame,
    prior: &BirthPrior,
    sensors: &[SensorModel],
) -> Result<(f64, GaussianComponent)> {
    check_tuple(tuple, frame, sensors)?;
    fold_sensors(prior.component(), tuple.indices(), frame, sensors, 0..sensors.len())
}

/// Same as [`log_psi_bar`] with an explicit sensor fold order.
pub fn log_psi_bar_ordered(
    tuple: &MeasurementTuple,
    frame: &MeasurementFrame,
    prior: &BirthPrior,
    sensors: &[SensorModel],
    order: &[usize],
) -> Result<(f64, GaussianComponent)> {
    check_tuple(tuple, frame, sensors)?;
    fold_sensors(prior.component(), tuple.indices(), frame, sensors, order.iter().copied())
}

pub fn psi_bar(
    tuple: &MeasurementTuple,
    frame: &MeasurementFrame,
    prior: &BirthPrior,
    sensors: &[SensorModel],
) -> Result<(f64, GaussianComponent)> {
    log_psi_bar(tuple, frame, prior, sensors).map(|(l, c)| (l.exp(), c))
}

/// `∏_{s: j_s ≠ 0} (1 - r_A(j_s))`.
pub fn non_association_probability(tuple: &MeasurementTuple, assoc: &AssociationProbabilities) -> f64 {
    tuple
        .indices()
        .iter()
        .enumerate()
        .map(|(s, &j)| assoc.unassociated_probability(s, j))
        .product()
}

fn softmax(log_weights: &[f64], coordinate: usize) -> Result<Vec<f64>> {
    let max = log_weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return Err(Error::DegenerateConditional { coordinate });
    }
    let exp: Vec<f64> = log_weights.iter().map(|l| (l - max).exp()).collect();
    let total: f64 = exp.iter().sum();
    Ok(exp.into_iter().map(|e| e / total).collect())
}

/// Conditional of `j_s` given the other entries of `tuple`, by direct
/// evaluation of `ψ̄` for every alternative.
#[allow(clippy::too_many_arguments)]
pub fn gibbs_conditional(
    s: usize,
    tuple: &MeasurementTuple,
    frame: &MeasurementFrame,
    prior: &BirthPrior,
    sensors: &[SensorModel],
    assoc: &AssociationProbabilities,
    psi_bar_cap: f64,
) -> Result<Vec<f64>> {
    let log_cap = psi_bar_cap.ln();
    let mut candidate = tuple.clone();
    let logs = (0..=frame.count(s))
        .map(|j| {
            candidate.0[s] = j;
            let (lp, _) = log_psi_bar(&candidate, frame, prior, sensors)?;
            Ok(assoc.unassociated_probability(s, j).ln() + lp.min(log_cap))
        })
        .collect::<Result<Vec<f64>>>()?;
    softmax(&logs, s)
}

/// Conditional evaluator over measurement tuples. The other sensors are
/// folded into the prior once, then each alternative for sensor `s` costs a
/// single Kalman update.
pub struct BirthEvaluator<'a> {
    pub frame: &'a MeasurementFrame,
    pub sensors: &'a [SensorModel],
    pub prior: &'a BirthPrior,
    pub assoc: &'a AssociationProbabilities,
    pub log_cap: f64,
}

impl ConditionalEvaluator for BirthEvaluator<'_> {
    fn coordinates(&self) -> usize {
        self.sensors.len()
    }

    fn conditional(&self, state: &[usize], s: usize) -> Result<Vec<f64>> {
        let others = (0..self.sensors.len()).filter(|&o| o != s);
        let (base, conditioned) = fold_sensors(self.prior.component(), state, self.frame, self.sensors, others)?;
        let logs = (0..=self.frame.count(s))
            .map(|j| {
                let (l, _) = log_pseudolikelihood(&conditioned, &self.sensors[s], s, j, self.frame)?;
                Ok(self.assoc.unassociated_probability(s, j).ln() + (base + l).min(self.log_cap))
            })
            .collect::<Result<Vec<f64>>>()?;
        softmax(&logs, s)
    }
}

/// Score tuples: capped `ψ̄`, conditioned posterior and `r_U`.
pub fn score_candidates(
    tuples: impl IntoIterator<Item = MeasurementTuple>,
    frame: &MeasurementFrame,
    sensors: &[SensorModel],
    assoc: &AssociationProbabilities,
    config: &BirthConfig,
) -> Result<Vec<BirthCandidate>> {
    tuples
        .into_iter()
        .map(|tuple| {
            let (lp, posterior) = log_psi_bar(&tuple, frame, &config.prior, sensors)?;
            let log_psi_bar = lp.min(config.log_cap());
            Ok(BirthCandidate {
                non_association: non_association_probability(&tuple, assoc),
                tuple,
                psi_bar: log_psi_bar.exp(),
                log_psi_bar,
                posterior,
                r_hat: 0.0,
                r_birth: 0.0,
            })
        })
        .collect()
}

/// `r̂` normalized over the given candidate set.
pub fn effective_birth_probabilities(candidates: &[BirthCandidate]) -> Vec<f64> {
    let logs: Vec<f64> = candidates
        .iter()
        .map(|c| c.non_association.ln() + c.log_psi_bar)
        .collect();
    let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return vec![0.0; candidates.len()];
    }
    let exp: Vec<f64> = logs.iter().map(|l| (l - max).exp()).collect();
    let total: f64 = exp.iter().sum();
    exp.into_iter().map(|e| e / total).collect()
}

/// Fill in `r̂` and `r_B = min(r_B,max, r̂ λ_B)` and build the birth LMB for
/// time `k + 1`: labels `(k + 1, J)`, posteriors predicted one step.
pub fn construct_birth_lmb(
    candidates: &mut [BirthCandidate],
    config: &BirthConfig,
    motion: &MotionModel,
    k: usize,
) -> LmbDensity {
    if candidates.is_empty() {
        log::debug!("no birth candidates at step {k}");
        return LmbDensity::empty();
    }
    let r_hat = effective_birth_probabilities(candidates);
    let tracks = candidates
        .iter_mut()
        .zip(r_hat)
        .map(|(c, r)| {
            c.r_hat = r;
            c.r_birth = config.r_b_max.min(r * config.lambda_b);
            let mut predicted = predict_component(&c.posterior, motion);
            predicted.weight = 1.0;
            LabeledTrack::new(Label::adaptive(k + 1, c.tuple.clone()), c.r_birth, vec![predicted])
        })
        .collect();
    // Tuples are unique, so labels are too.
    LmbDensity::new(tracks).expect("unique birth tuples")
}

#[derive(Debug, Clone)]
pub struct BirthOutput {
    pub lmb: LmbDensity,
    pub candidates: Vec<BirthCandidate>,
    pub stats: ChainStats,
}

/// Sample tuples with a Gibbs chain from the all-miss tuple, score them and
/// assemble the birth LMB for the next step.
pub fn adaptive_birth(
    frame: &MeasurementFrame,
    sensors: &[SensorModel],
    assoc: &AssociationProbabilities,
    config: &BirthConfig,
    motion: &MotionModel,
    k: usize,
) -> Result<BirthOutput> {
    let evaluator = BirthEvaluator {
        frame,
        sensors,
        prior: &config.prior,
        assoc,
        log_cap: config.log_cap(),
    };
    let mut sampler = GibbsSampler::new(config.sampler.clone());
    let chain = sampler.run(&evaluator, &vec![0; sensors.len()])?;
    let mut candidates = score_candidates(
        chain.states.into_iter().map(MeasurementTuple),
        frame,
        sensors,
        assoc,
        config,
    )?;
    let lmb = construct_birth_lmb(&mut candidates, config, motion, k);
    Ok(BirthOutput {
        lmb,
        candidates,
        stats: chain.stats,
    })
}
