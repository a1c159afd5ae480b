use std::collections::HashMap;

use super::assignment::AssignmentProblem;
use crate::birth::clamp_association;
use crate::error::{Error, Result};
use crate::gibbs::{GibbsConfig, GibbsSampler};
use crate::models::{clutter_intensity, log_measurement_marginal, SensorModel};
use crate::rfs::{
    prune_glmb, GaussianComponent, GlmbDensity, GlmbHypothesis, GlmbTrack, Measurement, PruneConfig,
};
use crate::rng::derive_seed;

/// Column scores of one track plus its measurement-conditioned mixtures.
struct TrackScores {
    scores: Vec<f64>,
    updated: Vec<Vec<GaussianComponent>>,
}

fn log_sum_exp(values: impl IntoIterator<Item = f64>) -> f64 {
    let values: Vec<f64> = values.into_iter().collect();
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

fn score_track(
    track: &GlmbTrack,
    measurements: &[Measurement],
    log_kappa: &[f64],
    sensor: &SensorModel,
) -> Result<TrackScores> {
    let m = measurements.len();
    let pd = sensor.detection_probability;
    let r = track.existence;
    let mut scores = vec![f64::NEG_INFINITY; m + 2];
    scores[0] = r.ln() + (1.0 - pd).ln();
    scores[m + 1] = (1.0 - r).ln();
    let mut updated = Vec::with_capacity(m);
    for (j, z) in measurements.iter().enumerate() {
        let mut logs = Vec::with_capacity(track.mixture.len());
        let mut comps = Vec::with_capacity(track.mixture.len());
        for c in &track.mixture {
            let (l, post) = log_measurement_marginal(c, z, sensor)?;
            logs.push(c.weight.ln() + l);
            comps.push(post);
        }
        let total = log_sum_exp(logs.iter().copied());
        for (c, l) in comps.iter_mut().zip(&logs) {
            c.weight = (l - total).exp();
        }
        scores[j + 1] = r.ln() + pd.ln() + total - log_kappa[j];
        updated.push(comps);
    }
    Ok(TrackScores { scores, updated })
}

/// Result of a single-sensor update.
#[derive(Debug, Clone)]
pub struct SensorUpdate {
    pub density: GlmbDensity,
    /// `r_A(j)` for every measurement of the sensor, clamped.
    pub association: Vec<f64>,
    /// Hypotheses formed before pruning.
    pub hypotheses_formed: usize,
}

/// Update a δ-GLMB density with one sensor's measurements.
///
/// For every parent hypothesis an [`AssignmentProblem`] over its tracks is
/// explored with a Gibbs chain (`ceil(T · w)` sweeps for a parent of weight
/// `w`, at least one). Every distinct visited assignment becomes a posterior
/// hypothesis weighted by the parent weight times the product of its scores.
pub fn update_one_sensor(
    density: &GlmbDensity,
    measurements: &[Measurement],
    sensor: &SensorModel,
    sensor_index: usize,
    sampler: &GibbsConfig,
    prune: &PruneConfig,
) -> Result<SensorUpdate> {
    let m = measurements.len();
    let log_kappa = measurements
        .iter()
        .enumerate()
        .map(|(j, z)| {
            let k = clutter_intensity(z, sensor);
            if k > 0.0 {
                Ok(k.ln())
            } else {
                Err(Error::InvalidMeasurement {
                    sensor: sensor_index,
                    index: j + 1,
                })
            }
        })
        .collect::<Result<Vec<f64>>>()?;

    let mut referenced = vec![false; density.tracks.len()];
    for h in &density.hypotheses {
        for &i in &h.tracks {
            referenced[i] = true;
        }
    }
    let scored: Vec<Option<TrackScores>> = density
        .tracks
        .iter()
        .zip(&referenced)
        .map(|(t, &used)| used.then(|| score_track(t, measurements, &log_kappa, sensor)).transpose())
        .collect::<Result<_>>()?;

    let mut children: Vec<GlmbTrack> = Vec::new();
    let mut child_index: HashMap<(usize, usize), usize> = HashMap::new();
    let mut formed: Vec<(f64, Vec<usize>)> = Vec::new();
    let mut consumed: Vec<Vec<usize>> = Vec::new();

    for (p, parent) in density.hypotheses.iter().enumerate() {
        if !(parent.weight > 0.0) {
            continue;
        }
        let rows = &parent.tracks;
        let problem = AssignmentProblem::new(
            m,
            rows.iter()
                .map(|&i| scored[i].as_ref().expect("referenced").scores.clone())
                .collect(),
        )?;
        let Some(initial) = problem.initial_assignment() else {
            continue;
        };
        let sweeps = ((sampler.iterations as f64 * parent.weight).ceil() as usize).max(1);
        let config = GibbsConfig {
            iterations: sweeps,
            seed: derive_seed(sampler.seed, &[p as u64]),
            ..sampler.clone()
        };
        let mut assignments = vec![initial.clone()];
        if !rows.is_empty() {
            let chain = GibbsSampler::new(config).run(&problem, &initial)?;
            assignments.extend(chain.states.into_iter().filter(|a| *a != initial));
        }

        let log_parent = parent.weight.ln();
        for assignment in assignments {
            let mut tracks = Vec::with_capacity(rows.len());
            let mut used = Vec::new();
            for (&entry, &column) in rows.iter().zip(&assignment) {
                if column == problem.death_column() {
                    continue;
                }
                if problem.is_measurement(column) {
                    used.push(column);
                }
                let idx = *child_index.entry((entry, column)).or_insert_with(|| {
                    let parent_track = &density.tracks[entry];
                    let mixture = if column == 0 {
                        parent_track.mixture.clone()
                    } else {
                        scored[entry].as_ref().expect("referenced").updated[column - 1].clone()
                    };
                    let mut history = parent_track.history.clone();
                    history.push(column);
                    children.push(GlmbTrack {
                        label: parent_track.label.clone(),
                        existence: 1.0,
                        mixture,
                        history,
                    });
                    children.len() - 1
                });
                tracks.push(idx);
            }
            formed.push((log_parent + problem.log_weight(&assignment), tracks));
            consumed.push(used);
        }
    }

    let max = formed.iter().map(|(l, _)| *l).fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return Err(Error::DegenerateDensity);
    }
    let mut merged: HashMap<Vec<usize>, usize> = HashMap::new();
    let mut hypotheses: Vec<GlmbHypothesis> = Vec::new();
    let mut association = vec![0.0; m];
    let total: f64 = formed.iter().map(|(l, _)| (l - max).exp()).sum();
    for ((log_w, tracks), used) in formed.iter().zip(&consumed) {
        let w = (log_w - max).exp() / total;
        for &j in used {
            association[j - 1] += w;
        }
        match merged.get(tracks) {
            Some(&h) => hypotheses[h].weight += w,
            None => {
                merged.insert(tracks.clone(), hypotheses.len());
                hypotheses.push(GlmbHypothesis {
                    weight: w,
                    tracks: tracks.clone(),
                });
            }
        }
    }
    let hypotheses_formed = hypotheses.len();
    let posterior = prune_glmb(
        GlmbDensity {
            hypotheses,
            tracks: children,
        },
        prune,
    );
    Ok(SensorUpdate {
        density: posterior,
        association: association.into_iter().map(clamp_association).collect(),
        hypotheses_formed,
    })
}
