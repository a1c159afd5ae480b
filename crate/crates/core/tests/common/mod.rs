//! Reference computations used as test oracles. They share no numerical code
//! with the library: Gaussian integrals use the information form or brute
//! force grids, and association weights are products over enumerated maps.
#![allow(dead_code)]

use std::collections::BTreeSet;
use std::f64::consts::PI;

use herdtrack::birth::AssociationProbabilities;
use herdtrack::models::{BirthPrior, MeasurementFrame, Region, SensorModel};
use herdtrack::rfs::{GaussianComponent, GlmbDensity, GlmbTrack, Label, Measurement, StateMatrix, StateVector};
use herdtrack::rng::{rng_from_seed, SimRng};
use nalgebra::{Matrix2, Vector2};
use rand::Rng;

pub fn rng(seed: u64) -> SimRng {
    rng_from_seed(seed)
}

pub fn gauss2(x: &Vector2<f64>, mean: &Vector2<f64>, cov: &Matrix2<f64>) -> f64 {
    let d = x - mean;
    let det = cov.determinant();
    let q = d.dot(&(cov.try_inverse().expect("invertible") * d));
    (-0.5 * q).exp() / (2.0 * PI * det.sqrt())
}

/// Position marginal `(H μ, H P Hᵀ)` of a 4-state `[p_x, v_x, p_y, v_y]`.
pub fn position_marginal(mean: &StateVector, cov: &StateMatrix) -> (Vector2<f64>, Matrix2<f64>) {
    (
        Vector2::new(mean[0], mean[2]),
        Matrix2::new(cov[(0, 0)], cov[(0, 2)], cov[(2, 0)], cov[(2, 2)]),
    )
}

/// Position pseudolikelihood factor of sensor `s` for index `j`.
fn factor(sensor: &SensorModel, z: Option<&Measurement>, p: &Vector2<f64>) -> f64 {
    let pd = sensor.detection_probability;
    match z {
        None => 1.0 - pd,
        Some(z) => pd * gauss2(z, p, &sensor.noise) / (sensor.clutter_rate / sensor.region.area()),
    }
}

fn detections<'a>(tuple: &[usize], frame: &'a MeasurementFrame, sensors: &'a [SensorModel]) -> Vec<(&'a Measurement, &'a SensorModel)> {
    tuple
        .iter()
        .enumerate()
        .filter_map(|(s, &j)| frame.measurement(s, j).map(|z| (z, &sensors[s])))
        .collect()
}

/// `ψ̄(J)` by midpoint quadrature over the position plane.
pub fn quadrature_psi_bar(tuple: &[usize], frame: &MeasurementFrame, prior: &BirthPrior, sensors: &[SensorModel]) -> f64 {
    let (mu, p0) = position_marginal(&prior.mean, &prior.covariance);
    let dets = detections(tuple, frame, sensors);
    // Grid placement from the integrand's Gaussian envelope.
    let mut lambda = p0.try_inverse().unwrap();
    let mut eta = lambda * mu;
    for (z, s) in &dets {
        let ri = s.noise.try_inverse().unwrap();
        lambda += ri;
        eta += ri * *z;
    }
    let cov = lambda.try_inverse().unwrap();
    let center = cov * eta;
    let eig = cov.symmetric_eigenvalues();
    let (lo, hi) = (eig.min().sqrt(), eig.max().sqrt());
    let half = 12.0 * hi;
    let h = lo / 5.0;
    let n = (2.0 * half / h).ceil() as usize;
    let h = 2.0 * half / n as f64;
    let mut total = 0.0;
    for a in 0..n {
        for b in 0..n {
            let p = center + Vector2::new(-half + (a as f64 + 0.5) * h, -half + (b as f64 + 0.5) * h);
            let mut f = gauss2(&p, &mu, &p0);
            for (s, &j) in tuple.iter().enumerate() {
                f *= factor(&sensors[s], frame.measurement(s, j), &p);
            }
            total += f;
        }
    }
    total * h * h
}

/// `ψ̄(J)` in closed form from the information-form Gaussian product
/// `∫ ∏ᵢ N(p; aᵢ, Sᵢ) dp`.
pub fn closed_form_psi_bar(tuple: &[usize], frame: &MeasurementFrame, prior: &BirthPrior, sensors: &[SensorModel]) -> f64 {
    let (mu, p0) = position_marginal(&prior.mean, &prior.covariance);
    let mut constant = 1.0;
    let mut factors = vec![(mu, p0)];
    for (s, &j) in tuple.iter().enumerate() {
        let sensor = &sensors[s];
        match frame.measurement(s, j) {
            None => constant *= 1.0 - sensor.detection_probability,
            Some(z) => {
                constant *= sensor.detection_probability * sensor.region.area() / sensor.clutter_rate;
                factors.push((*z, sensor.noise));
            }
        }
    }
    let mut lambda = Matrix2::zeros();
    let mut eta = Vector2::zeros();
    let mut log = 0.0;
    for (a, s) in &factors {
        let si = s.try_inverse().unwrap();
        lambda += si;
        eta += si * a;
        log += -(2.0 * PI).ln() - 0.5 * s.determinant().ln() - 0.5 * a.dot(&(si * a));
    }
    log += (2.0 * PI).ln() - 0.5 * lambda.determinant().ln() + 0.5 * eta.dot(&(lambda.try_inverse().unwrap() * eta));
    constant * log.exp()
}

/// All tuples of `(m_1 + 1) × … × (m_V + 1)` in lexicographic order.
pub fn all_tuples(counts: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for &m in counts {
        out = out
            .into_iter()
            .flat_map(|t| {
                (0..=m).map(move |j| {
                    let mut t = t.clone();
                    t.push(j);
                    t
                })
            })
            .collect();
    }
    out
}

/// `p(J) ∝ r_U(J) min(ψ̄(J), cap)` over every tuple, normalized.
pub fn tuple_distribution(
    frame: &MeasurementFrame,
    prior: &BirthPrior,
    sensors: &[SensorModel],
    assoc: &AssociationProbabilities,
    cap: f64,
) -> Vec<(Vec<usize>, f64)> {
    let counts: Vec<usize> = (0..sensors.len()).map(|s| frame.count(s)).collect();
    let mut weighted: Vec<(Vec<usize>, f64)> = all_tuples(&counts)
        .into_iter()
        .map(|t| {
            let r_u: f64 = t
                .iter()
                .enumerate()
                .filter(|(_, &j)| j > 0)
                .map(|(s, &j)| 1.0 - assoc.sensor(s)[j - 1])
                .product();
            let w = r_u * closed_form_psi_bar(&t, frame, prior, sensors).min(cap);
            (t, w)
        })
        .collect();
    let total: f64 = weighted.iter().map(|(_, w)| w).sum();
    for (_, w) in &mut weighted {
        *w /= total;
    }
    weighted
}

/// Random linear-Gaussian birth instance with `v` sensors and up to
/// `max_m` measurements each, scattered around a common source.
pub fn random_birth_instance(
    rng: &mut SimRng,
    v: usize,
    max_m: usize,
) -> (MeasurementFrame, BirthPrior, Vec<SensorModel>) {
    let region = Region {
        x: [-2000.0, 2000.0],
        y: [-2000.0, 2000.0],
    };
    let sensors: Vec<SensorModel> = (0..v)
        .map(|s| {
            SensorModel::position(
                s,
                [rng.random_range(25.0..400.0), rng.random_range(25.0..400.0)],
                rng.random_range(0.6..0.99),
                rng.random_range(2.0..20.0),
                region,
            )
        })
        .collect();
    let mean = StateVector::new(
        rng.random_range(-300.0..300.0),
        rng.random_range(-10.0..10.0),
        rng.random_range(-300.0..300.0),
        rng.random_range(-10.0..10.0),
    );
    // Random SPD prior with position–velocity correlation.
    let a = StateMatrix::from_fn(|_, _| rng.random_range(-1.0..1.0));
    let scale = StateMatrix::from_diagonal(&StateVector::new(
        rng.random_range(100.0..800.0),
        rng.random_range(2.0..20.0),
        rng.random_range(100.0..800.0),
        rng.random_range(2.0..20.0),
    ));
    let b = scale * (a + StateMatrix::identity() * 2.0);
    let covariance = b * b.transpose();
    let source = Vector2::new(mean[0], mean[2]) + Vector2::new(rng.random_range(-400.0..400.0), rng.random_range(-400.0..400.0));
    let per_sensor = (0..v)
        .map(|_| {
            let m = rng.random_range(0..=max_m);
            (0..m)
                .map(|_| source + Vector2::new(rng.random_range(-40.0..40.0), rng.random_range(-40.0..40.0)))
                .collect()
        })
        .collect();
    (
        MeasurementFrame::new(0, per_sensor),
        BirthPrior { mean, covariance },
        sensors,
    )
}

/// Every valid association map of `scores` (rows × `m + 2` columns, column
/// 0 miss, `m + 1` death), with its unnormalized weight.
pub fn enumerate_assignments(scores: &[Vec<f64>]) -> Vec<(Vec<usize>, f64)> {
    let rows = scores.len();
    let Some(cols) = scores.first().map(Vec::len) else {
        return vec![(Vec::new(), 1.0)];
    };
    let m = cols - 2;
    let mut out = Vec::new();
    let total = cols.pow(rows as u32);
    'outer: for code in 0..total {
        let mut a = Vec::with_capacity(rows);
        let mut c = code;
        for _ in 0..rows {
            a.push(c % cols);
            c /= cols;
        }
        let mut used = vec![false; m + 2];
        for &col in &a {
            if (1..=m).contains(&col) {
                if used[col] {
                    continue 'outer;
                }
                used[col] = true;
            }
        }
        let w: f64 = a.iter().enumerate().map(|(r, &col)| scores[r][col]).product();
        if w > 0.0 {
            out.push((a, w));
        }
    }
    out
}

pub fn gaussian_track(label: usize, r: f64, pos: [f64; 2], var: f64) -> GlmbTrack {
    GlmbTrack {
        label: Label::fixed(0, label),
        existence: r,
        mixture: vec![GaussianComponent::new(
            1.0,
            StateVector::new(pos[0], 0.0, pos[1], 0.0),
            StateMatrix::from_diagonal(&StateVector::new(var, 10.0, var, 10.0)),
        )],
        history: Vec::new(),
    }
}

/// Oracle weights of a single-hypothesis GLMB update, keyed by the set of
/// surviving `(label, column)` pairs.
pub fn enumerated_posterior(
    tracks: &[GlmbTrack],
    zs: &[Measurement],
    sensor: &SensorModel,
) -> Vec<(BTreeSet<(Label, usize)>, f64)> {
    let m = zs.len();
    let pd = sensor.detection_probability;
    let kappa = sensor.clutter_rate / sensor.region.area();
    let scores: Vec<Vec<f64>> = tracks
        .iter()
        .map(|t| {
            let c = &t.mixture[0];
            let (mu, p) = position_marginal(&c.mean, &c.covariance);
            let mut row = vec![t.existence * (1.0 - pd)];
            row.extend(zs.iter().map(|z| t.existence * pd * gauss2(z, &mu, &(p + sensor.noise)) / kappa));
            row.push(1.0 - t.existence);
            row
        })
        .collect();
    let maps = enumerate_assignments(&scores);
    let total: f64 = maps.iter().map(|(_, w)| w).sum();
    maps.into_iter()
        .map(|(a, w)| {
            let key = a
                .iter()
                .zip(tracks)
                .filter(|(&c, _)| c != m + 1)
                .map(|(&c, t)| (t.label.clone(), c))
                .collect();
            (key, w / total)
        })
        .collect()
}

pub fn posterior_keys(density: &GlmbDensity) -> Vec<(BTreeSet<(Label, usize)>, f64)> {
    density
        .hypotheses
        .iter()
        .map(|h| {
            let key = h
                .last_associations(density)
                .into_iter()
                .map(|(l, c)| (l, c.expect("updated track has history")))
                .collect();
            (key, h.weight)
        })
        .collect()
}

