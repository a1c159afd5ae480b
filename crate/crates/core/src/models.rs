//! Linear-Gaussian motion, sensor, clutter and birth-prior models.

use std::f64::consts::PI;

use nalgebra::{Matrix2, Matrix4x2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rfs::{
    symmetrize, GaussianComponent, Measurement, MeasurementCovariance, MeasurementMatrix,
    StateMatrix, StateVector,
};

/// Nearly-constant-velocity motion in two planar axes.
#[derive(Debug, Clone, PartialEq)]
pub struct MotionModel {
    pub delta_t: f64,
    pub transition: StateMatrix,
    pub process_covariance: StateMatrix,
    pub survival_probability: f64,
}

impl MotionModel {
    /// `transition = I₂ ⊗ [[1, Δ], [0, 1]]`,
    /// `process_covariance = (I₂ ⊗ G) diag(noise) (I₂ ⊗ G)ᵀ` with `G = [Δ²/2, Δ]ᵀ`.
    pub fn constant_velocity(delta_t: f64, acceleration_variance: [f64; 2], survival: f64) -> Self {
        let dt = delta_t;
        #[rustfmt::skip]
        let transition = StateMatrix::new(
            1.0, dt,  0.0, 0.0,
            0.0, 1.0, 0.0, 0.0,
            0.0, 0.0, 1.0, dt,
            0.0, 0.0, 0.0, 1.0,
        );
        #[rustfmt::skip]
        let g = Matrix4x2::new(
            dt * dt / 2.0, 0.0,
            dt,            0.0,
            0.0,           dt * dt / 2.0,
            0.0,           dt,
        );
        let cov_w = Matrix2::from_diagonal(&acceleration_variance.into());
        Self {
            delta_t,
            transition,
            process_covariance: symmetrize(&(g * cov_w * g.transpose())),
            survival_probability: survival,
        }
    }
}

/// Axis-aligned rectangle `[x_min, x_max] × [y_min, y_max]` in metres.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Region {
    pub x: [f64; 2],
    pub y: [f64; 2],
}

impl Default for Region {
    fn default() -> Self {
        Self {
            x: [-1000.0, 1000.0],
            y: [-1000.0, 1000.0],
        }
    }
}

impl Region {
    pub fn area(&self) -> f64 {
        (self.x[1] - self.x[0]) * (self.y[1] - self.y[0])
    }

    pub fn contains(&self, z: &Measurement) -> bool {
        (self.x[0]..=self.x[1]).contains(&z[0]) && (self.y[0]..=self.y[1]).contains(&z[1])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SensorModel {
    pub id: usize,
    pub observation: MeasurementMatrix,
    pub noise: MeasurementCovariance,
    pub detection_probability: f64,
    pub clutter_rate: f64,
    pub region: Region,
}

impl SensorModel {
    /// Position sensor observing `[p_x, p_y]`.
    pub fn position(
        id: usize,
        noise_variance: [f64; 2],
        detection_probability: f64,
        clutter_rate: f64,
        region: Region,
    ) -> Self {
        #[rustfmt::skip]
        let observation = MeasurementMatrix::new(
            1.0, 0.0, 0.0, 0.0,
            0.0, 0.0, 1.0, 0.0,
        );
        Self {
            id,
            observation,
            noise: MeasurementCovariance::from_diagonal(&noise_variance.into()),
            detection_probability,
            clutter_rate,
            region,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BirthPrior {
    pub mean: StateVector,
    pub covariance: StateMatrix,
}

impl BirthPrior {
    pub fn component(&self) -> GaussianComponent {
        GaussianComponent::new(1.0, self.mean, self.covariance)
    }
}

/// Measurements of all sensors at one time step. Positions within a sensor's
/// list are addressed 1-based by tuples; index 0 means a miss.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MeasurementFrame {
    pub time: usize,
    pub per_sensor: Vec<Vec<Measurement>>,
}

impl MeasurementFrame {
    pub fn new(time: usize, per_sensor: Vec<Vec<Measurement>>) -> Self {
        Self { time, per_sensor }
    }

    pub fn sensors(&self) -> usize {
        self.per_sensor.len()
    }

    pub fn count(&self, sensor: usize) -> usize {
        self.per_sensor[sensor].len()
    }

    /// 1-based lookup; `None` for the miss index or out of range.
    pub fn measurement(&self, sensor: usize, j: usize) -> Option<&Measurement> {
        j.checked_sub(1).and_then(|i| self.per_sensor[sensor].get(i))
    }
}

pub fn predict_component(component: &GaussianComponent, model: &MotionModel) -> GaussianComponent {
    let f = &model.transition;
    GaussianComponent {
        weight: component.weight,
        mean: f * component.mean,
        covariance: symmetrize(&(f * component.covariance * f.transpose() + model.process_covariance)),
    }
}

/// Log of `N(z; H m, H P Hᵀ + R)` and the Kalman-conditioned component.
pub fn log_measurement_marginal(
    component: &GaussianComponent,
    z: &Measurement,
    sensor: &SensorModel,
) -> Result<(f64, GaussianComponent)> {
    let h = &sensor.observation;
    let p = &component.covariance;
    let s = symmetrize2(&(h * p * h.transpose() + sensor.noise));
    let chol = s.cholesky().ok_or(Error::NumericalFailure)?;
    let innovation = z - h * component.mean;
    let whitened = chol.solve(&innovation);
    let mahalanobis = innovation.dot(&whitened);
    let log_det = 2.0 * chol.l().diagonal().iter().map(|d| d.ln()).sum::<f64>();
    let log_likelihood = -0.5 * mahalanobis - (2.0 * PI).ln() - 0.5 * log_det;

    // K = P Hᵀ S⁻¹ = (S⁻¹ H P)ᵀ
    let gain = chol.solve(&(h * p)).transpose();
    let joseph = StateMatrix::identity() - gain * h;
    let covariance = symmetrize(&(joseph * p * joseph.transpose() + gain * sensor.noise * gain.transpose()));
    let updated = GaussianComponent {
        weight: component.weight,
        mean: component.mean + gain * innovation,
        covariance,
    };
    if !log_likelihood.is_finite() {
        return Err(Error::NumericalFailure);
    }
    Ok((log_likelihood, updated))
}

pub fn measurement_marginal(
    component: &GaussianComponent,
    z: &Measurement,
    sensor: &SensorModel,
) -> Result<(f64, GaussianComponent)> {
    log_measurement_marginal(component, z, sensor).map(|(l, c)| (l.exp(), c))
}

fn symmetrize2(m: &Matrix2<f64>) -> Matrix2<f64> {
    (m + m.transpose()) * 0.5
}

/// Uniform Poisson clutter intensity `λ_c / area`; zero outside the region.
pub fn clutter_intensity(z: &Measurement, sensor: &SensorModel) -> f64 {
    if sensor.region.contains(z) {
        sensor.clutter_rate / sensor.region.area()
    } else {
        0.0
    }
}
