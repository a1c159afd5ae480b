use nalgebra::{Matrix2, Matrix2x4, Matrix4, SymmetricEigen, Vector2, Vector4};

/// Single-target state `[p_x, v_x, p_y, v_y]` in m and m/s.
pub type StateVector = Vector4<f64>;
pub type StateMatrix = Matrix4<f64>;
/// Position measurement `[p_x, p_y]` in m.
pub type Measurement = Vector2<f64>;
pub type MeasurementMatrix = Matrix2x4<f64>;
pub type MeasurementCovariance = Matrix2<f64>;

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianComponent {
    pub weight: f64,
    pub mean: StateVector,
    pub covariance: StateMatrix,
}

impl GaussianComponent {
    pub fn new(weight: f64, mean: StateVector, covariance: StateMatrix) -> Self {
        Self {
            weight,
            mean,
            covariance,
        }
    }

    /// Symmetric to 1e-9 relative and strictly positive eigenvalues.
    pub fn is_valid(&self) -> bool {
        if !(self.weight >= 0.0) {
            return false;
        }
        let scale = self.covariance.abs().max().max(f64::MIN_POSITIVE);
        let asym = (self.covariance - self.covariance.transpose()).abs().max();
        if asym > 1e-9 * scale {
            return false;
        }
        min_eigenvalue(&self.covariance) > 0.0
    }
}

pub fn min_eigenvalue(m: &StateMatrix) -> f64 {
    let sym = symmetrize(m);
    SymmetricEigen::new(sym).eigenvalues.min()
}

pub fn symmetrize(m: &StateMatrix) -> StateMatrix {
    (m + m.transpose()) * 0.5
}

/// Rescale weights to sum to one. Leaves an all-zero mixture untouched.
pub fn normalize_mixture(mixture: &mut [GaussianComponent]) {
    let total: f64 = mixture.iter().map(|c| c.weight).sum();
    if total > 0.0 {
        for c in mixture.iter_mut() {
            c.weight /= total;
        }
    }
}

/// Keep the `max_components` heaviest components (ties keep the earlier one)
/// and renormalize.
pub fn cap_mixture(mixture: &mut Vec<GaussianComponent>, max_components: usize) {
    if mixture.len() > max_components {
        let mut order: Vec<usize> = (0..mixture.len()).collect();
        order.sort_by(|&a, &b| {
            mixture[b]
                .weight
                .total_cmp(&mixture[a].weight)
                .then(a.cmp(&b))
        });
        order.truncate(max_components.max(1));
        order.sort_unstable();
        let kept = order.into_iter().map(|i| mixture[i].clone()).collect();
        *mixture = kept;
    }
    normalize_mixture(mixture);
}

/// Weighted mean of a (normalized) mixture.
pub fn mixture_mean(mixture: &[GaussianComponent]) -> StateVector {
    let total: f64 = mixture.iter().map(|c| c.weight).sum();
    if total <= 0.0 {
        return mixture.first().map(|c| c.mean).unwrap_or_else(StateVector::zeros);
    }
    mixture
        .iter()
        .fold(StateVector::zeros(), |acc, c| acc + c.mean * c.weight)
        / total
}

#[cfg(test)]
mod tests {
    use super::*;

    fn comp(w: f64) -> GaussianComponent {
        GaussianComponent::new(w, StateVector::repeat(w), StateMatrix::identity())
    }

    #[test]
    fn cap_keeps_heaviest_in_original_order() {
        let mut m = vec![comp(0.1), comp(0.5), comp(0.2), comp(0.2)];
        cap_mixture(&mut m, 2);
        assert_eq!(m.len(), 2);
        assert_eq!(m[0].mean[0], 0.5);
        assert_eq!(m[1].mean[0], 0.2);
        assert!((m.iter().map(|c| c.weight).sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn validity_rejects_asymmetric_and_indefinite() {
        let mut c = comp(1.0);
        assert!(c.is_valid());
        c.covariance[(0, 1)] = 0.5;
        assert!(!c.is_valid());
        let mut d = comp(1.0);
        d.covariance[(2, 2)] = -1.0;
        assert!(!d.is_valid());
    }

    #[test]
    fn mixture_mean_is_weighted() {
        let m = vec![comp(0.25), comp(0.75)];
        let mean = mixture_mean(&m);
        assert!((mean[0] - (0.25 * 0.25 + 0.75 * 0.75)).abs() < 1e-12);
    }
}
