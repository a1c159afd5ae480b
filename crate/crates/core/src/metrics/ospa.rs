use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::hungarian::min_cost_assignment;
use crate::error::{Error, Result};
use crate::rfs::{Label, StateVector};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetricConfig {
    pub cutoff: f64,
    pub order: f64,
    pub window: usize,
    pub weight_power: f64,
}

impl Default for MetricConfig {
    fn default() -> Self {
        Self {
            cutoff: 200.0,
            order: 1.0,
            window: 5,
            weight_power: 0.0,
        }
    }
}

impl MetricConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.cutoff > 0.0) {
            return Err(Error::Config("metric.cutoff: must be positive".into()));
        }
        if !(self.order >= 1.0) {
            return Err(Error::Config("metric.order: must be at least 1".into()));
        }
        if self.window == 0 {
            return Err(Error::Config("metric.window: must be at least 1".into()));
        }
        Ok(())
    }
}

/// Position components `[p_x, p_y]` of a state.
pub fn position(state: &StateVector) -> Vec<f64> {
    vec![state[0], state[2]]
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// OSPA between sets of `n` and `m` elements given the cut-off base
/// distances of all pairs (`distance(i, j)` already in `[0, c]`).
fn ospa_from_distances(n: usize, m: usize, c: f64, p: f64, distance: impl Fn(usize, usize) -> f64) -> f64 {
    if n == 0 && m == 0 {
        return 0.0;
    }
    if n == 0 || m == 0 {
        return c;
    }
    let (small, large, flip) = if n <= m { (n, m, false) } else { (m, n, true) };
    let cost: Vec<Vec<f64>> = (0..small)
        .map(|i| {
            (0..large)
                .map(|j| {
                    let d = if flip { distance(j, i) } else { distance(i, j) };
                    d.min(c).powf(p)
                })
                .collect()
        })
        .collect();
    let (assignment, _) = min_cost_assignment(&cost);
    // Sum in a canonical order so that swapping the sets gives the same bits.
    let mut pairs: Vec<f64> = assignment.iter().enumerate().map(|(i, &j)| cost[i][j]).collect();
    pairs.sort_by(f64::total_cmp);
    let total: f64 = pairs.iter().sum();
    let penalty = c.powf(p) * (large - small) as f64;
    ((total + penalty) / large as f64).powf(1.0 / p).min(c)
}

/// OSPA distance between two finite point sets.
pub fn ospa(x: &[Vec<f64>], y: &[Vec<f64>], cutoff: f64, order: f64) -> Result<f64> {
    let dim = x.first().or(y.first()).map(Vec::len).unwrap_or(0);
    if let Some(bad) = x.iter().chain(y).find(|p| p.len() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: bad.len(),
        });
    }
    Ok(ospa_from_distances(x.len(), y.len(), cutoff, order, |i, j| {
        euclidean(&x[i], &y[j])
    }))
}

/// Labeled trajectories: label → time step → point.
pub type TrajectorySet = BTreeMap<Label, BTreeMap<usize, Vec<f64>>>;

/// Trajectories restricted to the steps `start..=end`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryWindow {
    pub start: usize,
    pub end: usize,
    pub tracks: TrajectorySet,
}

impl TrajectoryWindow {
    pub fn new(start: usize, end: usize, set: &TrajectorySet) -> Self {
        let tracks = set
            .iter()
            .filter_map(|(label, points)| {
                let inside: BTreeMap<usize, Vec<f64>> = points
                    .range(start..=end)
                    .map(|(&t, p)| (t, p.clone()))
                    .collect();
                (!inside.is_empty()).then(|| (label.clone(), inside))
            })
            .collect();
        Self { start, end, tracks }
    }

    pub fn len(&self) -> usize {
        (self.end + 1).saturating_sub(self.start)
    }

    pub fn is_empty(&self) -> bool {
        self.end < self.start
    }
}

/// Time-averaged distance between two trajectories over the steps where at
/// least one of them exists. A step with only one present costs `c`.
fn trajectory_distance(
    a: &BTreeMap<usize, Vec<f64>>,
    b: &BTreeMap<usize, Vec<f64>>,
    start: usize,
    end: usize,
    config: &MetricConfig,
) -> f64 {
    let c = config.cutoff;
    let mut num = 0.0;
    let mut den = 0.0;
    for t in start..=end {
        let d = match (a.get(&t), b.get(&t)) {
            (Some(x), Some(y)) => euclidean(x, y).min(c),
            (Some(_), None) | (None, Some(_)) => c,
            (None, None) => continue,
        };
        let w = ((t - start + 1) as f64).powf(config.weight_power);
        num += w * d;
        den += w;
    }
    if den > 0.0 {
        num / den
    } else {
        0.0
    }
}

/// OSPA(2) between two trajectory windows over the same steps.
pub fn ospa2(truth: &TrajectoryWindow, estimates: &TrajectoryWindow, config: &MetricConfig) -> Result<f64> {
    if truth.is_empty() || estimates.is_empty() {
        return Err(Error::Empty("OSPA(2) window"));
    }
    if (truth.start, truth.end) != (estimates.start, estimates.end) {
        return Err(Error::Config("OSPA(2) windows cover different steps".into()));
    }
    let xs: Vec<_> = truth.tracks.values().collect();
    let ys: Vec<_> = estimates.tracks.values().collect();
    Ok(ospa_from_distances(xs.len(), ys.len(), config.cutoff, config.order, |i, j| {
        trajectory_distance(xs[i], ys[j], truth.start, truth.end, config)
    }))
}

/// OSPA(2) at every step `k < horizon` over the window ending at `k`.
pub fn ospa2_series(
    truth: &TrajectorySet,
    estimates: &TrajectorySet,
    horizon: usize,
    config: &MetricConfig,
) -> Result<Vec<f64>> {
    (0..horizon)
        .map(|k| {
            let start = (k + 1).saturating_sub(config.window);
            ospa2(
                &TrajectoryWindow::new(start, k, truth),
                &TrajectoryWindow::new(start, k, estimates),
                config,
            )
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pts(v: &[[f64; 2]]) -> Vec<Vec<f64>> {
        v.iter().map(|p| p.to_vec()).collect()
    }

    #[test]
    fn ospa_hand_cases() {
        let x = pts(&[[1.0, 2.0], [30.0, -4.0]]);
        assert_eq!(ospa(&x, &x, 200.0, 1.0).unwrap(), 0.0);
        assert_eq!(ospa(&pts(&[[0.0, 0.0]]), &[], 200.0, 1.0).unwrap(), 200.0);
        assert_eq!(ospa(&pts(&[[0.0, 0.0]]), &pts(&[[3.0, 4.0]]), 200.0, 1.0).unwrap(), 5.0);
        assert_eq!(ospa(&[], &[], 200.0, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn ospa_dimension_mismatch() {
        assert!(ospa(&[vec![0.0, 0.0]], &[vec![0.0]], 200.0, 1.0).is_err());
    }

    fn traj(label: usize, points: &[(usize, [f64; 2])]) -> (Label, BTreeMap<usize, Vec<f64>>) {
        (
            Label::fixed(0, label),
            points.iter().map(|&(t, p)| (t, p.to_vec())).collect(),
        )
    }

    #[test]
    fn ospa2_hand_cases() {
        let cfg = MetricConfig::default();
        let truth: TrajectorySet = [traj(0, &(0..5).map(|t| (t, [t as f64, 0.0])).collect::<Vec<_>>())].into();
        let shifted: TrajectorySet = [traj(7, &(0..5).map(|t| (t, [t as f64, 10.0])).collect::<Vec<_>>())].into();
        let w = |s: &TrajectorySet| TrajectoryWindow::new(0, 4, s);
        assert_eq!(ospa2(&w(&truth), &w(&truth), &cfg).unwrap(), 0.0);
        assert_eq!(ospa2(&w(&truth), &w(&TrajectorySet::new()), &cfg).unwrap(), 200.0);
        assert!((ospa2(&w(&truth), &w(&shifted), &cfg).unwrap() - 10.0).abs() < 1e-12);
    }

    #[test]
    fn ospa2_partial_overlap() {
        // Present together on 2 of 4 union steps at distance 10, alone on 2.
        let cfg = MetricConfig::default();
        let a: TrajectorySet = [traj(0, &[(0, [0.0, 0.0]), (1, [0.0, 0.0]), (2, [0.0, 0.0])])].into();
        let b: TrajectorySet = [traj(1, &[(1, [0.0, 10.0]), (2, [0.0, 10.0]), (3, [0.0, 10.0])])].into();
        let d = ospa2(&TrajectoryWindow::new(0, 4, &a), &TrajectoryWindow::new(0, 4, &b), &cfg).unwrap();
        assert!((d - (10.0 + 10.0 + 200.0 + 200.0) / 4.0).abs() < 1e-12);
    }

    #[test]
    fn empty_window_is_error() {
        let s = TrajectorySet::new();
        let w = TrajectoryWindow {
            start: 3,
            end: 2,
            tracks: s,
        };
        assert!(ospa2(&w, &w, &MetricConfig::default()).is_err());
    }

    fn arb_set() -> impl Strategy<Value = Vec<Vec<f64>>> {
        proptest::collection::vec(proptest::collection::vec(-300.0f64..300.0, 2), 0..5)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]
        #[test]
        fn ospa_metric_axioms(x in arb_set(), y in arb_set(), z in arb_set(), p in 1.0f64..3.0) {
            let c = 200.0;
            let dxy = ospa(&x, &y, c, p).unwrap();
            let dyx = ospa(&y, &x, c, p).unwrap();
            let dxz = ospa(&x, &z, c, p).unwrap();
            let dzy = ospa(&z, &y, c, p).unwrap();
            prop_assert_eq!(dxy, dyx);
            prop_assert!((0.0..=c).contains(&dxy));
            prop_assert!(dxy <= dxz + dzy + 1e-9);
            prop_assert_eq!(ospa(&x, &x, c, p).unwrap(), 0.0);
        }

        #[test]
        fn single_step_window_is_ospa(x in arb_set(), y in arb_set()) {
            let cfg = MetricConfig { window: 1, ..MetricConfig::default() };
            let to_set = |pts: &[Vec<f64>], offset: usize| -> TrajectorySet {
                pts.iter()
                    .enumerate()
                    .map(|(i, p)| (Label::fixed(0, i + offset), [(4usize, p.clone())].into()))
                    .collect()
            };
            let (tx, ty) = (to_set(&x, 0), to_set(&y, 100));
            let d2 = ospa2(&TrajectoryWindow::new(4, 4, &tx), &TrajectoryWindow::new(4, 4, &ty), &cfg).unwrap();
            let d1 = ospa(&x, &y, cfg.cutoff, cfg.order).unwrap();
            prop_assert!((d1 - d2).abs() < 1e-9);
            prop_assert!((0.0..=cfg.cutoff).contains(&d2));
        }
    }
}
