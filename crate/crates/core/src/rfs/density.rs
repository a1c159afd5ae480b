use std::collections::{BTreeMap, HashMap};

use log::warn;

use super::gaussian::{cap_mixture, mixture_mean, GaussianComponent, StateVector};
use super::label::Label;
use crate::error::{Error, Result};

/// A Bernoulli track: label, existence probability and a normalized
/// Gaussian-mixture state density.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledTrack {
    pub label: Label,
    pub existence: f64,
    pub mixture: Vec<GaussianComponent>,
}

impl LabeledTrack {
    pub fn new(label: Label, existence: f64, mixture: Vec<GaussianComponent>) -> Self {
        Self {
            label,
            existence,
            mixture,
        }
    }

    pub fn mean(&self) -> StateVector {
        mixture_mean(&self.mixture)
    }
}

/// Labeled multi-Bernoulli density. Tracks are kept sorted by label.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LmbDensity {
    tracks: Vec<LabeledTrack>,
}

impl LmbDensity {
    pub fn new(mut tracks: Vec<LabeledTrack>) -> Result<Self> {
        tracks.sort_by(|a, b| a.label.cmp(&b.label));
        if let Some(w) = tracks.windows(2).find(|w| w[0].label == w[1].label) {
            return Err(Error::LabelCollision(w[0].label.to_string()));
        }
        Ok(Self { tracks })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn tracks(&self) -> &[LabeledTrack] {
        &self.tracks
    }

    pub fn into_tracks(self) -> Vec<LabeledTrack> {
        self.tracks
    }

    pub fn len(&self) -> usize {
        self.tracks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tracks.is_empty()
    }

    pub fn expected_cardinality(&self) -> f64 {
        self.tracks.iter().map(|t| t.existence).sum()
    }
}

/// Track-table entry of a δ-GLMB density.
///
/// Posterior entries carry `existence == 1`. Entries of a predicted density
/// carry their survival or birth probability; the next update resolves them
/// through its death column.
#[derive(Debug, Clone, PartialEq)]
pub struct GlmbTrack {
    pub label: Label,
    pub existence: f64,
    pub mixture: Vec<GaussianComponent>,
    /// Measurement index consumed at each sensor update since birth, most
    /// recent last (`0` = missed).
    pub history: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GlmbHypothesis {
    pub weight: f64,
    /// Indices into the density's track table, ordered by label.
    pub tracks: Vec<usize>,
}

impl GlmbHypothesis {
    pub fn cardinality(&self) -> usize {
        self.tracks.len()
    }

    pub fn labels<'a>(&'a self, density: &'a GlmbDensity) -> impl Iterator<Item = &'a Label> + 'a {
        self.tracks.iter().map(move |&i| &density.tracks[i].label)
    }

    /// Measurement index each label consumed at the most recent update.
    pub fn last_associations(&self, density: &GlmbDensity) -> Vec<(Label, Option<usize>)> {
        self.tracks
            .iter()
            .map(|&i| {
                let t = &density.tracks[i];
                (t.label.clone(), t.history.last().copied())
            })
            .collect()
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct GlmbDensity {
    pub hypotheses: Vec<GlmbHypothesis>,
    pub tracks: Vec<GlmbTrack>,
}

impl GlmbDensity {
    /// The density containing only the empty label set.
    pub fn empty() -> Self {
        Self {
            hypotheses: vec![GlmbHypothesis {
                weight: 1.0,
                tracks: Vec::new(),
            }],
            tracks: Vec::new(),
        }
    }

    /// One hypothesis holding every track with its existence probability.
    pub fn from_lmb(lmb: &LmbDensity) -> Self {
        let tracks: Vec<GlmbTrack> = lmb
            .tracks()
            .iter()
            .map(|t| GlmbTrack {
                label: t.label.clone(),
                existence: t.existence,
                mixture: t.mixture.clone(),
                history: Vec::new(),
            })
            .collect();
        Self {
            hypotheses: vec![GlmbHypothesis {
                weight: 1.0,
                tracks: (0..tracks.len()).collect(),
            }],
            tracks,
        }
    }

    /// Marginalize to an LMB: existence is the total weight of hypotheses
    /// containing the label, the density their weighted mixture.
    pub fn to_lmb(&self, max_components: usize) -> LmbDensity {
        let mut acc: BTreeMap<&Label, (f64, Vec<GaussianComponent>)> = BTreeMap::new();
        for h in &self.hypotheses {
            for &i in &h.tracks {
                let t = &self.tracks[i];
                let w = h.weight * t.existence;
                let entry = acc.entry(&t.label).or_insert((0.0, Vec::new()));
                entry.0 += w;
                entry.1.extend(t.mixture.iter().map(|c| GaussianComponent {
                    weight: c.weight * w,
                    ..c.clone()
                }));
            }
        }
        let tracks = acc
            .into_iter()
            .map(|(label, (r, mut mixture))| {
                cap_mixture(&mut mixture, max_components);
                LabeledTrack::new(label.clone(), r.clamp(0.0, 1.0), mixture)
            })
            .collect();
        LmbDensity { tracks }
    }

    pub fn total_weight(&self) -> f64 {
        self.hypotheses.iter().map(|h| h.weight).sum()
    }

    pub fn cardinality_distribution(&self) -> Vec<f64> {
        let max = self.hypotheses.iter().map(|h| h.cardinality()).max().unwrap_or(0);
        let mut dist = vec![0.0; max + 1];
        for h in &self.hypotheses {
            dist[h.cardinality()] += h.weight;
        }
        dist
    }

    /// Drop table entries no hypothesis references and remap indices.
    pub fn compact(&mut self) {
        let mut remap: HashMap<usize, usize> = HashMap::new();
        let mut order: Vec<usize> = self
            .hypotheses
            .iter()
            .flat_map(|h| h.tracks.iter().copied())
            .collect();
        order.sort_unstable();
        order.dedup();
        let mut tracks = Vec::with_capacity(order.len());
        for (new, old) in order.into_iter().enumerate() {
            remap.insert(old, new);
            tracks.push(self.tracks[old].clone());
        }
        for h in &mut self.hypotheses {
            for i in &mut h.tracks {
                *i = remap[i];
            }
        }
        self.tracks = tracks;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PruneConfig {
    pub hypothesis_threshold: f64,
    pub max_hypotheses: usize,
    pub existence_threshold: f64,
    pub max_components: usize,
}

impl Default for PruneConfig {
    fn default() -> Self {
        Self {
            hypothesis_threshold: 1e-5,
            max_hypotheses: 1000,
            existence_threshold: 1e-3,
            max_components: 10,
        }
    }
}

pub fn normalize_hypotheses(mut density: GlmbDensity) -> Result<GlmbDensity> {
    let total = density.total_weight();
    if !(total > 0.0) || !total.is_finite() {
        return Err(Error::DegenerateDensity);
    }
    rescale(&mut density.hypotheses, total);
    Ok(density)
}

/// Divide weights by `total`, leaving already-normalized weights untouched so
/// that normalization is idempotent.
fn rescale(hypotheses: &mut [GlmbHypothesis], total: f64) {
    if (total - 1.0).abs() <= 1e-12 {
        return;
    }
    for h in hypotheses {
        h.weight /= total;
    }
}

fn hypothesis_order(density: &GlmbDensity) -> Vec<usize> {
    let keys: Vec<Vec<&Label>> = density
        .hypotheses
        .iter()
        .map(|h| h.labels(density).collect())
        .collect();
    let mut order: Vec<usize> = (0..density.hypotheses.len()).collect();
    order.sort_by(|&a, &b| {
        density.hypotheses[b]
            .weight
            .total_cmp(&density.hypotheses[a].weight)
            .then_with(|| keys[a].cmp(&keys[b]))
            .then(a.cmp(&b))
    });
    order
}

/// Threshold and cap hypotheses, renormalize, sort by descending weight and
/// drop unreferenced tracks. Mixtures are capped at `max_components`.
pub fn prune_glmb(density: GlmbDensity, config: &PruneConfig) -> GlmbDensity {
    let total = density.total_weight();
    if !(total > 0.0) {
        warn!("pruning a GLMB with zero total weight; result is empty");
        return GlmbDensity::default();
    }
    let order = hypothesis_order(&density);
    let kept: Vec<GlmbHypothesis> = order
        .into_iter()
        .filter(|&i| density.hypotheses[i].weight / total >= config.hypothesis_threshold)
        .take(config.max_hypotheses)
        .map(|i| density.hypotheses[i].clone())
        .collect();
    if kept.is_empty() {
        warn!("all GLMB hypotheses pruned");
        return GlmbDensity::default();
    }
    let mut out = GlmbDensity {
        hypotheses: kept,
        tracks: density.tracks,
    };
    let kept_total = out.total_weight();
    rescale(&mut out.hypotheses, kept_total);
    out.compact();
    for t in &mut out.tracks {
        cap_mixture(&mut t.mixture, config.max_components);
    }
    out
}

pub fn prune_lmb(density: LmbDensity, config: &PruneConfig) -> LmbDensity {
    let tracks = density
        .tracks
        .into_iter()
        .filter(|t| t.existence >= config.existence_threshold)
        .map(|mut t| {
            cap_mixture(&mut t.mixture, config.max_components);
            t
        })
        .collect::<Vec<_>>();
    if tracks.is_empty() {
        log::debug!("LMB pruned to empty");
    }
    LmbDensity { tracks }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Estimate {
    pub label: Label,
    pub state: StateVector,
}

/// LMB estimator: every track with existence above one half.
pub fn extract_lmb(density: &LmbDensity) -> Vec<Estimate> {
    density
        .tracks()
        .iter()
        .filter(|t| t.existence > 0.5)
        .map(|t| Estimate {
            label: t.label.clone(),
            state: t.mean(),
        })
        .collect()
}

/// δ-GLMB estimator: MAP cardinality, then the heaviest hypothesis of that
/// cardinality.
pub fn extract_glmb(density: &GlmbDensity) -> Vec<Estimate> {
    let card = density.cardinality_distribution();
    let Some(n) = (0..card.len()).fold(None, |best: Option<usize>, n| match best {
        Some(b) if card[b] >= card[n] => Some(b),
        _ => Some(n),
    }) else {
        return Vec::new();
    };
    let best = hypothesis_order(density)
        .into_iter()
        .find(|&i| density.hypotheses[i].cardinality() == n);
    let Some(best) = best else {
        return Vec::new();
    };
    let mut out: Vec<Estimate> = density.hypotheses[best]
        .tracks
        .iter()
        .map(|&i| {
            let t = &density.tracks[i];
            Estimate {
                label: t.label.clone(),
                state: mixture_mean(&t.mixture),
            }
        })
        .collect();
    out.sort_by(|a, b| a.label.cmp(&b.label));
    out
}
