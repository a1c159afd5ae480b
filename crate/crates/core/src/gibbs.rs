//! Gibbs samplers over factored discrete state spaces.
//!
//! A chain state is a vector of coordinates; coordinate `s` takes values in
//! `0..d_s`. A [`ConditionalEvaluator`] supplies the conditional distribution
//! of one coordinate given the others. Two modes share the same sweep
//! structure:
//!
//! * **herded**: each conditional keeps a herding weight vector, initialized
//!   to the conditional itself. A step selects the weight argmax and then adds
//!   the conditional and subtracts the indicator of the selection. The chain
//!   is a pure function of its inputs.
//! * **stochastic**: the coordinate is drawn from the conditional with a
//!   seeded generator.
//!
//! Weights and conditionals are keyed by the state with the updated
//! coordinate masked out, together with the coordinate, so revisiting the
//! same conditioning state reuses both the cached conditional and its
//! herding memory.

use std::collections::{HashMap, HashSet};

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{rng_from_seed, SimRng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SamplerMode {
    Herded,
    Stochastic,
}

impl std::fmt::Display for SamplerMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SamplerMode::Herded => "herded",
            SamplerMode::Stochastic => "stochastic",
        })
    }
}

impl std::str::FromStr for SamplerMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "herded" => Ok(SamplerMode::Herded),
            "stochastic" => Ok(SamplerMode::Stochastic),
            other => Err(Error::Config(format!(
                "unknown sampler mode `{other}` (expected herded or stochastic)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GibbsConfig {
    /// Number of full sweeps over all coordinates.
    pub iterations: usize,
    pub mode: SamplerMode,
    /// Only read in stochastic mode.
    pub seed: u64,
    /// Step through coordinate orders by lexicographic successor each sweep.
    pub cycling: bool,
}

impl Default for GibbsConfig {
    fn default() -> Self {
        Self {
            iterations: 250,
            mode: SamplerMode::Herded,
            seed: 0,
            cycling: true,
        }
    }
}

pub trait ConditionalEvaluator {
    fn coordinates(&self) -> usize;

    /// Conditional distribution of `coordinate` given the rest of `state`.
    /// The current value of `state[coordinate]` must not matter.
    fn conditional(&self, state: &[usize], coordinate: usize) -> Result<Vec<f64>>;
}

type Key = (Vec<usize>, usize);

fn key(state: &[usize], coordinate: usize) -> Key {
    let mut masked = state.to_vec();
    masked[coordinate] = usize::MAX;
    (masked, coordinate)
}

/// Herding weight vectors keyed by (conditioning state, coordinate).
#[derive(Debug, Default, Clone)]
pub struct WeightStore {
    map: HashMap<Key, Vec<f64>>,
}

impl WeightStore {
    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn get(&self, state: &[usize], coordinate: usize) -> Option<&[f64]> {
        self.map.get(&key(state, coordinate)).map(Vec::as_slice)
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        self.map.values().map(Vec::as_slice)
    }
}

/// Conditional distributions already evaluated, keyed like [`WeightStore`].
#[derive(Debug, Default, Clone)]
pub struct ConditionalCache {
    map: HashMap<Key, Vec<f64>>,
}

impl ConditionalCache {
    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn get(&self, state: &[usize], coordinate: usize) -> Option<&[f64]> {
        self.map.get(&key(state, coordinate)).map(Vec::as_slice)
    }
}

#[derive(Debug, Default, Clone, Copy, PartialEq, Eq)]
pub struct ChainStats {
    /// Calls into the evaluator.
    pub evaluator_calls: usize,
    /// Sum of the lengths of all evaluated conditionals, i.e. the number of
    /// single-entry transition probabilities computed.
    pub entries_evaluated: usize,
    pub cache_hits: usize,
    /// Coordinate updates performed, `iterations × coordinates`.
    pub updates: usize,
    /// Sum of conditional lengths over all updates: the entry evaluations an
    /// uncached sampler would have performed.
    pub entries_requested: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainOutput {
    /// Unique visited states in first-visit order.
    pub states: Vec<Vec<usize>>,
    pub stats: ChainStats,
}

fn argmax_lowest(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// In-place herding update; returns the selected index.
pub fn herd(weights: &mut [f64], mu: &[f64]) -> usize {
    let selected = argmax_lowest(weights);
    for (w, m) in weights.iter_mut().zip(mu) {
        *w += m;
    }
    weights[selected] -= 1.0;
    selected
}

/// One herding step: select the weight argmax (lowest index on ties), then
/// return `weights + mu - e_selected`.
pub fn herding_step(weights: &[f64], mu: &[f64]) -> Result<(usize, Vec<f64>)> {
    if weights.is_empty() {
        return Err(Error::Empty("herding weight vector"));
    }
    if weights.len() != mu.len() {
        return Err(Error::DimensionMismatch {
            expected: weights.len(),
            found: mu.len(),
        });
    }
    let mut w = weights.to_vec();
    let selected = herd(&mut w, mu);
    Ok((selected, w))
}

/// Advance to the lexicographic successor; wraps to ascending order and
/// returns `false` after the last permutation.
pub fn next_permutation(p: &mut [usize]) -> bool {
    let n = p.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        p.reverse();
        return false;
    }
    let mut j = n - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// Coordinate order for sweep `t` (1-based): the `(t - 1) mod n!`-th
/// permutation of `0..n` in lexicographic order, so `t = 1` is the identity.
pub fn perm(t: u64, n: usize) -> Vec<usize> {
    let mut rank = t.saturating_sub(1);
    // n! exceeds u64 for n > 20 and every rank is then in range.
    if let Some(total) = (1..=n as u64).try_fold(1u64, |acc, k| acc.checked_mul(k)) {
        rank %= total;
    }
    let mut pool: Vec<usize> = (0..n).collect();
    let mut out = Vec::with_capacity(n);
    for remaining in (1..=n).rev() {
        let block = (1..remaining as u64)
            .try_fold(1u64, |acc, k| acc.checked_mul(k))
            .unwrap_or(u64::MAX);
        let idx = (rank / block) as usize;
        rank %= block;
        out.push(pool.remove(idx));
    }
    out
}

/// A Gibbs chain with its weight store and conditional cache.
pub struct GibbsSampler {
    config: GibbsConfig,
    weights: WeightStore,
    cache: ConditionalCache,
    stats: ChainStats,
    rng: SimRng,
}

impl GibbsSampler {
    pub fn new(config: GibbsConfig) -> Self {
        let rng = rng_from_seed(config.seed);
        Self {
            config,
            weights: WeightStore::default(),
            cache: ConditionalCache::default(),
            stats: ChainStats::default(),
            rng,
        }
    }

    pub fn weights(&self) -> &WeightStore {
        &self.weights
    }

    pub fn cache(&self) -> &ConditionalCache {
        &self.cache
    }

    pub fn stats(&self) -> ChainStats {
        self.stats
    }

    fn conditional<E: ConditionalEvaluator + ?Sized>(
        &mut self,
        evaluator: &E,
        state: &[usize],
        coordinate: usize,
    ) -> Result<(Key, Vec<f64>)> {
        let k = key(state, coordinate);
        if let Some(mu) = self.cache.map.get(&k) {
            self.stats.cache_hits += 1;
            return Ok((k, mu.clone()));
        }
        let wrap = |source| Error::Evaluator {
            state: state.to_vec(),
            coordinate,
            source: Box::new(source),
        };
        let mut mu = evaluator.conditional(state, coordinate).map_err(wrap)?;
        self.stats.evaluator_calls += 1;
        self.stats.entries_evaluated += mu.len();
        let total: f64 = mu.iter().sum();
        if mu.is_empty() || !(total > 0.0) || !total.is_finite() || mu.iter().any(|&p| p < 0.0) {
            return Err(wrap(Error::DegenerateConditional { coordinate }));
        }
        for p in &mut mu {
            *p /= total;
        }
        self.cache.map.insert(k.clone(), mu.clone());
        Ok((k, mu))
    }

    /// Evaluate and cache a conditional ahead of time.
    pub fn prewarm<E: ConditionalEvaluator + ?Sized>(
        &mut self,
        evaluator: &E,
        state: &[usize],
        coordinate: usize,
    ) -> Result<()> {
        self.conditional(evaluator, state, coordinate).map(|_| ())
    }

    pub fn run<E: ConditionalEvaluator + ?Sized>(
        &mut self,
        evaluator: &E,
        initial: &[usize],
    ) -> Result<ChainOutput> {
        let n = evaluator.coordinates();
        if initial.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: initial.len(),
            });
        }
        let mut state = initial.to_vec();
        let mut seen: HashSet<Vec<usize>> = HashSet::new();
        let mut visited = Vec::new();
        let mut order: Vec<usize> = (0..n).collect();

        for _ in 0..self.config.iterations {
            for idx in 0..n {
                let s = order[idx];
                let (k, mu) = self.conditional(evaluator, &state, s)?;
                self.stats.updates += 1;
                self.stats.entries_requested += mu.len();
                state[s] = match self.config.mode {
                    SamplerMode::Herded => {
                        let w = self.weights.map.entry(k).or_insert_with(|| mu.clone());
                        herd(w, &mu)
                    }
                    SamplerMode::Stochastic => WeightedIndex::new(&mu)
                        .map_err(|_| Error::DegenerateConditional { coordinate: s })?
                        .sample(&mut self.rng),
                };
                if !seen.contains(&state) {
                    seen.insert(state.clone());
                    visited.push(state.clone());
                }
            }
            if self.config.cycling {
                next_permutation(&mut order);
            }
        }
        Ok(ChainOutput {
            states: visited,
            stats: self.stats,
        })
    }
}

/// Run a fresh chain for `config.iterations` sweeps from `initial`.
pub fn sample_chain<E: ConditionalEvaluator + ?Sized>(
    evaluator: &E,
    initial: &[usize],
    config: &GibbsConfig,
) -> Result<ChainOutput> {
    GibbsSampler::new(config.clone()).run(evaluator, initial)
}
