//! Continuous greedy with descending thresholds.
//!
//! Each round grows a basis greedily with respect to estimated partial
//! derivatives of the multilinear extension at `x + alpha * 1_B`, lowering a
//! threshold by a factor `1 - eps` per level, and moves `x` toward it.

use std::collections::VecDeque;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::element::ElementId;
use crate::error::{invalid, Result};
use crate::matroid::{Matroid, MatroidKind};
use crate::oracle::IncrementalOracle;
use crate::submodular::{sample_count, Evaluator, SampleBatch, ValueOracle};
use crate::transversal::DecrementalMatching;

use super::FractionalSolution;

/// Source of marginal values for the threshold greedy.
pub trait MarginalEstimator {
    /// Marginal value of `e` on top of the accepted elements.
    fn marginal(&mut self, e: ElementId) -> f64;
    /// Records that `e` joined the accepted elements.
    fn accept(&mut self, e: ElementId);
}

/// Exact marginals `f(B + e) - f(B)` of the set function itself.
pub struct SetMarginals<'f> {
    evaluator: Evaluator<'f>,
}

impl<'f> SetMarginals<'f> {
    pub fn new(f: &'f ValueOracle, base: &[ElementId]) -> Result<Self> {
        Ok(SetMarginals { evaluator: f.evaluator(base)? })
    }

    pub fn value(&self) -> f64 {
        self.evaluator.value()
    }
}

impl MarginalEstimator for SetMarginals<'_> {
    fn marginal(&mut self, e: ElementId) -> f64 {
        self.evaluator.gain(e)
    }

    fn accept(&mut self, e: ElementId) {
        self.evaluator.insert(e);
    }
}

/// Sampled partial derivatives of the multilinear extension of
/// `T -> f(T | base)` at `x + alpha * 1_B`, where `B` is the accepted set.
///
/// Estimates are cached until the accepted set changes.
pub struct MultilinearMarginals<'f, 'r, R: Rng + ?Sized> {
    f: &'f ValueOracle,
    base: Vec<ElementId>,
    samples: usize,
    threads: usize,
    rng: &'r mut R,
    batch: Option<SampleBatch<'f>>,
    point: Vec<f64>,
    alpha: f64,
    cache: Vec<Option<f64>>,
}

impl<'f, 'r, R: Rng + ?Sized> MultilinearMarginals<'f, 'r, R> {
    pub fn new(f: &'f ValueOracle, base: &[ElementId], samples: usize, threads: usize, rng: &'r mut R) -> Self {
        MultilinearMarginals {
            f,
            base: base.to_vec(),
            samples: samples.max(1),
            threads,
            rng,
            batch: None,
            point: vec![0.0; f.n()],
            alpha: 0.0,
            cache: vec![None; f.n()],
        }
    }

    /// Starts a round at point `x` with step `alpha`, drawing a fresh batch.
    pub fn begin_round(&mut self, x: &[f64], alpha: f64) {
        self.point = x.iter().map(|v| v.clamp(0.0, 1.0)).collect();
        self.alpha = alpha;
        self.cache.iter_mut().for_each(|c| *c = None);
        let batch = SampleBatch::draw(self.f, &self.base, &self.point, self.samples, &mut *self.rng);
        self.batch = Some(batch.with_threads(self.threads));
    }

    pub fn samples(&self) -> usize {
        self.samples
    }
}

impl<R: Rng + ?Sized> MarginalEstimator for MultilinearMarginals<'_, '_, R> {
    fn marginal(&mut self, e: ElementId) -> f64 {
        if let Some(v) = self.cache[e.index()] {
            return v;
        }
        let v = self.batch.as_ref().map_or(0.0, |b| b.mean_gain(e));
        self.cache[e.index()] = Some(v);
        v
    }

    fn accept(&mut self, e: ElementId) {
        let from = self.point[e.index()];
        let to = (from + self.alpha).min(1.0);
        if let Some(batch) = self.batch.as_mut() {
            batch.raise(e, from, to, &mut *self.rng);
        }
        self.point[e.index()] = to;
        self.cache.iter_mut().for_each(|c| *c = None);
    }
}

/// Which independence structure drives the threshold greedy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DtVariant {
    /// Exact incremental independence oracle.
    Incremental,
    /// Decremental approximate maximum matching with batch inserts.
    ApproxIndepSet,
}

impl DtVariant {
    /// Incremental where an exact incremental oracle exists, matching-based for transversal.
    pub fn for_kind(kind: MatroidKind) -> Self {
        match kind {
            MatroidKind::Transversal => DtVariant::ApproxIndepSet,
            MatroidKind::Laminar | MatroidKind::Graphic => DtVariant::Incremental,
        }
    }
}

/// Counters of the threshold greedy runs.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DtStats {
    pub invocations: u64,
    pub levels: u64,
    pub tests: u64,
    pub inserts: u64,
    pub batch_inserts: u64,
    pub deletes: u64,
    pub validations: u64,
}

fn first_threshold(est: &mut dyn MarginalEstimator, candidates: &[ElementId]) -> f64 {
    candidates.iter().map(|&e| est.marginal(e)).fold(0.0, f64::max)
}

fn check_floor(epsilon: f64, floor: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(invalid(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    if !(floor > 0.0 && floor.is_finite()) {
        return Err(invalid(format!("threshold floor must be positive, got {floor}")));
    }
    Ok(())
}

/// Threshold greedy over an incremental independence oracle. An element the
/// oracle rejects is never tested again. Returns the accepted elements in
/// order.
pub fn dt_incremental(
    est: &mut dyn MarginalEstimator,
    oracle: &mut dyn IncrementalOracle,
    candidates: &[ElementId],
    epsilon: f64,
    floor: f64,
    stats: &mut DtStats,
) -> Result<Vec<ElementId>> {
    check_floor(epsilon, floor)?;
    stats.invocations += 1;
    let mut alive: Vec<ElementId> = candidates.to_vec();
    let mut chosen = Vec::new();
    let mut tau = first_threshold(est, &alive);
    while tau >= floor && !alive.is_empty() {
        stats.levels += 1;
        let level: Vec<ElementId> = alive.iter().copied().filter(|&e| est.marginal(e) >= tau).collect();
        let mut gone = Vec::new();
        for e in level {
            if est.marginal(e) < tau {
                continue;
            }
            stats.tests += 1;
            if oracle.test(e) {
                stats.inserts += 1;
                oracle.insert(e)?;
                est.accept(e);
                chosen.push(e);
            }
            gone.push(e);
        }
        if !gone.is_empty() {
            gone.sort_unstable();
            alive.retain(|e| gone.binary_search(e).is_err());
        }
        tau *= 1.0 - epsilon;
    }
    Ok(chosen)
}

/// Threshold greedy over a decremental approximate matching: each level
/// batch-inserts the elements whose marginal reached the threshold and that
/// were not offered since it last dropped, then checks every newly matched
/// element and deletes those whose marginal fell below the threshold,
/// checking whatever the deletion brings in. Returns the accepted elements in
/// order.
pub fn dt_approx_indep_set(
    est: &mut dyn MarginalEstimator,
    structure: &mut DecrementalMatching,
    candidates: &[ElementId],
    epsilon: f64,
    floor: f64,
    stats: &mut DtStats,
) -> Result<Vec<ElementId>> {
    check_floor(epsilon, floor)?;
    stats.invocations += 1;
    let n = candidates.iter().map(|e| e.index() + 1).max().unwrap_or(0);
    let mut accepted = vec![false; n];
    // threshold at which each element was last offered
    let mut offered = vec![f64::INFINITY; n];
    let mut chosen = Vec::new();
    let mut tau = first_threshold(est, candidates);
    while tau >= floor {
        stats.levels += 1;
        let level: Vec<ElementId> = candidates
            .iter()
            .copied()
            .filter(|&e| !accepted[e.index()] && (tau..offered[e.index()]).contains(&est.marginal(e)))
            .collect();
        for e in &level {
            offered[e.index()] = tau;
        }
        if !level.is_empty() {
            stats.batch_inserts += 1;
            let mut queue: VecDeque<ElementId> = structure.batch_insert(&level)?.into();
            while let Some(e) = queue.pop_front() {
                if e.index() >= n || accepted[e.index()] || !structure.test(e) {
                    continue;
                }
                stats.validations += 1;
                if est.marginal(e) < tau {
                    stats.deletes += 1;
                    queue.extend(structure.delete(e)?);
                } else {
                    accepted[e.index()] = true;
                    est.accept(e);
                    chosen.push(e);
                }
            }
        }
        if chosen.len() == candidates.len() {
            break;
        }
        tau *= 1.0 - epsilon;
    }
    Ok(chosen)
}

/// Tuning of the continuous greedy phase.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Phase2Config {
    pub epsilon: f64,
    /// Multiplier `c` of the per-estimate sample count `c * ln^2(n / eps) / eps`.
    pub sample_constant: f64,
    /// `None` picks the variant from the matroid class.
    pub variant: Option<DtVariant>,
    /// Worker threads for evaluating sample batches.
    pub threads: usize,
}

impl Phase2Config {
    pub fn new(epsilon: f64) -> Self {
        Phase2Config { epsilon, sample_constant: 1.0, variant: None, threads: 1 }
    }
}

/// Counters of the continuous greedy phase.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Phase2Stats {
    pub rounds: u64,
    pub samples_per_estimate: u64,
    pub variant: Option<DtVariant>,
    pub dt: DtStats,
}

/// Number of rounds `ceil(1 / eps)`, robust to `1 / eps` landing just above an integer.
pub fn round_count(epsilon: f64) -> usize {
    ((1.0 / epsilon) - 1e-9).ceil().max(1.0) as usize
}

/// Builds a fractional solution on `matroid` contracted by the independent
/// set `seed`, maximizing the multilinear extension of `T -> f(T | seed)`.
/// `m` is the scale estimate used for the lowest threshold.
pub fn continuous_greedy<R: Rng + ?Sized>(
    f: &ValueOracle,
    matroid: &Matroid,
    seed: &[ElementId],
    m: f64,
    config: &Phase2Config,
    rng: &mut R,
) -> Result<(FractionalSolution, Phase2Stats)> {
    let eps = config.epsilon;
    if !(eps > 0.0 && eps < 1.0) {
        return Err(invalid(format!("epsilon must lie in (0, 1), got {eps}")));
    }
    if f.n() != matroid.n() {
        return Err(invalid(format!("objective has {} elements, matroid has {}", f.n(), matroid.n())));
    }
    if !matroid.is_independent(seed) {
        return Err(invalid("seed set is not independent"));
    }
    let n = f.n();
    let rounds = round_count(eps);
    let alpha = 1.0 / rounds as f64;
    let variant = config.variant.unwrap_or_else(|| DtVariant::for_kind(matroid.kind()));
    let samples = sample_count(n, eps, config.sample_constant);
    let mut stats = Phase2Stats { samples_per_estimate: samples as u64, variant: Some(variant), ..Default::default() };

    let mut in_seed = vec![false; n];
    for &e in seed {
        in_seed[e.index()] = true;
    }
    let candidates: Vec<ElementId> = (0..n).filter(|&e| !in_seed[e]).map(ElementId::new).collect();
    let free_rank = matroid.rank().saturating_sub(seed.len());
    if free_rank == 0 || !(m > 0.0) || candidates.is_empty() {
        let bases = vec![(1.0, Vec::new())];
        return Ok((FractionalSolution::new(n, bases)?, stats));
    }
    let floor = eps / free_rank as f64 * m;

    let mut est = MultilinearMarginals::new(f, seed, samples, config.threads, rng);
    let mut x = vec![0.0; n];
    let mut bases = Vec::with_capacity(rounds);
    for _ in 0..rounds {
        stats.rounds += 1;
        est.begin_round(&x, alpha);
        let chosen = match variant {
            DtVariant::Incremental => {
                let mut oracle = matroid.incremental_oracle(seed)?;
                dt_incremental(&mut est, oracle.as_mut(), &candidates, eps, floor, &mut stats.dt)?
            }
            DtVariant::ApproxIndepSet => {
                let Matroid::Transversal(t) = matroid else {
                    return Err(invalid("the matching-based variant needs a transversal matroid"));
                };
                let mut structure = DecrementalMatching::new(t, seed, eps)?;
                dt_approx_indep_set(&mut est, &mut structure, &candidates, eps, floor, &mut stats.dt)?
            }
        };
        for &e in &chosen {
            x[e.index()] = (x[e.index()] + alpha).min(1.0);
        }
        let mut basis = chosen;
        basis.sort_unstable();
        bases.push((alpha, basis));
    }
    Ok((FractionalSolution::new(n, bases)?, stats))
}
