//! Scale estimate and the lazy sampling greedy phase.

use std::collections::BinaryHeap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::classes::WeightClassifier;
use crate::element::{ElementId, WeightKey};
use crate::error::{invalid, Result};
use crate::matroid::Matroid;
use crate::oracle::{MaxWeightOracle, OracleChanges};
use crate::sampler::BucketSampler;
use crate::submodular::{Evaluator, ValueOracle};

/// A constant-factor estimate of the optimum from lazy greedy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptEstimate {
    /// `f` of the greedy set: at least half the optimum, never above it.
    pub value: f64,
    pub set: Vec<ElementId>,
    /// `f({e})` for every element.
    pub singletons: Vec<f64>,
}

/// Lazy greedy over the matroid: repeatedly adds the element of largest
/// marginal among those that keep the set independent.
pub fn estimate_opt(f: &ValueOracle, matroid: &Matroid) -> Result<OptEstimate> {
    if f.n() != matroid.n() {
        return Err(invalid(format!("objective has {} elements, matroid has {}", f.n(), matroid.n())));
    }
    if f.n() == 0 {
        return Err(invalid("empty ground set"));
    }
    let mut ev = f.evaluator(&[])?;
    let singletons: Vec<f64> = (0..f.n()).map(|e| ev.gain(ElementId::new(e))).collect();
    let mut heap: BinaryHeap<WeightKey> =
        singletons.iter().enumerate().map(|(e, &w)| WeightKey::new(w, ElementId::new(e))).collect();
    let mut oracle = matroid.incremental_oracle(&[])?;
    let mut fresh = vec![true; f.n()];
    let mut set = Vec::new();
    let rank = matroid.rank();
    while set.len() < rank {
        let Some(top) = heap.pop() else { break };
        let e = top.id;
        if !oracle.test(e) {
            continue;
        }
        if !fresh[e.index()] {
            let gain = ev.gain(e);
            fresh[e.index()] = true;
            if heap.peek().is_some_and(|next| WeightKey::new(gain, e) < *next) {
                heap.push(WeightKey::new(gain, e));
                continue;
            }
        }
        oracle.insert(e)?;
        ev.insert(e);
        set.push(e);
        fresh.iter_mut().for_each(|x| *x = false);
    }
    Ok(OptEstimate { value: ev.value(), set, singletons })
}

/// Tuning of the lazy sampling greedy phase.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Phase1Config {
    pub epsilon: f64,
    /// The loop runs while the oracle's weight is at least `threshold_factor / eps * M`.
    pub threshold_factor: f64,
    /// Expected sample size is `sample_factor * ln n`.
    pub sample_factor: f64,
    /// Gate on stale weight instead of stale element counts.
    pub weight_gate: bool,
}

impl Phase1Config {
    pub fn new(epsilon: f64) -> Self {
        Phase1Config { epsilon, threshold_factor: 50.0, sample_factor: 128.0, weight_gate: false }
    }
}

/// Instrumentation of one lazy sampling greedy run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Phase1Stats {
    pub iterations: u64,
    pub sampled: u64,
    pub decrements: u64,
    pub freezes: u64,
    pub gate_failures: u64,
    pub oracle_calls: u64,
    pub oracle_structural_ops: u64,
    /// Oracle weight when the loop stopped.
    pub exit_weight: f64,
    pub exit_threshold: f64,
    /// Whether the loop stopped because no unfrozen element was left.
    pub exhausted: bool,
}

/// Output of the lazy sampling greedy phase.
#[derive(Debug, Clone, PartialEq)]
pub struct Phase1Outcome {
    /// Frozen elements in freeze order.
    pub solution: Vec<ElementId>,
    pub stats: Phase1Stats,
}

struct Phase1<'a, 'f> {
    oracle: Box<dyn MaxWeightOracle>,
    sampler: BucketSampler,
    classes: Vec<usize>,
    frozen: Vec<bool>,
    evaluator: Evaluator<'f>,
    classifier: &'a WeightClassifier,
    stats: Phase1Stats,
}

impl Phase1<'_, '_> {
    fn sync(&mut self, changes: &OracleChanges) -> Result<()> {
        for &e in &changes.removed {
            if self.sampler.contains(e) {
                self.sampler.remove(e)?;
            }
        }
        for &e in &changes.added {
            if !self.frozen[e.index()] && !self.sampler.contains(e) {
                self.sampler.add(e, self.classes[e.index()])?;
            }
        }
        Ok(())
    }

    fn decrement(&mut self, e: ElementId, class: usize) -> Result<()> {
        self.stats.decrements += 1;
        self.stats.oracle_calls += 1;
        let changes = self.oracle.decrement(e, class)?;
        self.classes[e.index()] = class;
        self.sync(&changes)?;
        if self.sampler.contains(e) && self.sampler.class_of(e) != Some(class) {
            self.sampler.decrement_move(e, class)?;
        }
        Ok(())
    }

    fn freeze(&mut self, e: ElementId) -> Result<()> {
        self.stats.freezes += 1;
        self.stats.oracle_calls += 1;
        let changes = self.oracle.freeze(e)?;
        self.frozen[e.index()] = true;
        if self.sampler.contains(e) {
            self.sampler.remove(e)?;
        }
        self.sync(&changes)?;
        self.evaluator.insert(e);
        Ok(())
    }
}

/// The lazy sampling greedy phase. `m` is the scale estimate that stands in
/// for the optimum and `singletons` holds `f({e})`.
pub fn lazy_sampling_greedy_plus<R: Rng + ?Sized>(
    f: &ValueOracle,
    matroid: &Matroid,
    m: f64,
    singletons: &[f64],
    config: &Phase1Config,
    rng: &mut R,
) -> Result<Phase1Outcome> {
    let eps = config.epsilon;
    if !(eps > 0.0 && eps < 1.0 / 3.0) {
        return Err(invalid(format!("epsilon must lie in (0, 1/3), got {eps}")));
    }
    if singletons.len() != f.n() || f.n() != matroid.n() {
        return Err(invalid("objective, matroid and singleton values disagree on the ground-set size"));
    }
    let rank = matroid.rank();
    let threshold = config.threshold_factor / eps * m;
    let stats = Phase1Stats { exit_threshold: threshold, ..Default::default() };
    if rank == 0 || !(m > 0.0) {
        return Ok(Phase1Outcome { solution: Vec::new(), stats });
    }
    let classifier = WeightClassifier::new(m, eps, rank)?;
    let classes = singletons.iter().map(|&w| classifier.weight_class(w)).collect::<Result<Vec<usize>>>()?;
    let oracle = matroid.max_weight_oracle(classifier.clone(), &classes)?;
    let mut state = Phase1 {
        sampler: BucketSampler::new(&classifier, f.n())?,
        frozen: vec![false; f.n()],
        evaluator: f.evaluator(&[])?,
        classifier: &classifier,
        oracle,
        classes,
        stats,
    };
    let initial = OracleChanges { added: state.oracle.current(), removed: Vec::new() };
    state.sync(&initial)?;

    let rate = config.sample_factor * (f.n() as f64).ln().max(1.0);
    let mut solution = Vec::new();
    loop {
        state.stats.oracle_calls += 1;
        if state.oracle.approx_base_weight() < threshold {
            break;
        }
        if state.sampler.is_empty() {
            state.stats.exhausted = true;
            break;
        }
        state.stats.iterations += 1;
        let picked: Vec<(ElementId, f64, f64)> = {
            let sample = state.sampler.sample(rate, rng);
            sample
                .into_iter()
                .map(|e| {
                    let class = state.sampler.class_of(e).expect("sampled element is present");
                    let value = state.classifier.class_value(class).unwrap_or(0.0);
                    (e, state.sampler.inclusion_probability(class, rate), value)
                })
                .collect()
        };
        state.stats.sampled += picked.len() as u64;
        // [certain, uncertain] x [total, stale], counted or weighted
        let mut tally = [[0.0f64; 2]; 2];
        for &(e, p, value) in &picked {
            let gain = state.evaluator.gain(e);
            let class = state.classifier.weight_class(gain)?;
            let stale = class > state.classes[e.index()];
            let group = usize::from(p < 1.0);
            let amount = if config.weight_gate { value } else { 1.0 };
            tally[group][0] += amount;
            if stale {
                tally[group][1] += amount;
                state.decrement(e, class)?;
            }
        }
        let passes = tally.iter().all(|&[total, stale]| total == 0.0 || 2.0 * stale < total);
        if !passes {
            state.stats.gate_failures += 1;
            continue;
        }
        let e = state.sampler.uniform_sample(rng)?;
        state.freeze(e)?;
        solution.push(e);
    }
    state.stats.exit_weight = state.oracle.approx_base_weight();
    state.stats.oracle_structural_ops = state.oracle.structural_ops();
    Ok(Phase1Outcome { solution, stats: state.stats })
}
