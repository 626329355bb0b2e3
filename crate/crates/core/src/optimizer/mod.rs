//! The two-phase maximization pipeline.
//!
//! Phase one freezes a partial solution `S0` with the lazy sampling greedy.
//! Phase two runs continuous greedy on `f(. | S0)` over the matroid
//! contracted by `S0`, and swap rounding turns the fractional solution into a
//! set `S1`. The result is `S0 + S1`.

mod descending;
mod phase1;

pub use descending::{
    continuous_greedy, dt_approx_indep_set, dt_incremental, round_count, DtStats, DtVariant, MarginalEstimator,
    MultilinearMarginals, Phase2Config, Phase2Stats, SetMarginals,
};
pub use phase1::{estimate_opt, lazy_sampling_greedy_plus, OptEstimate, Phase1Config, Phase1Outcome, Phase1Stats};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::element::ElementId;
use crate::error::{invalid, precondition, Error, Result};
use crate::matroid::Matroid;
use crate::rounding::swap_round_contracted;
use crate::submodular::{FractionalPoint, ValueOracle};

/// A convex combination of independent sets, `x = sum_i alpha_i 1_{B_i}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FractionalSolution {
    n: usize,
    bases: Vec<(f64, Vec<ElementId>)>,
}

impl FractionalSolution {
    /// Checks that the coefficients are non-negative and sum to one and that
    /// every id is below `n`.
    pub fn new(n: usize, bases: Vec<(f64, Vec<ElementId>)>) -> Result<Self> {
        if bases.is_empty() {
            return Err(invalid("a fractional solution needs at least one set"));
        }
        if bases.iter().any(|(a, _)| !(*a >= 0.0)) {
            return Err(invalid("coefficients must be non-negative"));
        }
        let total: f64 = bases.iter().map(|(a, _)| a).sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(invalid(format!("coefficients sum to {total}, not 1")));
        }
        for (_, b) in &bases {
            if let Some(e) = b.iter().find(|e| e.index() >= n) {
                return Err(Error::UnknownElement(e.index()));
            }
        }
        Ok(FractionalSolution { n, bases })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn bases(&self) -> &[(f64, Vec<ElementId>)] {
        &self.bases
    }

    pub fn point(&self) -> FractionalPoint {
        let mut x = vec![0.0; self.n];
        for (a, b) in &self.bases {
            for e in b {
                x[e.index()] += a;
            }
        }
        FractionalPoint::new(x.into_iter().map(|v| v.min(1.0)).collect()).expect("convex combination stays in the cube")
    }

    /// Extends every set to a basis of `matroid` contracted by `seed`, adding
    /// elements in id order.
    pub fn completed(&self, matroid: &Matroid, seed: &[ElementId]) -> Result<FractionalSolution> {
        let bases = self
            .bases
            .iter()
            .map(|(a, b)| complete_to_basis(matroid, seed, b).map(|full| (*a, full)))
            .collect::<Result<Vec<_>>>()?;
        Ok(FractionalSolution { n: self.n, bases })
    }
}

/// Extends `set` to a basis of `matroid` contracted by `seed`, trying the
/// remaining elements in id order. The result excludes `seed` and is sorted.
pub fn complete_to_basis(matroid: &Matroid, seed: &[ElementId], set: &[ElementId]) -> Result<Vec<ElementId>> {
    let mut start: Vec<ElementId> = seed.iter().chain(set).copied().collect();
    start.sort_unstable();
    start.dedup();
    if start.len() != seed.len() + set.len() {
        return Err(invalid("set overlaps the seed or repeats an element"));
    }
    let mut oracle = matroid.incremental_oracle(&start)?;
    let mut taken = vec![false; matroid.n()];
    for e in &start {
        taken[e.index()] = true;
    }
    let mut out = set.to_vec();
    for e in (0..matroid.n()).map(ElementId::new) {
        if !taken[e.index()] && oracle.test(e) {
            oracle.insert(e)?;
            out.push(e);
        }
    }
    out.sort_unstable();
    Ok(out)
}

/// Named random streams derived from the master seed.
pub mod streams {
    pub const PHASE1: u64 = 1;
    pub const MULTILINEAR: u64 = 2;
    pub const ROUNDING: u64 = 3;
}

/// The generator of stream `stream` under master seed `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Every knob of the pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    /// Target accuracy; phase one runs with a quarter of it.
    pub epsilon: f64,
    pub threshold_factor: f64,
    pub sample_factor: f64,
    pub weight_gate: bool,
    pub sample_constant: f64,
    pub variant: Option<DtVariant>,
    pub threads: usize,
}

impl PipelineConfig {
    pub fn new(epsilon: f64) -> Self {
        let p1 = Phase1Config::new(epsilon / 4.0);
        let p2 = Phase2Config::new(epsilon);
        PipelineConfig {
            epsilon,
            threshold_factor: p1.threshold_factor,
            sample_factor: p1.sample_factor,
            weight_gate: p1.weight_gate,
            sample_constant: p2.sample_constant,
            variant: p2.variant,
            threads: p2.threads,
        }
    }

    pub fn phase1(&self) -> Phase1Config {
        Phase1Config {
            epsilon: self.epsilon / 4.0,
            threshold_factor: self.threshold_factor,
            sample_factor: self.sample_factor,
            weight_gate: self.weight_gate,
        }
    }

    pub fn phase2(&self) -> Phase2Config {
        Phase2Config {
            epsilon: self.epsilon,
            sample_constant: self.sample_constant,
            variant: self.variant,
            threads: self.threads,
        }
    }
}

/// Instrumentation of one pipeline run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PipelineCounters {
    /// Queries spent on the scale estimate; included in `phase1_queries`.
    pub estimate_queries: u64,
    pub phase1_queries: u64,
    pub phase2_queries: u64,
    pub phase1: Phase1Stats,
    pub phase2: Phase2Stats,
    pub rounding_merges: u64,
}

/// Result of one pipeline run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineOutcome {
    /// `S0 + S1`, sorted.
    pub solution: Vec<ElementId>,
    pub value: f64,
    /// Phase-one set in freeze order.
    pub frozen: Vec<ElementId>,
    /// Rounded phase-two set, sorted.
    pub rounded: Vec<ElementId>,
    pub estimate: f64,
    pub fractional: FractionalSolution,
    pub counters: PipelineCounters,
}

/// Runs both phases and the rounding with randomness drawn from the named
/// streams of `seed`.
pub fn run_pipeline(f: &ValueOracle, matroid: &Matroid, config: &PipelineConfig, seed: u64) -> Result<PipelineOutcome> {
    if !(config.epsilon > 0.0 && config.epsilon < 1.0 / 3.0) {
        return Err(invalid(format!("epsilon must lie in (0, 1/3), got {}", config.epsilon)));
    }
    if f.n() != matroid.n() {
        return Err(invalid(format!("objective has {} elements, matroid has {}", f.n(), matroid.n())));
    }
    let n = f.n();
    let mut counters = PipelineCounters::default();
    if n == 0 || matroid.rank() == 0 {
        let fractional = FractionalSolution::new(n, vec![(1.0, Vec::new())])?;
        let value = f.value(&[])?;
        return Ok(PipelineOutcome {
            solution: Vec::new(),
            value,
            frozen: Vec::new(),
            rounded: Vec::new(),
            estimate: 0.0,
            fractional,
            counters,
        });
    }

    let start = f.query_count();
    let estimate = estimate_opt(f, matroid)?;
    counters.estimate_queries = f.query_count() - start;
    let phase1 = lazy_sampling_greedy_plus(
        f,
        matroid,
        estimate.value,
        &estimate.singletons,
        &config.phase1(),
        &mut stream_rng(seed, streams::PHASE1),
    )?;
    counters.phase1_queries = f.query_count() - start;
    counters.phase1 = phase1.stats;
    let frozen = phase1.solution;

    let mid = f.query_count();
    let (fractional, phase2) = continuous_greedy(
        f,
        matroid,
        &frozen,
        estimate.value,
        &config.phase2(),
        &mut stream_rng(seed, streams::MULTILINEAR),
    )?;
    counters.phase2_queries = f.query_count() - mid;
    counters.phase2 = phase2;

    let full = fractional.completed(matroid, &frozen)?;
    counters.rounding_merges = full.bases().len().saturating_sub(1) as u64;
    let rounded = swap_round_contracted(&full, matroid, &frozen, &mut stream_rng(seed, streams::ROUNDING))?;

    let mut solution: Vec<ElementId> = frozen.iter().chain(&rounded).copied().collect();
    solution.sort_unstable();
    solution.dedup();
    if solution.len() != frozen.len() + rounded.len() || !matroid.is_independent(&solution) {
        return Err(precondition("pipeline produced a dependent set"));
    }
    let value = f.value(&solution)?;
    Ok(PipelineOutcome {
        solution,
        value,
        frozen,
        rounded,
        estimate: estimate.value,
        fractional,
        counters,
    })
}
