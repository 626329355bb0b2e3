//! Monotone submodular value oracles with query counting, and sampling
//! estimators for marginals of the multilinear extension.

use std::sync::atomic::{AtomicU64, Ordering};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::element::ElementId;
use crate::error::{invalid, Error, Result};

/// Payload of a value oracle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Objective {
    /// Weighted coverage: `f(S)` is the total weight of universe items covered by `S`.
    Coverage { universe_weights: Vec<f64>, sets: Vec<Vec<u32>> },
    /// Facility location: `f(S) = sum_c max_{e in S} similarity[e][c]`.
    Facility { similarity: Vec<Vec<f64>> },
    /// Modular function.
    Additive { weights: Vec<f64> },
}

impl Objective {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Instance(msg));
        let finite_nonneg = |x: f64| x.is_finite() && x >= 0.0;
        match self {
            Objective::Coverage { universe_weights, sets } => {
                if let Some(w) = universe_weights.iter().find(|&&w| !finite_nonneg(w)) {
                    return bad(format!("universe weight {w} is not a finite non-negative number"));
                }
                for (e, set) in sets.iter().enumerate() {
                    if let Some(&u) = set.iter().find(|&&u| u as usize >= universe_weights.len()) {
                        return bad(format!("element {e} covers unknown item {u}"));
                    }
                }
            }
            Objective::Facility { similarity } => {
                let clients = similarity.first().map_or(0, Vec::len);
                for (e, row) in similarity.iter().enumerate() {
                    if row.len() != clients {
                        return bad(format!("similarity row {e} has {} entries, expected {clients}", row.len()));
                    }
                    if row.iter().any(|&s| !finite_nonneg(s)) {
                        return bad(format!("similarity row {e} has a negative or non-finite entry"));
                    }
                }
            }
            Objective::Additive { weights } => {
                if weights.iter().any(|&w| !finite_nonneg(w)) {
                    return bad("additive weights must be finite and non-negative".into());
                }
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        match self {
            Objective::Coverage { sets, .. } => sets.len(),
            Objective::Facility { similarity } => similarity.len(),
            Objective::Additive { weights } => weights.len(),
        }
    }
}

/// A counted monotone submodular set function.
#[derive(Debug)]
pub struct ValueOracle {
    objective: Objective,
    queries: AtomicU64,
}

impl Clone for ValueOracle {
    fn clone(&self) -> Self {
        ValueOracle { objective: self.objective.clone(), queries: AtomicU64::new(self.query_count()) }
    }
}

impl ValueOracle {
    pub fn new(objective: Objective) -> Result<Self> {
        objective.validate()?;
        Ok(ValueOracle { objective, queries: AtomicU64::new(0) })
    }

    pub fn additive(weights: Vec<f64>) -> Result<Self> {
        Self::new(Objective::Additive { weights })
    }

    pub fn coverage(universe_weights: Vec<f64>, sets: Vec<Vec<u32>>) -> Result<Self> {
        Self::new(Objective::Coverage { universe_weights, sets })
    }

    pub fn facility(similarity: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(Objective::Facility { similarity })
    }

    pub fn objective(&self) -> &Objective {
        &self.objective
    }

    /// Ground-set size.
    pub fn n(&self) -> usize {
        self.objective.n()
    }

    pub fn query_count(&self) -> u64 {
        self.queries.load(Ordering::Relaxed)
    }

    pub fn reset_query_count(&self) {
        self.queries.store(0, Ordering::Relaxed);
    }

    #[inline]
    fn count(&self, k: u64) {
        self.queries.fetch_add(k, Ordering::Relaxed);
    }

    fn check(&self, e: ElementId) -> Result<()> {
        if e.index() < self.n() {
            Ok(())
        } else {
            Err(Error::UnknownElement(e.index()))
        }
    }

    /// `f(S)`; one query.
    pub fn value(&self, set: &[ElementId]) -> Result<f64> {
        let mut ev = Evaluator::empty_uncounted(self);
        for &e in set {
            self.check(e)?;
            ev.insert(e);
        }
        self.count(1);
        Ok(ev.value())
    }

    /// `f(S + e) - f(S)`; two queries.
    pub fn marginal(&self, e: ElementId, set: &[ElementId]) -> Result<f64> {
        self.check(e)?;
        if set.contains(&e) {
            return Err(invalid(format!("{e} is already in the base set")));
        }
        let mut ev = Evaluator::empty_uncounted(self);
        for &s in set {
            self.check(s)?;
            ev.insert(s);
        }
        self.count(2);
        Ok(ev.gain_uncounted(e))
    }

    /// Incremental evaluator positioned at `set`; one query.
    pub fn evaluator(&self, set: &[ElementId]) -> Result<Evaluator<'_>> {
        let mut ev = Evaluator::empty_uncounted(self);
        for &e in set {
            self.check(e)?;
            ev.insert(e);
        }
        self.count(1);
        Ok(ev)
    }
}

#[derive(Debug, Clone)]
enum CoverState {
    Coverage(Vec<u32>),
    /// Per client: best similarity, the element attaining it, runner-up similarity.
    Facility { best: Vec<f64>, owner: Vec<u32>, second: Vec<f64> },
    Additive,
}

/// Cached state of `f` at some set, answering marginal gains in time
/// proportional to the element's footprint. Each gain is one counted query.
#[derive(Debug, Clone)]
pub struct Evaluator<'a> {
    f: &'a ValueOracle,
    member: Vec<bool>,
    value: f64,
    state: CoverState,
}

impl<'a> Evaluator<'a> {
    fn empty_uncounted(f: &'a ValueOracle) -> Self {
        let state = match &f.objective {
            Objective::Coverage { universe_weights, .. } => CoverState::Coverage(vec![0; universe_weights.len()]),
            Objective::Facility { similarity } => {
                let clients = similarity.first().map_or(0, Vec::len);
                CoverState::Facility {
                    best: vec![0.0; clients],
                    owner: vec![u32::MAX; clients],
                    second: vec![0.0; clients],
                }
            }
            Objective::Additive { .. } => CoverState::Additive,
        };
        Evaluator { f, member: vec![false; f.n()], value: 0.0, state }
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn contains(&self, e: ElementId) -> bool {
        self.member[e.index()]
    }

    /// `f(S + e) - f(S)` for the current set `S`; one query.
    pub fn gain(&self, e: ElementId) -> f64 {
        self.f.count(1);
        self.gain_uncounted(e)
    }

    fn gain_uncounted(&self, e: ElementId) -> f64 {
        if self.member[e.index()] {
            return 0.0;
        }
        match (&self.state, &self.f.objective) {
            (CoverState::Coverage(cnt), Objective::Coverage { universe_weights, sets }) => sets[e.index()]
                .iter()
                .filter(|&&u| cnt[u as usize] == 0)
                .map(|&u| universe_weights[u as usize])
                .sum(),
            (CoverState::Facility { best, .. }, Objective::Facility { similarity }) => similarity[e.index()]
                .iter()
                .zip(best)
                .map(|(&s, &b)| (s - b).max(0.0))
                .sum(),
            (CoverState::Additive, Objective::Additive { weights }) => weights[e.index()],
            _ => unreachable!("evaluator state does not match objective"),
        }
    }

    /// `f(S + e) - f(S - e)`: the gain of `e` if absent, otherwise what removing
    /// it would lose. One query.
    pub fn swing(&self, e: ElementId) -> f64 {
        self.f.count(1);
        if !self.member[e.index()] {
            return self.gain_uncounted(e);
        }
        match (&self.state, &self.f.objective) {
            (CoverState::Coverage(cnt), Objective::Coverage { universe_weights, sets }) => sets[e.index()]
                .iter()
                .filter(|&&u| cnt[u as usize] == 1)
                .map(|&u| universe_weights[u as usize])
                .sum(),
            (CoverState::Facility { best, owner, second }, Objective::Facility { .. }) => (0..best.len())
                .filter(|&c| owner[c] == e.0)
                .map(|c| best[c] - second[c])
                .sum(),
            (CoverState::Additive, Objective::Additive { weights }) => weights[e.index()],
            _ => unreachable!("evaluator state does not match objective"),
        }
    }

    /// Adds `e` to the current set. Not counted: callers either already paid for
    /// the gain or are building a sample state that was counted on creation.
    pub fn insert(&mut self, e: ElementId) {
        if self.member[e.index()] {
            return;
        }
        self.value += self.gain_uncounted(e);
        self.member[e.index()] = true;
        match (&mut self.state, &self.f.objective) {
            (CoverState::Coverage(cnt), Objective::Coverage { sets, .. }) => {
                for &u in &sets[e.index()] {
                    cnt[u as usize] += 1;
                }
            }
            (CoverState::Facility { best, owner, second }, Objective::Facility { similarity }) => {
                for (c, &s) in similarity[e.index()].iter().enumerate() {
                    if s > best[c] {
                        second[c] = best[c];
                        best[c] = s;
                        owner[c] = e.0;
                    } else if s > second[c] {
                        second[c] = s;
                    }
                }
            }
            _ => {}
        }
    }
}

/// A point of the unit cube indexed by element.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FractionalPoint(Vec<f64>);

impl FractionalPoint {
    pub fn new(x: Vec<f64>) -> Result<Self> {
        if let Some(v) = x.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(invalid(format!("coordinate {v} outside [0, 1]")));
        }
        Ok(FractionalPoint(x))
    }

    pub fn zeros(n: usize) -> Self {
        FractionalPoint(vec![0.0; n])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, e: ElementId) -> f64 {
        self.0[e.index()]
    }

    /// Adds `delta` to coordinate `e`, clamped to `[0, 1]`.
    pub fn bump(&mut self, e: ElementId, delta: f64) {
        let v = &mut self.0[e.index()];
        *v = (*v + delta).clamp(0.0, 1.0);
    }
}

/// Draws `R` with each element included independently with probability `x_e`.
pub fn sample_set<R: Rng + ?Sized>(x: &[f64], rng: &mut R) -> Vec<ElementId> {
    x.iter()
        .enumerate()
        .filter(|&(_, &p)| p >= 1.0 || (p > 0.0 && rng.gen::<f64>() < p))
        .map(|(i, _)| ElementId::new(i))
        .collect()
}

/// Number of samples used to estimate one multilinear marginal:
/// `ceil(c * ln^2(n / eps) / eps)`, at least one.
pub fn sample_count(n: usize, epsilon: f64, c: f64) -> usize {
    let l = (n.max(1) as f64 / epsilon).ln().max(1.0);
    ((c * l * l / epsilon).ceil() as usize).max(1)
}

/// A batch of sampled evaluator states sharing one distribution, used to
/// estimate `E[f(R + e) - f(R - e)]`, the partial derivative of the
/// multilinear extension, for many elements `e`.
pub struct SampleBatch<'a> {
    states: Vec<Evaluator<'a>>,
    threads: usize,
}

impl<'a> SampleBatch<'a> {
    /// Draws `samples` sets `R ~ probs`, each unioned with `base`. Costs one
    /// query per sample.
    pub fn draw<R: Rng + ?Sized>(
        f: &'a ValueOracle,
        base: &[ElementId],
        probs: &[f64],
        samples: usize,
        rng: &mut R,
    ) -> Self {
        let mut seeded = Evaluator::empty_uncounted(f);
        for &e in base {
            seeded.insert(e);
        }
        let states = (0..samples)
            .map(|_| {
                let mut ev = seeded.clone();
                for e in sample_set(probs, rng) {
                    ev.insert(e);
                }
                ev
            })
            .collect();
        f.count(samples as u64);
        SampleBatch { states, threads: 1 }
    }

    /// Evaluates gains on up to `threads` OS threads. The result does not
    /// depend on the thread count.
    pub fn with_threads(mut self, threads: usize) -> Self {
        self.threads = threads.max(1);
        self
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Moves the sampling probability of `e` from `from` up to `to` by adding
    /// `e` to each sample that lacks it with probability `(to - from) / (1 - from)`.
    /// The batch then follows the raised distribution. Not counted.
    pub fn raise<R: Rng + ?Sized>(&mut self, e: ElementId, from: f64, to: f64, rng: &mut R) {
        let p = if from >= 1.0 { 0.0 } else { ((to - from) / (1.0 - from)).clamp(0.0, 1.0) };
        if p <= 0.0 {
            return;
        }
        for ev in &mut self.states {
            if !ev.contains(e) && (p >= 1.0 || rng.gen::<f64>() < p) {
                ev.insert(e);
            }
        }
    }

    /// Sample mean of `f(R + e) - f(R - e)`; one query per sample.
    pub fn mean_gain(&self, e: ElementId) -> f64 {
        if self.states.is_empty() {
            return 0.0;
        }
        let gain = |ev: &Evaluator<'_>| ev.swing(e);
        let gains: Vec<f64> = if self.threads > 1 && self.states.len() >= 2 * self.threads {
            let chunk = self.states.len().div_ceil(self.threads);
            std::thread::scope(|scope| {
                let handles: Vec<_> = self
                    .states
                    .chunks(chunk)
                    .map(|part| scope.spawn(move || part.iter().map(gain).collect::<Vec<f64>>()))
                    .collect();
                handles.into_iter().flat_map(|h| h.join().expect("sampling worker panicked")).collect()
            })
        } else {
            self.states.iter().map(gain).collect()
        };
        gains.iter().sum::<f64>() / gains.len() as f64
    }
}

/// Estimates `dF/dx_e`, the expected marginal `f(R + e) - f(R)` over
/// `R ~ x` restricted to the other elements, with `sample_count(n, epsilon, c)`
/// samples.
pub fn estimate_marginal_on_point<R: Rng + ?Sized>(
    f: &ValueOracle,
    e: ElementId,
    x: &FractionalPoint,
    epsilon: f64,
    c: f64,
    rng: &mut R,
) -> Result<f64> {
    f.check(e)?;
    if x.len() != f.n() {
        return Err(invalid(format!("point has {} coordinates, oracle has {} elements", x.len(), f.n())));
    }
    let s = sample_count(f.n(), epsilon, c);
    Ok(SampleBatch::draw(f, &[], x.as_slice(), s, rng).mean_gain(e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ids(v: &[usize]) -> Vec<ElementId> {
        v.iter().map(|&i| ElementId::new(i)).collect()
    }

    fn two_sets() -> ValueOracle {
        // element 0 covers {a, b}, element 1 covers {b, c}
        ValueOracle::coverage(vec![1.0; 3], vec![vec![0, 1], vec![1, 2]]).unwrap()
    }

    #[test]
    fn empty_coverage_is_zero() {
        assert_eq!(two_sets().value(&[]).unwrap(), 0.0);
    }

    #[test]
    fn additive_value() {
        let f = ValueOracle::additive(vec![2.0, 3.0]).unwrap();
        assert_eq!(f.value(&ids(&[0, 1])).unwrap(), 5.0);
        assert_eq!(f.marginal(ElementId(0), &ids(&[1])).unwrap(), 2.0);
    }

    #[test]
    fn coverage_union_and_marginal() {
        let f = two_sets();
        assert_eq!(f.value(&ids(&[0, 1])).unwrap(), 3.0);
        assert_eq!(f.marginal(ElementId(1), &ids(&[0])).unwrap(), 1.0);
    }

    #[test]
    fn zero_singleton_has_zero_marginal() {
        let f = ValueOracle::coverage(vec![1.0], vec![vec![], vec![0]]).unwrap();
        assert_eq!(f.marginal(ElementId(0), &[]).unwrap(), 0.0);
    }

    #[test]
    fn query_accounting() {
        let f = two_sets();
        f.value(&ids(&[0])).unwrap();
        assert_eq!(f.query_count(), 1);
        f.marginal(ElementId(1), &ids(&[0])).unwrap();
        assert_eq!(f.query_count(), 3);
        let ev = f.evaluator(&ids(&[0])).unwrap();
        assert_eq!(ev.gain(ElementId(1)), 1.0);
        assert_eq!(f.query_count(), 5);
    }

    #[test]
    fn domain_errors() {
        let f = two_sets();
        assert!(matches!(f.value(&ids(&[7])), Err(Error::UnknownElement(7))));
        assert!(f.marginal(ElementId(0), &ids(&[0])).is_err());
        assert!(FractionalPoint::new(vec![1.5]).is_err());
        assert!(ValueOracle::additive(vec![-1.0]).is_err());
        assert!(ValueOracle::coverage(vec![1.0], vec![vec![3]]).is_err());
    }

    #[test]
    fn facility_takes_best_per_client() {
        let f = ValueOracle::facility(vec![vec![1.0, 0.0], vec![0.5, 2.0]]).unwrap();
        assert_eq!(f.value(&ids(&[0, 1])).unwrap(), 3.0);
        assert_eq!(f.marginal(ElementId(1), &ids(&[0])).unwrap(), 2.0);
    }

    #[test]
    fn degenerate_points_sample_deterministically() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(sample_set(&[1.0, 1.0, 1.0], &mut rng), ids(&[0, 1, 2]));
        assert!(sample_set(&[0.0, 0.0], &mut rng).is_empty());
        let f = two_sets();
        let x = FractionalPoint::new(vec![1.0, 0.0]).unwrap();
        let est = estimate_marginal_on_point(&f, ElementId(1), &x, 0.2, 1.0, &mut rng).unwrap();
        assert_eq!(est, 1.0);
    }

    #[test]
    fn additive_estimate_is_exact() {
        let f = ValueOracle::additive(vec![1.0, 4.0, 2.5]).unwrap();
        let x = FractionalPoint::new(vec![0.3, 0.6, 0.9]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for (e, w) in [(0, 1.0), (1, 4.0), (2, 2.5)] {
            let est = estimate_marginal_on_point(&f, ElementId(e), &x, 0.2, 1.0, &mut rng).unwrap();
            assert_eq!(est, w);
        }
    }

    #[test]
    fn swing_matches_value_differences() {
        let f = ValueOracle::facility(vec![vec![1.0, 3.0], vec![2.0, 3.0], vec![0.5, 1.0]]).unwrap();
        let ev = f.evaluator(&ids(&[0, 1])).unwrap();
        // removing 1 drops client 0 from 2 to 1; client 1 is tied and owned by 0
        assert_eq!(ev.swing(ElementId(1)), 1.0);
        assert_eq!(ev.swing(ElementId(0)), 0.0);
        assert_eq!(ev.swing(ElementId(2)), 0.0);
        let g = two_sets();
        let ev = g.evaluator(&ids(&[0, 1])).unwrap();
        assert_eq!(ev.swing(ElementId(0)), 1.0);
    }

    #[test]
    fn thread_count_does_not_change_estimates() {
        let f = ValueOracle::coverage(vec![1.0, 2.0, 0.5, 1.5], vec![vec![0, 1], vec![1, 2], vec![2, 3], vec![0, 3]])
            .unwrap();
        let probs = [0.5, 0.3, 0.7, 0.2];
        let one = SampleBatch::draw(&f, &[], &probs, 64, &mut ChaCha8Rng::seed_from_u64(9));
        let four = SampleBatch::draw(&f, &[], &probs, 64, &mut ChaCha8Rng::seed_from_u64(9)).with_threads(4);
        for e in 0..4 {
            assert_eq!(one.mean_gain(ElementId(e)), four.mean_gain(ElementId(e)));
        }
    }

    #[test]
    fn sample_count_formula() {
        // ln(60)^2 / 0.2 = 83.8...
        assert_eq!(sample_count(12, 0.2, 1.0), 84);
    }
}
