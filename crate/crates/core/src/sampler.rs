//! Bucketed sampling over the non-frozen part of a maintained basis.
//!
//! Elements are kept in one list per weight class. Sampling with rate `t`
//! includes each element with probability `min(1, t * value / total)`: each
//! bucket draws a binomial count and then that many distinct members.

use rand::Rng;
use rand_distr::{Binomial, Distribution};

use crate::classes::WeightClassifier;
use crate::element::ElementId;
use crate::error::{invalid, precondition, Error, Result};

#[derive(Debug, Clone)]
pub struct BucketSampler {
    values: Vec<f64>,
    lists: Vec<Vec<ElementId>>,
    /// `(class, position)` of every present element.
    slot: Vec<Option<(u32, u32)>>,
    len: usize,
}

impl BucketSampler {
    /// Empty sampler over elements `0..n`, one bucket per class of `classifier`.
    pub fn new(classifier: &WeightClassifier, n: usize) -> Result<Self> {
        let values = (0..=classifier.num_classes()).map(|j| classifier.class_value(j)).collect::<Result<Vec<f64>>>()?;
        Ok(Self::with_values(values, n))
    }

    /// Empty sampler with explicit bucket values.
    pub fn with_values(values: Vec<f64>, n: usize) -> Self {
        let lists = vec![Vec::new(); values.len()];
        BucketSampler { values, lists, slot: vec![None; n], len: 0 }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn contains(&self, e: ElementId) -> bool {
        self.slot.get(e.index()).map_or(false, Option::is_some)
    }

    pub fn class_of(&self, e: ElementId) -> Option<usize> {
        self.slot.get(e.index()).copied().flatten().map(|(c, _)| c as usize)
    }

    pub fn bucket(&self, class: usize) -> &[ElementId] {
        &self.lists[class]
    }

    pub fn num_buckets(&self) -> usize {
        self.lists.len()
    }

    /// Total class value of the members, summed bucket by bucket.
    pub fn total_weight(&self) -> f64 {
        self.lists.iter().zip(&self.values).map(|(l, &v)| l.len() as f64 * v).sum()
    }

    pub fn members(&self) -> Vec<ElementId> {
        let mut all: Vec<ElementId> = self.lists.iter().flatten().copied().collect();
        all.sort_unstable();
        all
    }

    fn check(&self, e: ElementId) -> Result<()> {
        if e.index() < self.slot.len() {
            Ok(())
        } else {
            Err(Error::UnknownElement(e.index()))
        }
    }

    fn check_class(&self, class: usize) -> Result<()> {
        if class < self.lists.len() {
            Ok(())
        } else {
            Err(invalid(format!("class {class} out of range")))
        }
    }

    pub fn add(&mut self, e: ElementId, class: usize) -> Result<()> {
        self.check(e)?;
        self.check_class(class)?;
        if self.contains(e) {
            return Err(precondition(format!("{e} is already sampled from")));
        }
        self.slot[e.index()] = Some((class as u32, self.lists[class].len() as u32));
        self.lists[class].push(e);
        self.len += 1;
        Ok(())
    }

    pub fn remove(&mut self, e: ElementId) -> Result<()> {
        self.check(e)?;
        let (class, pos) = self.slot[e.index()].take().ok_or_else(|| precondition(format!("{e} is not present")))?;
        let list = &mut self.lists[class as usize];
        list.swap_remove(pos as usize);
        if let Some(&moved) = list.get(pos as usize) {
            self.slot[moved.index()] = Some((class, pos));
        }
        self.len -= 1;
        Ok(())
    }

    /// Moves `e` to a lower-valued class.
    pub fn decrement_move(&mut self, e: ElementId, class: usize) -> Result<()> {
        self.check(e)?;
        self.check_class(class)?;
        let current = self.class_of(e).ok_or_else(|| precondition(format!("{e} is not present")))?;
        if self.values[class] >= self.values[current] && class != current {
            return Err(invalid(format!("class {class} does not lower the value of {e}")));
        }
        if class == current {
            return Ok(());
        }
        self.remove(e)?;
        self.add(e, class)
    }

    /// Probability that `sample(t)` includes a member of `class`.
    pub fn inclusion_probability(&self, class: usize, t: f64) -> f64 {
        let total = self.total_weight();
        if total <= 0.0 {
            return 0.0;
        }
        (t * self.values[class] / total).min(1.0)
    }

    /// Includes each member with probability `min(1, t * value / total)`.
    pub fn sample<R: Rng + ?Sized>(&mut self, t: f64, rng: &mut R) -> Vec<ElementId> {
        let mut out = Vec::new();
        if !(t > 0.0) {
            return out;
        }
        for class in 0..self.lists.len() {
            let size = self.lists[class].len();
            if size == 0 {
                continue;
            }
            let p = self.inclusion_probability(class, t);
            let count = if p >= 1.0 {
                size
            } else if p <= 0.0 {
                0
            } else {
                Binomial::new(size as u64, p).expect("probability in (0, 1)").sample(rng) as usize
            };
            // partial Fisher-Yates: the first `count` positions become the sample
            for i in 0..count {
                let j = rng.gen_range(i..size);
                if i != j {
                    self.lists[class].swap(i, j);
                    let (a, b) = (self.lists[class][i], self.lists[class][j]);
                    self.slot[a.index()] = Some((class as u32, i as u32));
                    self.slot[b.index()] = Some((class as u32, j as u32));
                }
                out.push(self.lists[class][i]);
            }
        }
        out
    }

    /// Uniformly random member.
    pub fn uniform_sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<ElementId> {
        if self.len == 0 {
            return Err(precondition("sampler is empty"));
        }
        let mut k = rng.gen_range(0..self.len);
        for list in &self.lists {
            if k < list.len() {
                return Ok(list[k]);
            }
            k -= list.len();
        }
        unreachable!("index below the member count")
    }
}
