//! Geometric weight classes for marginal values.
//!
//! Class `j` holds weights in `((1-eps)^(j+1) M, (1-eps)^j M]`, class 0 also
//! absorbs anything above `M`, and the bottom class `num_classes` holds every
//! weight at or below `eps M / (10 r)` and is valued at zero.

use crate::error::{invalid, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct WeightClassifier {
    m: f64,
    epsilon: f64,
    rank: usize,
    num_classes: usize,
    bottom_threshold: f64,
    /// `thresholds[j] = (1-eps)^j M` for every non-bottom class plus one sentinel.
    thresholds: Vec<f64>,
}

impl WeightClassifier {
    pub fn new(m: f64, epsilon: f64, rank: usize) -> Result<Self> {
        if !(m.is_finite() && m >= 0.0) {
            return Err(invalid(format!("scale M must be finite and non-negative, got {m}")));
        }
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(invalid(format!("epsilon must lie in (0, 1), got {epsilon}")));
        }
        if rank == 0 {
            return Err(invalid("rank must be positive"));
        }
        let ratio = 1.0 - epsilon;
        let num_classes = (10.0 * (epsilon / rank as f64).ln() / ratio.ln()).ceil() as usize;
        let bottom_threshold = epsilon * m / (10.0 * rank as f64);
        let mut thresholds = Vec::new();
        if m > 0.0 {
            let mut j = 0i32;
            loop {
                let t = m * ratio.powi(j);
                thresholds.push(t);
                if t <= bottom_threshold || thresholds.len() > num_classes {
                    break;
                }
                j += 1;
            }
        }
        Ok(WeightClassifier { m, epsilon, rank, num_classes, bottom_threshold, thresholds })
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Index of the bottom class.
    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn bottom_threshold(&self) -> f64 {
        self.bottom_threshold
    }

    /// Largest class index that a weight above the bottom threshold can land in,
    /// or `None` when every weight is bottom (M = 0).
    pub fn deepest_live_class(&self) -> Option<usize> {
        if self.thresholds.len() < 2 {
            None
        } else {
            Some((self.thresholds.len() - 2).min(self.num_classes - 1))
        }
    }

    pub fn weight_class(&self, w: f64) -> Result<usize> {
        if !(w >= 0.0) {
            return Err(invalid(format!("weight must be non-negative, got {w}")));
        }
        if w <= self.bottom_threshold || self.thresholds.len() < 2 {
            return Ok(self.num_classes);
        }
        // smallest j with w > thresholds[j + 1]
        let tail = &self.thresholds[1..];
        let j = tail.partition_point(|&t| w <= t);
        Ok(j.min(self.num_classes - 1))
    }

    pub fn class_value(&self, j: usize) -> Result<f64> {
        if j > self.num_classes {
            return Err(invalid(format!("class {j} out of range 0..={}", self.num_classes)));
        }
        if j == self.num_classes {
            return Ok(0.0);
        }
        Ok(match self.thresholds.get(j) {
            Some(&t) => t,
            None => self.m * (1.0 - self.epsilon).powi(j as i32),
        })
    }

    /// Convenience: the rounded value of `w`.
    pub fn round(&self, w: f64) -> Result<f64> {
        self.class_value(self.weight_class(w)?)
    }
}
