//! Contracts shared by the dynamic matroid structures.

use serde::{Deserialize, Serialize};

use crate::element::ElementId;
use crate::error::Result;

/// Difference between two consecutive maintained independent sets.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleChanges {
    pub added: Vec<ElementId>,
    pub removed: Vec<ElementId>,
}

impl OracleChanges {
    pub fn is_empty(&self) -> bool {
        self.added.is_empty() && self.removed.is_empty()
    }

    pub fn len(&self) -> usize {
        self.added.len() + self.removed.len()
    }

    /// Folds another change set into this one, cancelling add/remove pairs.
    pub fn merge(&mut self, other: OracleChanges) {
        for e in other.removed {
            if let Some(p) = self.added.iter().position(|&x| x == e) {
                self.added.swap_remove(p);
            } else {
                self.removed.push(e);
            }
        }
        for e in other.added {
            if let Some(p) = self.removed.iter().position(|&x| x == e) {
                self.removed.swap_remove(p);
            } else {
                self.added.push(e);
            }
        }
    }

    /// Applies the changes to a sorted set representation.
    pub fn apply_to(&self, set: &mut Vec<ElementId>) {
        set.retain(|e| !self.removed.contains(e));
        set.extend_from_slice(&self.added);
        set.sort_unstable();
        set.dedup();
    }
}

/// A dynamic approximate maximum-weight independent set under decreasing
/// weights and permanent freezes.
///
/// Weights are handed over as weight classes of the classifier the oracle was
/// built with; the oracle values them through that classifier.
pub trait MaxWeightOracle {
    /// Lowers the weight class of `e` (a larger class index means a lower value).
    fn decrement(&mut self, e: ElementId, class: usize) -> Result<OracleChanges>;
    /// Pins `e`, which must be in the maintained set, into it forever.
    fn freeze(&mut self, e: ElementId) -> Result<OracleChanges>;
    /// Total rounded weight of the maintained set.
    fn approx_base_weight(&self) -> f64;
    /// Current maintained independent set, sorted.
    fn current(&self) -> Vec<ElementId>;
    fn contains(&self, e: ElementId) -> bool;
    /// Count of elementary structural operations, for instrumentation.
    fn structural_ops(&self) -> u64;
}

/// Exact incremental independence oracle: a growing independent set.
pub trait IncrementalOracle {
    /// Would adding `e` keep the set independent?
    fn test(&mut self, e: ElementId) -> bool;
    /// Adds `e`; fails if that creates a dependency.
    fn insert(&mut self, e: ElementId) -> Result<()>;
    fn members(&self) -> Vec<ElementId>;
}
