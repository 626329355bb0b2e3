//! Element identifiers and the (weight, id) ordering used for every tie-break.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Dense index of a ground-set element.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ElementId(pub u32);

impl ElementId {
    pub fn new(index: usize) -> Self {
        ElementId(u32::try_from(index).expect("element index exceeds u32"))
    }

    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl From<usize> for ElementId {
    fn from(index: usize) -> Self {
        ElementId::new(index)
    }
}

impl fmt::Display for ElementId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e{}", self.0)
    }
}

/// A weighted element, totally ordered by weight and then by id.
///
/// Every "heaviest"/"lightest" choice in the crate goes through this order, so
/// results are deterministic even with tied weights.
#[derive(Debug, Clone, Copy)]
pub struct WeightKey {
    pub weight: f64,
    pub id: ElementId,
}

impl WeightKey {
    pub fn new(weight: f64, id: ElementId) -> Self {
        WeightKey { weight, id }
    }
}

impl PartialEq for WeightKey {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for WeightKey {}

impl PartialOrd for WeightKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for WeightKey {
    fn cmp(&self, other: &Self) -> Ordering {
        self.weight
            .total_cmp(&other.weight)
            .then(self.id.cmp(&other.id))
    }
}

/// Minimum of two optional keys where `None` means "no element" (+infinity).
#[inline]
pub fn min_key(a: Option<WeightKey>, b: Option<WeightKey>) -> Option<WeightKey> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

/// Maximum of two optional keys where `None` means "no element" (-infinity).
#[inline]
pub fn max_key(a: Option<WeightKey>, b: Option<WeightKey>) -> Option<WeightKey> {
    a.max(b)
}

/// Sorts ids by descending (weight, id).
pub fn sort_by_weight_desc(ids: &mut [ElementId], weight: impl Fn(ElementId) -> f64) {
    ids.sort_by(|&a, &b| WeightKey::new(weight(b), b).cmp(&WeightKey::new(weight(a), a)));
}
