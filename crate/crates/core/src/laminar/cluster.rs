//! Cluster summaries of the laminar top tree and the join/split algebra.
//!
//! A cluster covers a vertical path of internal tree nodes (its top node is
//! the boundary towards the root) together with everything hanging off that
//! path. The summary stores:
//!
//! * `minc`: smallest residual on the path, and `argminc`, the deepest path
//!   node attaining it;
//! * `delta`: residual shift already counted in `minc` but not yet pushed to
//!   the children;
//! * `maxe1`: heaviest non-basis leaf reachable from the path ignoring the
//!   residuals of the path nodes themselves;
//! * `maxe0`: the same, restricted to leaves hanging strictly above the
//!   topmost path node with residual `minc`;
//! * `mine`: lightest basis leaf anywhere in the cluster.
//!
//! Both `maxe` fields are invariant under a uniform shift of the path
//! residuals, which is what makes lazy `delta` updates possible.

use crate::element::{max_key, min_key, WeightKey};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClusterSummary {
    pub minc: i64,
    pub delta: i64,
    pub argminc: usize,
    pub maxe0: Option<WeightKey>,
    pub maxe1: Option<WeightKey>,
    pub mine: Option<WeightKey>,
}

impl ClusterSummary {
    /// Summary of a single node with residual `residual`, its heaviest
    /// non-basis leaf and its lightest basis leaf.
    pub fn base(node: usize, residual: i64, best_out: Option<WeightKey>, lightest_in: Option<WeightKey>) -> Self {
        ClusterSummary { minc: residual, delta: 0, argminc: node, maxe0: None, maxe1: best_out, mine: lightest_in }
    }

    /// Heaviest leaf that can be added through the top of the cluster, taking
    /// every residual on the path into account.
    pub fn reachable_max(&self) -> Option<WeightKey> {
        if self.minc > 0 {
            self.maxe1
        } else {
            self.maxe0
        }
    }

    /// Shifts every residual on the path by `d`, lazily.
    pub fn shift(&mut self, d: i64) {
        self.minc += d;
        self.delta += d;
    }

    /// Takes the pending shift for the children and clears it.
    pub fn take_delta(&mut self) -> i64 {
        std::mem::take(&mut self.delta)
    }
}

/// Concatenates two path clusters: `upper`'s path sits directly above `lower`'s.
pub fn join_compress(lower: &ClusterSummary, upper: &ClusterSummary) -> ClusterSummary {
    let minc = lower.minc.min(upper.minc);
    let argminc = if lower.minc <= upper.minc { lower.argminc } else { upper.argminc };
    // the topmost minimum lies in `upper` whenever upper ties or wins
    let maxe0 = if upper.minc <= lower.minc { upper.maxe0 } else { max_key(upper.maxe1, lower.maxe0) };
    ClusterSummary {
        minc,
        delta: 0,
        argminc,
        maxe0,
        maxe1: max_key(lower.maxe1, upper.maxe1),
        mine: min_key(lower.mine, upper.mine),
    }
}

/// Hangs the path cluster `light` below the single-node cluster `vertex`.
/// The result's path is just the vertex.
pub fn join_rake(vertex: &ClusterSummary, light: &ClusterSummary) -> ClusterSummary {
    ClusterSummary {
        minc: vertex.minc,
        delta: 0,
        argminc: vertex.argminc,
        maxe0: None,
        maxe1: max_key(vertex.maxe1, light.reachable_max()),
        mine: min_key(vertex.mine, light.mine),
    }
}
