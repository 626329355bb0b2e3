//! Transversal matroids: a set of left vertices is independent when it can be
//! matched into the right side.

mod decremental;
mod incremental;
mod lstable;

pub use decremental::DecrementalMatching;
pub use incremental::TransversalIncremental;
pub use lstable::{LStableMatching, Level, TransversalOracle};

use serde::{Deserialize, Serialize};

use crate::element::ElementId;
use crate::error::{Error, Result};
use crate::reference::hopcroft_karp;

/// Bipartite graph whose left vertices are the ground set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransversalMatroid {
    num_right: usize,
    adjacency: Vec<Vec<u32>>,
}

impl TransversalMatroid {
    pub fn new(num_right: usize, adjacency: Vec<Vec<u32>>) -> Result<Self> {
        let t = TransversalMatroid { num_right, adjacency };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        for (l, nbrs) in self.adjacency.iter().enumerate() {
            if let Some(&r) = nbrs.iter().find(|&&r| r as usize >= self.num_right) {
                return Err(Error::Instance(format!("left vertex {l} lists unknown right vertex {r}")));
            }
            let mut sorted = nbrs.clone();
            sorted.sort_unstable();
            if sorted.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::Instance(format!("left vertex {l} lists a right vertex twice")));
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.adjacency.len()
    }

    pub fn num_right(&self) -> usize {
        self.num_right
    }

    pub fn num_edges(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum()
    }

    pub fn neighbors(&self, e: ElementId) -> &[u32] {
        &self.adjacency[e.index()]
    }

    pub fn adjacency(&self) -> &[Vec<u32>] {
        &self.adjacency
    }

    /// Right-side adjacency lists.
    pub fn right_adjacency(&self) -> Vec<Vec<u32>> {
        let mut radj = vec![Vec::new(); self.num_right];
        for (l, nbrs) in self.adjacency.iter().enumerate() {
            for &r in nbrs {
                radj[r as usize].push(l as u32);
            }
        }
        radj
    }

    /// Maximum matching restricted to `set`, as `(left, right)` pairs.
    pub fn matching_of(&self, set: &[ElementId]) -> Vec<(ElementId, usize)> {
        let adj: Vec<Vec<u32>> = set.iter().map(|&e| self.adjacency[e.index()].clone()).collect();
        hopcroft_karp(&adj, self.num_right)
            .into_iter()
            .enumerate()
            .filter_map(|(i, r)| r.map(|r| (set[i], r)))
            .collect()
    }

    pub fn is_independent(&self, set: &[ElementId]) -> bool {
        let mut seen = vec![false; self.n()];
        if set.iter().any(|&e| e.index() >= self.n() || std::mem::replace(&mut seen[e.index()], true)) {
            return false;
        }
        self.matching_of(set).len() == set.len()
    }

    pub fn rank(&self) -> usize {
        hopcroft_karp(&self.adjacency, self.num_right).iter().filter(|m| m.is_some()).count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matchable_sets() {
        // l0 -> {r0}, l1 -> {r0}, l2 -> {r0, r1}
        let t = TransversalMatroid::new(2, vec![vec![0], vec![0], vec![0, 1]]).unwrap();
        assert_eq!(t.rank(), 2);
        assert!(t.is_independent(&[ElementId(0), ElementId(2)]));
        assert!(!t.is_independent(&[ElementId(0), ElementId(1)]));
        assert!(TransversalMatroid::new(1, vec![vec![1]]).is_err());
        assert!(TransversalMatroid::new(2, vec![vec![1, 1]]).is_err());
    }
}
