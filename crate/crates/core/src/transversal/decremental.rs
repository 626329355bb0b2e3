//! Approximate maximum-cardinality matching under deletions of left
//! vertices, rebuilt on every batch insertion.
//!
//! The matching never has an augmenting path with at most `2 + 2/eps`
//! edges, so it is within a `1 - eps` factor of a maximum matching. Matched
//! left vertices stay matched until they are deleted, and a rebuild keeps
//! every previously matched left vertex matched.

use crate::element::ElementId;
use crate::error::{invalid, precondition, Error, Result};

use super::TransversalMatroid;

#[derive(Debug, Clone)]
pub struct DecrementalMatching {
    right_adj: Vec<Vec<u32>>,
    present: Vec<bool>,
    fixed: Vec<bool>,
    mate_l: Vec<Option<u32>>,
    mate_r: Vec<Option<u32>>,
    rank: Vec<u32>,
    max_path: usize,
    stamp: Vec<u32>,
    epoch: u32,
    parent: Vec<u32>,
    batch_inserts: u64,
    deletes: u64,
    augmentations: u64,
}

impl DecrementalMatching {
    /// Starts with the independent `seed` matched; seed vertices can never be
    /// deleted.
    pub fn new(matroid: &TransversalMatroid, seed: &[ElementId], epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(invalid(format!("epsilon must lie in (0, 1), got {epsilon}")));
        }
        if !matroid.is_independent(seed) {
            return Err(precondition("seed set is not independent"));
        }
        let n = matroid.n();
        let mut d = DecrementalMatching {
            right_adj: matroid.right_adjacency(),
            present: vec![false; n],
            fixed: vec![false; n],
            mate_l: vec![None; n],
            mate_r: vec![None; matroid.num_right()],
            rank: vec![0; n],
            max_path: (2.0 + 2.0 / epsilon).floor() as usize,
            stamp: vec![0; n],
            epoch: 0,
            parent: vec![0; n],
            batch_inserts: 0,
            deletes: 0,
            augmentations: 0,
        };
        for (l, r) in matroid.matching_of(seed) {
            d.present[l.index()] = true;
            d.fixed[l.index()] = true;
            d.mate_l[l.index()] = Some(r as u32);
            d.mate_r[r] = Some(l.0);
        }
        Ok(d)
    }

    /// Longest augmenting path (in edges) the matching is guaranteed free of.
    pub fn max_path_len(&self) -> usize {
        self.max_path
    }

    pub fn is_present(&self, e: ElementId) -> bool {
        self.present.get(e.index()).copied().unwrap_or(false)
    }

    /// Whether `e` is currently matched.
    pub fn test(&self, e: ElementId) -> bool {
        self.mate_l.get(e.index()).map_or(false, |m| m.is_some())
    }

    /// Matched non-seed left vertices.
    pub fn basis(&self) -> Vec<ElementId> {
        (0..self.mate_l.len())
            .filter(|&l| self.mate_l[l].is_some() && !self.fixed[l])
            .map(ElementId::new)
            .collect()
    }

    pub fn matching_size(&self) -> usize {
        self.mate_l.iter().filter(|m| m.is_some()).count()
    }

    /// Present left vertices, including the seed.
    pub fn present_set(&self) -> Vec<ElementId> {
        (0..self.present.len()).filter(|&l| self.present[l]).map(ElementId::new).collect()
    }

    pub fn batch_inserts(&self) -> u64 {
        self.batch_inserts
    }

    pub fn deletes(&self) -> u64 {
        self.deletes
    }

    pub fn augmentations(&self) -> u64 {
        self.augmentations
    }

    /// Rebuilds the matching on the currently matched vertices plus
    /// `elements`; returns the newly matched elements.
    pub fn batch_insert(&mut self, elements: &[ElementId]) -> Result<Vec<ElementId>> {
        if let Some(e) = elements.iter().find(|e| e.index() >= self.present.len()) {
            return Err(Error::UnknownElement(e.index()));
        }
        self.batch_inserts += 1;
        let prior: Vec<(usize, usize)> = (0..self.mate_l.len())
            .filter_map(|l| self.mate_l[l].map(|r| (l, r as usize)))
            .collect();
        for l in 0..self.present.len() {
            self.present[l] = self.mate_l[l].is_some();
        }
        for e in elements {
            self.present[e.index()] = true;
        }
        self.mate_l.iter_mut().for_each(|m| *m = None);
        self.mate_r.iter_mut().for_each(|m| *m = None);
        self.rank.iter_mut().for_each(|k| *k = 0);

        for &(l, r) in &prior {
            self.mate_l[l] = Some(r as u32);
            self.mate_r[r] = Some(l as u32);
            self.rank[l] += 1;
        }
        for r in 0..self.mate_r.len() {
            if self.mate_r[r].is_some() {
                continue;
            }
            let lowest = self.right_adj[r]
                .iter()
                .map(|&l| l as usize)
                .filter(|&l| self.present[l])
                .min_by_key(|&l| (self.rank[l], l));
            match lowest {
                Some(l) if self.mate_l[l].is_none() => {
                    self.mate_l[l] = Some(r as u32);
                    self.mate_r[r] = Some(l as u32);
                    self.rank[l] += 1;
                }
                Some(_) => {
                    self.augment_from(r);
                }
                None => {}
            }
        }
        self.repair();
        let was: Vec<bool> = {
            let mut v = vec![false; self.present.len()];
            for &(l, _) in &prior {
                v[l] = true;
            }
            v
        };
        Ok((0..self.mate_l.len())
            .filter(|&l| self.mate_l[l].is_some() && !was[l])
            .map(ElementId::new)
            .collect())
    }

    /// Removes `e`. Its former partner looks for a short augmenting path;
    /// returns the newly matched elements.
    pub fn delete(&mut self, e: ElementId) -> Result<Vec<ElementId>> {
        let l = e.index();
        if !self.is_present(e) {
            return Err(precondition(format!("{e} is not present")));
        }
        if self.fixed[l] {
            return Err(precondition(format!("{e} belongs to the seed set")));
        }
        self.deletes += 1;
        self.present[l] = false;
        let Some(r) = self.mate_l[l].take() else {
            return Ok(Vec::new());
        };
        self.mate_r[r as usize] = None;
        let before: Vec<bool> = self.mate_l.iter().map(Option::is_some).collect();
        self.augment_from(r as usize);
        self.repair();
        Ok((0..self.mate_l.len())
            .filter(|&x| self.mate_l[x].is_some() && !before[x])
            .map(ElementId::new)
            .collect())
    }

    /// Augments until no free right vertex has a short augmenting path.
    fn repair(&mut self) {
        loop {
            let mut progress = false;
            for r in 0..self.mate_r.len() {
                if self.mate_r[r].is_none() && self.augment_from(r) {
                    progress = true;
                }
            }
            if !progress {
                break;
            }
        }
    }

    fn next_epoch(&mut self) -> u32 {
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.stamp.iter_mut().for_each(|s| *s = 0);
            self.epoch = 1;
        }
        self.epoch
    }

    /// Breadth-first search for a short augmenting path from the free right
    /// vertex `start`, preferring low-rank left vertices.
    fn find_path(&mut self, start: usize) -> Option<usize> {
        let epoch = self.next_epoch();
        let mut frontier = vec![start];
        let mut length = 1;
        while length <= self.max_path && !frontier.is_empty() {
            let mut next = Vec::new();
            let mut best: Option<usize> = None;
            for &r in &frontier {
                let mut nbrs: Vec<usize> = self.right_adj[r]
                    .iter()
                    .map(|&l| l as usize)
                    .filter(|&l| self.present[l] && self.stamp[l] != epoch && self.mate_r[r] != Some(l as u32))
                    .collect();
                nbrs.sort_unstable_by_key(|&l| (self.rank[l], l));
                for l in nbrs {
                    self.stamp[l] = epoch;
                    self.parent[l] = r as u32;
                    match self.mate_l[l] {
                        None => {
                            if best.map_or(true, |b| (self.rank[l], l) < (self.rank[b], b)) {
                                best = Some(l);
                            }
                        }
                        Some(mate) => next.push(mate as usize),
                    }
                }
            }
            if best.is_some() {
                return best;
            }
            frontier = next;
            length += 2;
        }
        None
    }

    fn augment_from(&mut self, start: usize) -> bool {
        let Some(mut l) = self.find_path(start) else {
            return false;
        };
        self.augmentations += 1;
        loop {
            let r = self.parent[l] as usize;
            let previous = self.mate_r[r];
            self.mate_l[l] = Some(r as u32);
            self.mate_r[r] = Some(l as u32);
            self.rank[l] += 1;
            if r == start {
                break;
            }
            l = previous.expect("interior right vertex is matched") as usize;
        }
        true
    }

    /// True when no free right vertex has an augmenting path within the
    /// length bound.
    pub fn has_no_short_path(&mut self) -> bool {
        (0..self.mate_r.len()).all(|r| self.mate_r[r].is_some() || self.find_path(r).is_none())
    }
}
