//! Exact incremental independence oracle for transversal matroids.

use crate::element::ElementId;
use crate::error::{precondition, Error, Result};
use crate::oracle::IncrementalOracle;

use super::TransversalMatroid;

/// Grows a matched set; adding a left vertex is allowed when an augmenting
/// path starts at it.
#[derive(Debug, Clone)]
pub struct TransversalIncremental {
    adjacency: Vec<Vec<u32>>,
    mate_l: Vec<Option<u32>>,
    mate_r: Vec<Option<u32>>,
    members: Vec<ElementId>,
    /// Augmenting path found by the last successful test, as right vertices.
    cached: Option<(usize, Vec<(usize, usize)>)>,
}

impl TransversalIncremental {
    pub fn new(matroid: &TransversalMatroid, seed: &[ElementId]) -> Result<Self> {
        let mut inc = TransversalIncremental {
            adjacency: matroid.adjacency().to_vec(),
            mate_l: vec![None; matroid.n()],
            mate_r: vec![None; matroid.num_right()],
            members: Vec::new(),
            cached: None,
        };
        for &e in seed {
            inc.insert(e)?;
        }
        Ok(inc)
    }

    /// Left-to-right pairs along an augmenting path from `l`, if any.
    fn augmenting_path(&self, l: usize) -> Option<Vec<(usize, usize)>> {
        let mut via = vec![usize::MAX; self.mate_r.len()];
        let mut seen_l = vec![false; self.mate_l.len()];
        let mut queue = std::collections::VecDeque::from([l]);
        seen_l[l] = true;
        while let Some(x) = queue.pop_front() {
            for &r in &self.adjacency[x] {
                let r = r as usize;
                if via[r] != usize::MAX {
                    continue;
                }
                via[r] = x;
                match self.mate_r[r] {
                    None => {
                        let mut pairs = Vec::new();
                        let mut r = r;
                        loop {
                            let x = via[r];
                            pairs.push((x, r));
                            if x == l {
                                return Some(pairs);
                            }
                            r = self.mate_l[x].expect("interior left vertex is matched") as usize;
                        }
                    }
                    Some(y) if !seen_l[y as usize] => {
                        seen_l[y as usize] = true;
                        queue.push_back(y as usize);
                    }
                    Some(_) => {}
                }
            }
        }
        None
    }
}

impl IncrementalOracle for TransversalIncremental {
    fn test(&mut self, e: ElementId) -> bool {
        let l = e.index();
        if l >= self.mate_l.len() || self.mate_l[l].is_some() {
            return false;
        }
        match self.augmenting_path(l) {
            Some(path) => {
                self.cached = Some((l, path));
                true
            }
            None => false,
        }
    }

    fn insert(&mut self, e: ElementId) -> Result<()> {
        let l = e.index();
        if l >= self.mate_l.len() {
            return Err(Error::UnknownElement(l));
        }
        if self.mate_l[l].is_some() {
            return Err(precondition(format!("{e} is already in the set")));
        }
        let path = match self.cached.take() {
            Some((cached, path)) if cached == l => path,
            _ => self.augmenting_path(l).ok_or_else(|| precondition(format!("adding {e} creates a dependency")))?,
        };
        for (x, r) in path {
            self.mate_l[x] = Some(r as u32);
            self.mate_r[r] = Some(x as u32);
        }
        self.members.push(e);
        Ok(())
    }

    fn members(&self) -> Vec<ElementId> {
        let mut m = self.members.clone();
        m.sort_unstable();
        m
    }
}
