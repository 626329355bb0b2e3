//! Explicit-tree maximum-weight basis structure: every update recomputes the
//! aggregates along the leaf-to-root path. Simple, and used as the reference
//! for the top-tree structure.

use crate::element::{max_key, min_key, ElementId, WeightKey};
use crate::error::{invalid, precondition, Error, Result};

use super::{LaminarFamily, LaminarStructure};

#[derive(Debug, Clone, Copy)]
struct Leaf {
    node: usize,
    weight: f64,
    in_basis: bool,
}

#[derive(Debug, Clone)]
pub struct SlowLaminar {
    parent: Vec<Option<usize>>,
    child_nodes: Vec<Vec<usize>>,
    residual: Vec<i64>,
    leaves_at: Vec<Vec<ElementId>>,
    leaf: Vec<Option<Leaf>>,
    /// Best addable leaf in the subtree, honoring every residual in the subtree.
    best_addable: Vec<Option<WeightKey>>,
    /// Lightest basis leaf in the subtree.
    lightest_in: Vec<Option<WeightKey>>,
    attached: usize,
    weight_sum: f64,
}

impl SlowLaminar {
    pub fn new(family: &LaminarFamily) -> Self {
        let m = family.num_nodes();
        SlowLaminar {
            parent: family.parents().to_vec(),
            child_nodes: family.children(),
            residual: family.capacities().iter().map(|&c| i64::from(c)).collect(),
            leaves_at: vec![Vec::new(); m],
            leaf: Vec::new(),
            best_addable: vec![None; m],
            lightest_in: vec![None; m],
            attached: 0,
            weight_sum: 0.0,
        }
    }

    fn leaf(&self, e: ElementId) -> Result<Leaf> {
        self.leaf.get(e.index()).copied().flatten().ok_or(Error::UnknownElement(e.index()))
    }

    fn recompute(&mut self, v: usize) {
        let mut best = None;
        let mut lightest = None;
        for &c in &self.child_nodes[v] {
            best = max_key(best, self.best_addable[c]);
            lightest = min_key(lightest, self.lightest_in[c]);
        }
        for &e in &self.leaves_at[v] {
            let l = self.leaf[e.index()].expect("listed leaf exists");
            let key = Some(WeightKey::new(l.weight, e));
            if l.in_basis {
                lightest = min_key(lightest, key);
            } else {
                best = max_key(best, key);
            }
        }
        self.best_addable[v] = if self.residual[v] > 0 { best } else { None };
        self.lightest_in[v] = lightest;
    }

    fn refresh_path(&mut self, v: usize, delta: i64) {
        let mut cur = Some(v);
        while let Some(u) = cur {
            self.residual[u] += delta;
            self.recompute(u);
            cur = self.parent[u];
        }
    }

    fn check_node(&self, node: usize) -> Result<()> {
        if node < self.parent.len() {
            Ok(())
        } else {
            Err(invalid(format!("unknown node {node}")))
        }
    }
}

impl LaminarStructure for SlowLaminar {
    fn num_internal(&self) -> usize {
        self.parent.len()
    }

    fn root(&self) -> usize {
        self.parent.iter().position(Option::is_none).expect("tree has a root")
    }

    fn is_attached(&self, e: ElementId) -> bool {
        self.leaf(e).is_ok()
    }

    fn in_basis(&self, e: ElementId) -> bool {
        self.leaf(e).map(|l| l.in_basis).unwrap_or(false)
    }

    fn leaf_weight(&self, e: ElementId) -> Option<f64> {
        self.leaf(e).ok().map(|l| l.weight)
    }

    fn leaf_node(&self, e: ElementId) -> Option<usize> {
        self.leaf(e).ok().map(|l| l.node)
    }

    fn leaf_count(&self) -> usize {
        self.attached
    }

    fn attach(&mut self, e: ElementId, node: usize, weight: f64, into_basis: bool) -> Result<()> {
        self.check_node(node)?;
        if self.is_attached(e) {
            return Err(precondition(format!("{e} is already attached")));
        }
        if self.leaf.len() <= e.index() {
            self.leaf.resize(e.index() + 1, None);
        }
        self.leaf[e.index()] = Some(Leaf { node, weight, in_basis: into_basis });
        self.leaves_at[node].push(e);
        self.attached += 1;
        if into_basis {
            self.weight_sum += weight;
        }
        self.refresh_path(node, if into_basis { -1 } else { 0 });
        Ok(())
    }

    fn detach(&mut self, e: ElementId, release: bool) -> Result<()> {
        let l = self.leaf(e)?;
        self.leaf[e.index()] = None;
        self.leaves_at[l.node].retain(|&x| x != e);
        self.attached -= 1;
        if l.in_basis {
            self.weight_sum -= l.weight;
        }
        self.refresh_path(l.node, if l.in_basis && release { 1 } else { 0 });
        Ok(())
    }

    fn add_unchecked(&mut self, e: ElementId) -> Result<()> {
        let l = self.leaf(e)?;
        if l.in_basis {
            return Err(precondition(format!("{e} is already in the basis")));
        }
        self.leaf[e.index()] = Some(Leaf { in_basis: true, ..l });
        self.weight_sum += l.weight;
        self.refresh_path(l.node, -1);
        Ok(())
    }

    fn remove(&mut self, e: ElementId) -> Result<()> {
        let l = self.leaf(e)?;
        if !l.in_basis {
            return Err(precondition(format!("{e} is not in the basis")));
        }
        self.leaf[e.index()] = Some(Leaf { in_basis: false, ..l });
        self.weight_sum -= l.weight;
        self.refresh_path(l.node, 1);
        Ok(())
    }

    fn lowest_tight_constraint(&mut self, node: usize) -> Result<Option<usize>> {
        self.check_node(node)?;
        let mut cur = Some(node);
        while let Some(u) = cur {
            if self.residual[u] == 0 {
                return Ok(Some(u));
            }
            cur = self.parent[u];
        }
        Ok(None)
    }

    fn query_min(&mut self, node: usize) -> Result<Option<ElementId>> {
        self.check_node(node)?;
        Ok(self.lightest_in[node].map(|k| k.id))
    }

    fn query_max(&mut self, node: usize) -> Result<Option<ElementId>> {
        self.check_node(node)?;
        Ok(self.best_addable[node].map(|k| k.id))
    }

    fn residual(&mut self, node: usize) -> Result<i64> {
        self.check_node(node)?;
        Ok(self.residual[node])
    }

    fn basis(&self) -> Vec<ElementId> {
        self.leaf
            .iter()
            .enumerate()
            .filter(|(_, l)| l.is_some_and(|l| l.in_basis))
            .map(|(i, _)| ElementId::new(i))
            .collect()
    }

    fn base_weight(&self) -> f64 {
        self.weight_sum
    }
}
