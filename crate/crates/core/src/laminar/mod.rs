//! Laminar matroids and the dynamic maximum-weight basis structures over them.
//!
//! A laminar family is a rooted tree of capacitated sets; every element is a
//! leaf hanging off the smallest set containing it. A set of elements is
//! independent when no tree node holds more elements than its capacity.

mod cluster;
mod oracle;
mod slow;
mod toptree;

pub use cluster::{join_compress, join_rake, ClusterSummary};
pub use oracle::{LaminarIncremental, LaminarOracle};
pub use slow::SlowLaminar;
pub use toptree::TopTreeLaminar;

use serde::{Deserialize, Serialize};

use crate::element::{ElementId, WeightKey};
use crate::error::{invalid, precondition, Error, Result};
use crate::oracle::OracleChanges;

/// Tree of capacitated sets plus the home node of every element.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LaminarFamily {
    parent: Vec<Option<usize>>,
    capacity: Vec<u32>,
    element_node: Vec<usize>,
}

impl LaminarFamily {
    pub fn new(parent: Vec<Option<usize>>, capacity: Vec<u32>, element_node: Vec<usize>) -> Result<Self> {
        let fam = LaminarFamily { parent, capacity, element_node };
        fam.validate()?;
        Ok(fam)
    }

    /// A single set of capacity `k` over `n` elements.
    pub fn uniform(n: usize, k: u32) -> Self {
        LaminarFamily { parent: vec![None], capacity: vec![k], element_node: vec![0; n] }
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.parent.len();
        if m == 0 {
            return Err(Error::Instance("laminar family needs at least one node".into()));
        }
        if self.capacity.len() != m {
            return Err(Error::Instance(format!("{} capacities for {m} nodes", self.capacity.len())));
        }
        let roots = self.parent.iter().filter(|p| p.is_none()).count();
        if roots != 1 {
            return Err(Error::Instance(format!("laminar family needs exactly one root, found {roots}")));
        }
        for (v, p) in self.parent.iter().enumerate() {
            if let Some(p) = *p {
                if p >= m {
                    return Err(Error::Instance(format!("node {v} has unknown parent {p}")));
                }
            }
        }
        // every node must reach the root
        let mut state = vec![0u8; m];
        for start in 0..m {
            let mut path = Vec::new();
            let mut v = start;
            loop {
                match state[v] {
                    2 => break,
                    1 => return Err(Error::Instance(format!("parent array has a cycle through node {v}"))),
                    _ => {}
                }
                state[v] = 1;
                path.push(v);
                match self.parent[v] {
                    Some(p) => v = p,
                    None => break,
                }
            }
            for u in path {
                state[u] = 2;
            }
        }
        if let Some((e, &v)) = self.element_node.iter().enumerate().find(|(_, &v)| v >= m) {
            return Err(Error::Instance(format!("element {e} placed under unknown node {v}")));
        }
        Ok(())
    }

    pub fn num_nodes(&self) -> usize {
        self.parent.len()
    }

    pub fn n(&self) -> usize {
        self.element_node.len()
    }

    pub fn root(&self) -> usize {
        self.parent.iter().position(Option::is_none).expect("validated family has a root")
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        self.parent[v]
    }

    pub fn parents(&self) -> &[Option<usize>] {
        &self.parent
    }

    pub fn capacity(&self, v: usize) -> u32 {
        self.capacity[v]
    }

    pub fn capacities(&self) -> &[u32] {
        &self.capacity
    }

    pub fn element_node(&self, e: ElementId) -> usize {
        self.element_node[e.index()]
    }

    pub fn element_nodes(&self) -> &[usize] {
        &self.element_node
    }

    /// Child lists of the internal nodes.
    pub fn children(&self) -> Vec<Vec<usize>> {
        let mut ch = vec![Vec::new(); self.num_nodes()];
        for (v, p) in self.parent.iter().enumerate() {
            if let Some(p) = *p {
                ch[p].push(v);
            }
        }
        ch
    }

    /// Nodes from `v` up to the root, inclusive.
    pub fn ancestors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        std::iter::successors(Some(v), move |&u| self.parent[u])
    }

    pub fn is_independent(&self, set: &[ElementId]) -> bool {
        let mut load = vec![0u32; self.num_nodes()];
        let mut seen = vec![false; self.n()];
        for &e in set {
            if e.index() >= self.n() || std::mem::replace(&mut seen[e.index()], true) {
                return false;
            }
            for v in self.ancestors(self.element_node[e.index()]) {
                load[v] += 1;
                if load[v] > self.capacity[v] {
                    return false;
                }
            }
        }
        true
    }

    pub fn rank(&self) -> usize {
        // children are processed before parents by walking nodes deepest first
        let mut depth = vec![0usize; self.num_nodes()];
        for v in 0..self.num_nodes() {
            depth[v] = self.ancestors(v).count();
        }
        let mut order: Vec<usize> = (0..self.num_nodes()).collect();
        order.sort_by_key(|&v| std::cmp::Reverse(depth[v]));
        let mut avail = vec![0usize; self.num_nodes()];
        for &v in &self.element_node {
            avail[v] += 1;
        }
        let mut rank = vec![0usize; self.num_nodes()];
        for v in order {
            rank[v] = avail[v].min(self.capacity[v] as usize);
            if let Some(p) = self.parent[v] {
                avail[p] += rank[v];
            }
        }
        rank[self.root()]
    }
}

/// Common interface of the slow and top-tree maximum-weight basis structures.
///
/// The structure holds a set of leaves (elements) under the fixed internal
/// nodes and a basis `B` among them; the residual of a node is its capacity
/// minus the basis leaves below it, including leaves detached with
/// `release = false`.
pub trait LaminarStructure {
    fn num_internal(&self) -> usize;
    fn root(&self) -> usize;
    fn is_attached(&self, e: ElementId) -> bool;
    fn in_basis(&self, e: ElementId) -> bool;
    fn leaf_weight(&self, e: ElementId) -> Option<f64>;
    fn leaf_node(&self, e: ElementId) -> Option<usize>;
    fn leaf_count(&self) -> usize;

    /// Hangs a new leaf under internal node `node`, optionally straight into
    /// the basis (the caller guarantees feasibility).
    fn attach(&mut self, e: ElementId, node: usize, weight: f64, into_basis: bool) -> Result<()>;
    /// Removes a leaf. A basis leaf gives its capacity back only if `release`.
    fn detach(&mut self, e: ElementId, release: bool) -> Result<()>;
    fn add_unchecked(&mut self, e: ElementId) -> Result<()>;
    fn remove(&mut self, e: ElementId) -> Result<()>;

    /// Deepest node on the path from `node` to the root with zero residual.
    fn lowest_tight_constraint(&mut self, node: usize) -> Result<Option<usize>>;
    /// Lightest basis leaf in the subtree of `node`.
    fn query_min(&mut self, node: usize) -> Result<Option<ElementId>>;
    /// Heaviest non-basis leaf in the subtree of `node` that can be added
    /// without violating any constraint at or below `node`.
    fn query_max(&mut self, node: usize) -> Result<Option<ElementId>>;
    fn residual(&mut self, node: usize) -> Result<i64>;

    fn basis(&self) -> Vec<ElementId>;
    fn base_weight(&self) -> f64;

    fn key(&self, e: ElementId) -> Result<WeightKey> {
        self.leaf_weight(e).map(|w| WeightKey::new(w, e)).ok_or(Error::UnknownElement(e.index()))
    }

    /// Adds a non-basis leaf to the basis.
    fn add(&mut self, e: ElementId) -> Result<()> {
        if !self.is_attached(e) {
            return Err(Error::UnknownElement(e.index()));
        }
        if self.in_basis(e) {
            return Err(precondition(format!("{e} is already in the basis")));
        }
        let node = self.leaf_node(e).expect("attached leaf has a node");
        if let Some(v) = self.lowest_tight_constraint(node)? {
            return Err(precondition(format!("adding {e} would overfill node {v}")));
        }
        self.add_unchecked(e)
    }

    /// Inserts a new leaf and restores a maximum-weight basis with at most one swap.
    fn insert(&mut self, e: ElementId, node: usize, weight: f64) -> Result<OracleChanges> {
        if !(weight >= 0.0 && weight.is_finite()) {
            return Err(invalid(format!("leaf weight must be finite and non-negative, got {weight}")));
        }
        if self.is_attached(e) {
            return Err(precondition(format!("{e} is already in the tree")));
        }
        if node >= self.num_internal() {
            return Err(invalid(format!("node {node} is not an internal node")));
        }
        let key = WeightKey::new(weight, e);
        let mut changes = OracleChanges::default();
        match self.lowest_tight_constraint(node)? {
            None => {
                self.attach(e, node, weight, true)?;
                changes.added.push(e);
            }
            Some(tight) => match self.query_min(tight)? {
                Some(m) if self.key(m)? < key => {
                    self.remove(m)?;
                    self.attach(e, node, weight, true)?;
                    changes.added.push(e);
                    changes.removed.push(m);
                }
                _ => self.attach(e, node, weight, false)?,
            },
        }
        Ok(changes)
    }

    /// Deletes a leaf; if it was in the basis, the best addable leaf replaces it.
    fn delete(&mut self, e: ElementId) -> Result<OracleChanges> {
        if !self.is_attached(e) {
            return Err(Error::UnknownElement(e.index()));
        }
        let mut changes = OracleChanges::default();
        if self.in_basis(e) {
            self.detach(e, true)?;
            changes.removed.push(e);
            let root = self.root();
            if let Some(z) = self.query_max(root)? {
                self.add_unchecked(z)?;
                changes.added.push(z);
            }
        } else {
            self.detach(e, false)?;
        }
        Ok(changes)
    }
}
