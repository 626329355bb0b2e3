//! Half-approximate maximum-weight forest under decrements and contractions:
//! every (super)vertex keeps its heaviest incident edge, and the union of
//! those edges with the frozen edges is the maintained forest.

use crate::classes::WeightClassifier;
use crate::element::{ElementId, WeightKey};
use crate::error::{invalid, precondition, Error, Result};
use crate::oracle::{IncrementalOracle, MaxWeightOracle, OracleChanges};

use super::pairing_heap::HeapRoot;
use super::{GraphicMatroid, PairingHeap, UnionFind};

#[derive(Debug, Clone)]
pub struct GraphicForestOracle {
    graph: GraphicMatroid,
    classifier: WeightClassifier,
    class: Vec<usize>,
    weight: Vec<f64>,
    version: Vec<u32>,
    frozen: Vec<bool>,
    uf: UnionFind,
    heaps: PairingHeap<WeightKey, u32>,
    heap_of: Vec<HeapRoot>,
    selected: Vec<Option<ElementId>>,
    selectors: Vec<u8>,
    in_forest: Vec<bool>,
    forest_weight: f64,
    forest_size: usize,
    /// Edges whose membership changed during the current operation, with their
    /// membership before it.
    touched: Vec<(ElementId, bool)>,
}

impl GraphicForestOracle {
    pub fn new(graph: &GraphicMatroid, classifier: WeightClassifier, classes: &[usize]) -> Result<Self> {
        let m = graph.n();
        if classes.len() != m {
            return Err(invalid(format!("{} classes for {m} edges", classes.len())));
        }
        let weight = classes.iter().map(|&j| classifier.class_value(j)).collect::<Result<Vec<f64>>>()?;
        let nv = graph.num_vertices();
        let mut o = GraphicForestOracle {
            graph: graph.clone(),
            classifier,
            class: classes.to_vec(),
            weight,
            version: vec![0; m],
            frozen: vec![false; m],
            uf: UnionFind::new(nv),
            heaps: PairingHeap::new(),
            heap_of: vec![None; nv],
            selected: vec![None; nv],
            selectors: vec![0; m],
            in_forest: vec![false; m],
            forest_weight: 0.0,
            forest_size: 0,
            touched: Vec::new(),
        };
        for i in 0..m {
            let e = ElementId::new(i);
            let (u, v) = o.graph.endpoints(e);
            if u != v {
                o.push_entry(u, e);
                o.push_entry(v, e);
            }
        }
        for v in 0..nv {
            o.reselect(v);
        }
        o.touched.clear();
        Ok(o)
    }

    fn push_entry(&mut self, rep: usize, e: ElementId) {
        let key = WeightKey::new(self.weight[e.index()], e);
        self.heaps.push(&mut self.heap_of[rep], key, self.version[e.index()]);
    }

    /// Heaviest valid edge leaving supervertex `rep`, discarding stale entries.
    fn heaviest(&mut self, rep: usize) -> Option<ElementId> {
        while let Some((key, ver)) = self.heaps.peek(self.heap_of[rep]) {
            let e = key.id;
            let (u, v) = self.graph.endpoints(e);
            let valid =
                ver == self.version[e.index()] && !self.frozen[e.index()] && self.uf.find(u) != self.uf.find(v);
            if valid {
                return Some(e);
            }
            self.heaps.pop(&mut self.heap_of[rep]);
        }
        None
    }

    fn reselect(&mut self, rep: usize) {
        let new = self.heaviest(rep);
        let old = self.selected[rep];
        if new == old {
            return;
        }
        self.selected[rep] = new;
        if let Some(o) = old {
            self.selectors[o.index()] -= 1;
            self.sync(o);
        }
        if let Some(n) = new {
            self.selectors[n.index()] += 1;
            self.sync(n);
        }
    }

    fn release(&mut self, rep: usize) {
        if let Some(o) = self.selected[rep].take() {
            self.selectors[o.index()] -= 1;
            self.sync(o);
        }
    }

    fn sync(&mut self, e: ElementId) {
        let i = e.index();
        let should = self.frozen[i] || self.selectors[i] > 0;
        if should != self.in_forest[i] {
            if !self.touched.iter().any(|&(x, _)| x == e) {
                self.touched.push((e, self.in_forest[i]));
            }
            self.in_forest[i] = should;
            if should {
                self.forest_weight += self.weight[i];
                self.forest_size += 1;
            } else {
                self.forest_weight -= self.weight[i];
                self.forest_size -= 1;
            }
        }
    }

    fn take_changes(&mut self) -> OracleChanges {
        let mut changes = OracleChanges::default();
        for (e, before) in self.touched.drain(..) {
            match (before, self.in_forest[e.index()]) {
                (false, true) => changes.added.push(e),
                (true, false) => changes.removed.push(e),
                _ => {}
            }
        }
        changes
    }

    fn check(&self, e: ElementId) -> Result<()> {
        if e.index() < self.graph.n() {
            Ok(())
        } else {
            Err(Error::UnknownElement(e.index()))
        }
    }

    pub fn weight(&self, e: ElementId) -> f64 {
        self.weight[e.index()]
    }

    pub fn is_frozen(&self, e: ElementId) -> bool {
        self.frozen[e.index()]
    }

    pub fn frozen_edges(&self) -> Vec<usize> {
        (0..self.graph.n()).filter(|&i| self.frozen[i]).collect()
    }

    pub fn forest_size(&self) -> usize {
        self.forest_size
    }

    pub fn heap_ops(&self) -> u64 {
        self.heaps.ops()
    }

    /// Supervertex of original vertex `v`.
    pub fn supervertex(&mut self, v: usize) -> usize {
        self.uf.find(v)
    }
}

impl MaxWeightOracle for GraphicForestOracle {
    fn decrement(&mut self, e: ElementId, class: usize) -> Result<OracleChanges> {
        self.check(e)?;
        let i = e.index();
        if self.frozen[i] {
            return Err(precondition(format!("{e} is frozen")));
        }
        if class <= self.class[i] {
            return Err(invalid(format!("class {class} does not lower {e} from class {}", self.class[i])));
        }
        let w = self.classifier.class_value(class)?;
        if self.in_forest[i] {
            self.forest_weight += w - self.weight[i];
        }
        self.class[i] = class;
        self.weight[i] = w;
        self.version[i] += 1;
        let (u, v) = self.graph.endpoints(e);
        let (ru, rv) = (self.uf.find(u), self.uf.find(v));
        if ru != rv {
            self.push_entry(ru, e);
            self.push_entry(rv, e);
            self.reselect(ru);
            self.reselect(rv);
        }
        Ok(self.take_changes())
    }

    fn freeze(&mut self, e: ElementId) -> Result<OracleChanges> {
        self.check(e)?;
        let i = e.index();
        if !self.in_forest[i] {
            return Err(precondition(format!("{e} is not in the forest")));
        }
        if self.frozen[i] {
            return Ok(OracleChanges::default());
        }
        self.frozen[i] = true;
        let (u, v) = self.graph.endpoints(e);
        let (ru, rv) = (self.uf.find(u), self.uf.find(v));
        self.release(ru);
        self.release(rv);
        let r = self.uf.union(ru, rv).expect("forest edge joins two supervertices");
        let merged = self.heaps.meld(self.heap_of[ru].take(), self.heap_of[rv].take());
        self.heap_of[r] = merged;
        self.reselect(r);
        self.sync(e);
        Ok(self.take_changes())
    }

    fn approx_base_weight(&self) -> f64 {
        self.forest_weight
    }

    fn current(&self) -> Vec<ElementId> {
        (0..self.graph.n()).filter(|&i| self.in_forest[i]).map(ElementId::new).collect()
    }

    fn contains(&self, e: ElementId) -> bool {
        self.in_forest.get(e.index()).copied().unwrap_or(false)
    }

    fn structural_ops(&self) -> u64 {
        self.heaps.ops()
    }
}

/// Growing forest with union-find cycle tests.
#[derive(Debug, Clone)]
pub struct GraphicIncremental {
    graph: GraphicMatroid,
    uf: UnionFind,
    members: Vec<ElementId>,
}

impl GraphicIncremental {
    pub fn new(graph: &GraphicMatroid, seed: &[ElementId]) -> Result<Self> {
        let mut inc = GraphicIncremental { graph: graph.clone(), uf: UnionFind::new(graph.num_vertices()), members: Vec::new() };
        for &e in seed {
            inc.insert(e)?;
        }
        Ok(inc)
    }
}

impl IncrementalOracle for GraphicIncremental {
    fn test(&mut self, e: ElementId) -> bool {
        if e.index() >= self.graph.n() {
            return false;
        }
        let (u, v) = self.graph.endpoints(e);
        !self.uf.same(u, v)
    }

    fn insert(&mut self, e: ElementId) -> Result<()> {
        if e.index() >= self.graph.n() {
            return Err(Error::UnknownElement(e.index()));
        }
        let (u, v) = self.graph.endpoints(e);
        if self.uf.union(u, v).is_none() {
            return Err(precondition(format!("{e} closes a cycle")));
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
