//! Maximum-weight basis structure backed by a balanced top tree over the
//! internal nodes of the laminar tree.
//!
//! Internal nodes never change, so the cluster hierarchy is built once:
//! nodes with more than two children get a balanced spine of unbounded
//! dummy nodes, the binarized tree is split into heavy paths, every path
//! becomes a size-balanced compress tree, and each light child path is raked
//! onto its parent node. The hierarchy has depth `O(log n)` in the worst
//! case. Leaves live in per-node ordered sets; the residual updates caused
//! by adding or removing a basis leaf touch one root-to-node chain of
//! clusters: splits on the way down, joins on the way up.

use std::collections::BTreeSet;

use crate::element::{ElementId, WeightKey};
use crate::error::{invalid, precondition, Error, Result};

use super::cluster::{join_compress, join_rake, ClusterSummary};
use super::{LaminarFamily, LaminarStructure};

/// Residual of the dummy nodes introduced by binarization.
const UNBOUNDED: i64 = i64::MAX / 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Shape {
    Base(usize),
    Rake { vertex: usize, light: usize },
    Compress { lower: usize, upper: usize },
}

#[derive(Debug, Clone)]
struct Cluster {
    shape: Shape,
    parent: Option<usize>,
    summary: ClusterSummary,
}

#[derive(Debug, Clone, Copy)]
struct Leaf {
    node: usize,
    weight: f64,
    in_basis: bool,
}

#[derive(Debug, Clone)]
pub struct TopTreeLaminar {
    num_real: usize,
    root_node: usize,
    capacity: Vec<i64>,
    clusters: Vec<Cluster>,
    top: usize,
    base_of: Vec<usize>,
    vertex_of: Vec<usize>,
    out_leaves: Vec<BTreeSet<WeightKey>>,
    in_leaves: Vec<BTreeSet<WeightKey>>,
    /// Basis leaves detached without releasing their capacity, per node.
    retired: Vec<u32>,
    leaf: Vec<Option<Leaf>>,
    attached: usize,
    weight_sum: f64,
    joins: u64,
    splits: u64,
    chain: Vec<usize>,
    pieces: Vec<usize>,
}

struct Skeleton {
    parent: Vec<Option<usize>>,
    children: Vec<Vec<usize>>,
    capacity: Vec<i64>,
}

impl Skeleton {
    fn binarized(family: &LaminarFamily) -> Self {
        let m = family.num_nodes();
        let mut sk = Skeleton {
            parent: vec![None; m],
            children: vec![Vec::new(); m],
            capacity: family.capacities().iter().map(|&c| i64::from(c)).collect(),
        };
        for (v, kids) in family.children().into_iter().enumerate() {
            sk.hang(v, &kids);
        }
        sk
    }

    fn link(&mut self, parent: usize, child: usize) {
        self.parent[child] = Some(parent);
        self.children[parent].push(child);
    }

    fn hang(&mut self, v: usize, kids: &[usize]) {
        if kids.len() <= 2 {
            for &k in kids {
                self.link(v, k);
            }
            return;
        }
        let (left, right) = kids.split_at(kids.len() / 2);
        for half in [left, right] {
            if let [only] = half {
                self.link(v, *only);
            } else {
                let d = self.parent.len();
                self.parent.push(None);
                self.children.push(Vec::new());
                self.capacity.push(UNBOUNDED);
                self.link(v, d);
                self.hang(d, half);
            }
        }
    }
}

impl TopTreeLaminar {
    pub fn new(family: &LaminarFamily) -> Self {
        let sk = Skeleton::binarized(family);
        let total = sk.parent.len();
        let root = family.root();

        // subtree sizes, children before parents
        let mut order = vec![root];
        let mut i = 0;
        while i < order.len() {
            order.extend_from_slice(&sk.children[order[i]]);
            i += 1;
        }
        let mut size = vec![1usize; total];
        for &v in order.iter().rev() {
            if let Some(p) = sk.parent[v] {
                size[p] += size[v];
            }
        }

        let mut tt = TopTreeLaminar {
            num_real: family.num_nodes(),
            root_node: root,
            capacity: sk.capacity.clone(),
            clusters: Vec::new(),
            top: 0,
            base_of: vec![usize::MAX; total],
            vertex_of: vec![usize::MAX; total],
            out_leaves: vec![BTreeSet::new(); total],
            in_leaves: vec![BTreeSet::new(); total],
            retired: vec![0; total],
            leaf: Vec::new(),
            attached: 0,
            weight_sum: 0.0,
            joins: 0,
            splits: 0,
            chain: Vec::new(),
            pieces: Vec::new(),
        };
        tt.top = tt.build_path(root, &sk, &size);
        tt.joins = 0;
        tt
    }

    fn new_cluster(&mut self, shape: Shape) -> usize {
        let id = self.clusters.len();
        let placeholder = ClusterSummary::base(0, 0, None, None);
        self.clusters.push(Cluster { shape, parent: None, summary: placeholder });
        match shape {
            Shape::Base(x) => {
                self.clusters[id].summary = ClusterSummary::base(x, self.capacity[x], None, None);
            }
            Shape::Rake { vertex: a, light: b } | Shape::Compress { lower: a, upper: b } => {
                self.clusters[a].parent = Some(id);
                self.clusters[b].parent = Some(id);
                self.refresh(id);
            }
        }
        id
    }

    fn build_path(&mut self, head: usize, sk: &Skeleton, size: &[usize]) -> usize {
        let mut items = Vec::new();
        let mut v = Some(head);
        while let Some(x) = v {
            let heavy = sk.children[x].iter().copied().max_by_key(|&c| (size[c], std::cmp::Reverse(c)));
            let light = sk.children[x].iter().copied().find(|&c| Some(c) != heavy);
            let base = self.new_cluster(Shape::Base(x));
            self.base_of[x] = base;
            let vc = match light {
                Some(l) => {
                    let lc = self.build_path(l, sk, size);
                    self.new_cluster(Shape::Rake { vertex: base, light: lc })
                }
                None => base,
            };
            self.vertex_of[x] = vc;
            items.push((vc, 1 + light.map_or(0, |l| size[l])));
            v = heavy;
        }
        self.build_balanced(&items)
    }

    /// Compress tree over a top-down list of vertex clusters, split at the
    /// weighted median so heavy items end up shallow.
    fn build_balanced(&mut self, items: &[(usize, usize)]) -> usize {
        if let [(only, _)] = items {
            return *only;
        }
        let total: usize = items.iter().map(|&(_, w)| w).sum();
        let mut prefix = 0;
        let mut split = 1;
        let mut best = usize::MAX;
        for (k, &(_, w)) in items.iter().enumerate().take(items.len() - 1) {
            prefix += w;
            let imbalance = (2 * prefix).abs_diff(total);
            if imbalance < best {
                best = imbalance;
                split = k + 1;
            }
        }
        let upper = self.build_balanced(&items[..split]);
        let lower = self.build_balanced(&items[split..]);
        self.new_cluster(Shape::Compress { lower, upper })
    }

    fn summary(&self, c: usize) -> ClusterSummary {
        self.clusters[c].summary
    }

    fn summarize(&self, c: usize) -> ClusterSummary {
        match self.clusters[c].shape {
            Shape::Base(x) => ClusterSummary::base(
                x,
                self.clusters[c].summary.minc,
                self.out_leaves[x].last().copied(),
                self.in_leaves[x].first().copied(),
            ),
            Shape::Rake { vertex, light } => join_rake(&self.summary(vertex), &self.summary(light)),
            Shape::Compress { lower, upper } => join_compress(&self.summary(lower), &self.summary(upper)),
        }
    }

    /// Join: recompute a cluster from its children.
    fn refresh(&mut self, c: usize) {
        self.joins += 1;
        self.clusters[c].summary = self.summarize(c);
    }

    /// Split: hand the pending residual shift down to the children.
    fn push(&mut self, c: usize) {
        self.splits += 1;
        let d = self.clusters[c].summary.take_delta();
        if d == 0 {
            return;
        }
        match self.clusters[c].shape {
            Shape::Base(_) => {}
            Shape::Rake { vertex, .. } => self.shift(vertex, d),
            Shape::Compress { lower, upper } => {
                self.shift(lower, d);
                self.shift(upper, d);
            }
        }
    }

    fn shift(&mut self, c: usize, d: i64) {
        let cl = &mut self.clusters[c];
        if matches!(cl.shape, Shape::Base(_)) {
            cl.summary.minc += d;
        } else {
            cl.summary.shift(d);
        }
    }

    fn load_chain(&mut self, target: usize) -> Vec<usize> {
        let mut chain = std::mem::take(&mut self.chain);
        chain.clear();
        let mut c = Some(target);
        while let Some(x) = c {
            chain.push(x);
            c = self.clusters[x].parent;
        }
        chain.reverse();
        chain
    }

    /// Shifts the residuals of every node from the root down to `x` by `d`,
    /// applies `edit` to the leaf sets of `x`, and rejoins the chain.
    fn path_update(&mut self, x: usize, d: i64, edit: impl FnOnce(&mut Self)) {
        let target = self.base_of[x];
        let chain = self.load_chain(target);
        for w in chain.windows(2) {
            let (c, next) = (w[0], w[1]);
            self.push(c);
            if d != 0 {
                match self.clusters[c].shape {
                    Shape::Compress { lower, upper } if next == lower => self.shift(upper, d),
                    Shape::Rake { vertex, light } if next == light => self.shift(vertex, d),
                    _ => {}
                }
            }
        }
        self.clusters[target].summary.minc += d;
        edit(self);
        for &c in chain.iter().rev() {
            self.refresh(c);
        }
        self.chain = chain;
    }

    /// Folds a bottom-up list of path pieces into one exposed summary.
    fn fold_down(&mut self, start: ClusterSummary, pieces: &[usize]) -> ClusterSummary {
        let mut acc = start;
        for &p in pieces.iter().rev() {
            acc = join_compress(&acc, &self.summary(p));
            self.joins += 1;
        }
        acc
    }

    /// Summary of the root-to-`x` path.
    fn expose_path(&mut self, x: usize) -> ClusterSummary {
        let target = self.base_of[x];
        let chain = self.load_chain(target);
        let mut pieces = std::mem::take(&mut self.pieces);
        pieces.clear();
        for w in chain.windows(2) {
            let (c, next) = (w[0], w[1]);
            self.push(c);
            match self.clusters[c].shape {
                Shape::Compress { lower, upper } if next == lower => pieces.push(upper),
                Shape::Rake { vertex, light } if next == light => pieces.push(vertex),
                _ => {}
            }
        }
        let acc = self.fold_down(self.summary(target), &pieces);
        self.chain = chain;
        self.pieces = pieces;
        acc
    }

    /// Summary of the subtree of `v`: its node, everything below it on its
    /// heavy path, and all that hangs off those nodes.
    fn expose_subtree(&mut self, v: usize) -> ClusterSummary {
        let target = self.vertex_of[v];
        let chain = self.load_chain(target);
        let mut pieces = std::mem::take(&mut self.pieces);
        pieces.clear();
        for w in chain.windows(2) {
            let (c, next) = (w[0], w[1]);
            self.push(c);
            match self.clusters[c].shape {
                Shape::Rake { light, .. } if next == light => pieces.clear(),
                Shape::Compress { lower, upper } if next == upper => pieces.push(lower),
                _ => {}
            }
        }
        let mut acc = self.summary(target);
        for &p in pieces.iter().rev() {
            acc = join_compress(&self.summary(p), &acc);
            self.joins += 1;
        }
        self.chain = chain;
        self.pieces = pieces;
        acc
    }

    fn leaf(&self, e: ElementId) -> Result<Leaf> {
        self.leaf.get(e.index()).copied().flatten().ok_or(Error::UnknownElement(e.index()))
    }

    fn check_node(&self, node: usize) -> Result<()> {
        if node < self.num_real {
            Ok(())
        } else {
            Err(invalid(format!("unknown node {node}")))
        }
    }

    /// Total joins performed (cluster recomputations, including the virtual
    /// joins that assemble exposed paths).
    pub fn joins(&self) -> u64 {
        self.joins
    }

    pub fn splits(&self) -> u64 {
        self.splits
    }

    pub fn structural_ops(&self) -> u64 {
        self.joins + self.splits
    }

    /// Number of tree nodes: internal nodes including binarization dummies,
    /// plus attached leaves.
    pub fn tree_size(&self) -> usize {
        self.capacity.len() + self.attached
    }

    /// Longest root-to-base cluster chain.
    pub fn height(&self) -> usize {
        (0..self.capacity.len())
            .map(|x| std::iter::successors(Some(self.base_of[x]), |&c| self.clusters[c].parent).count())
            .max()
            .unwrap_or(0)
    }

    /// Pushes all pending shifts down, then checks every cluster against a
    /// recomputation from its children and every node residual against a
    /// recount of the basis leaves below it.
    pub fn check_consistency(&mut self) -> std::result::Result<(), String> {
        for c in (0..self.clusters.len()).rev() {
            if !matches!(self.clusters[c].shape, Shape::Base(_)) {
                let d = self.clusters[c].summary.take_delta();
                match self.clusters[c].shape {
                    Shape::Rake { vertex, .. } => self.shift(vertex, d),
                    Shape::Compress { lower, upper } => {
                        self.shift(lower, d);
                        self.shift(upper, d);
                    }
                    Shape::Base(_) => {}
                }
            }
        }
        let total = self.capacity.len();
        let mut used: Vec<i64> =
            (0..total).map(|x| self.in_leaves[x].len() as i64 + i64::from(self.retired[x])).collect();
        let skeleton_parent = self.skeleton_parents();
        let mut order: Vec<usize> = (0..total).collect();
        let depth = |mut x: usize| {
            let mut d = 0;
            while let Some(p) = skeleton_parent[x] {
                x = p;
                d += 1;
            }
            d
        };
        order.sort_by_key(|&x| std::cmp::Reverse(depth(x)));
        for &x in &order {
            if let Some(p) = skeleton_parent[x] {
                used[p] += used[x];
            }
        }
        for x in 0..total {
            let c = self.base_of[x];
            let s = self.summary(c);
            let expected = self.capacity[x] - used[x];
            if s.minc != expected {
                return Err(format!("node {x}: stored residual {} but recount gives {expected}", s.minc));
            }
            if s != self.summarize(c) {
                return Err(format!("base cluster of node {x} is stale"));
            }
        }
        for c in 0..self.clusters.len() {
            if matches!(self.clusters[c].shape, Shape::Base(_)) {
                continue;
            }
            let fresh = self.summarize(c);
            if self.summary(c) != fresh {
                return Err(format!("cluster {c} differs from its recomputation"));
            }
        }
        Ok(())
    }

    /// Recovers the binarized parent of every node from the cluster shapes.
    fn skeleton_parents(&self) -> Vec<Option<usize>> {
        let total = self.capacity.len();
        let mut parent = vec![None; total];
        // the top node of a cluster's path, and its bottom node
        let mut top = vec![usize::MAX; self.clusters.len()];
        let mut bottom = vec![usize::MAX; self.clusters.len()];
        for c in 0..self.clusters.len() {
            match self.clusters[c].shape {
                Shape::Base(x) => {
                    top[c] = x;
                    bottom[c] = x;
                }
                Shape::Rake { vertex, light } => {
                    top[c] = top[vertex];
                    bottom[c] = bottom[vertex];
                    parent[top[light]] = Some(top[vertex]);
                }
                Shape::Compress { lower, upper } => {
                    top[c] = top[upper];
                    bottom[c] = bottom[lower];
                    parent[top[lower]] = Some(bottom[upper]);
                }
            }
        }
        parent
    }
}

impl LaminarStructure for TopTreeLaminar {
    fn num_internal(&self) -> usize {
        self.num_real
    }

    fn root(&self) -> usize {
        self.root_node
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
        self.attached += 1;
        let key = WeightKey::new(weight, e);
        if into_basis {
            self.weight_sum += weight;
            self.path_update(node, -1, |t| {
                t.in_leaves[node].insert(key);
            });
        } else {
            self.path_update(node, 0, |t| {
                t.out_leaves[node].insert(key);
            });
        }
        Ok(())
    }

    fn detach(&mut self, e: ElementId, release: bool) -> Result<()> {
        let l = self.leaf(e)?;
        self.leaf[e.index()] = None;
        self.attached -= 1;
        let key = WeightKey::new(l.weight, e);
        let node = l.node;
        if l.in_basis {
            self.weight_sum -= l.weight;
            if !release {
                self.retired[node] += 1;
            }
            self.path_update(node, if release { 1 } else { 0 }, |t| {
                t.in_leaves[node].remove(&key);
            });
        } else {
            self.path_update(node, 0, |t| {
                t.out_leaves[node].remove(&key);
            });
        }
        Ok(())
    }

    fn add_unchecked(&mut self, e: ElementId) -> Result<()> {
        let l = self.leaf(e)?;
        if l.in_basis {
            return Err(precondition(format!("{e} is already in the basis")));
        }
        self.leaf[e.index()] = Some(Leaf { in_basis: true, ..l });
        self.weight_sum += l.weight;
        let key = WeightKey::new(l.weight, e);
        let node = l.node;
        self.path_update(node, -1, |t| {
            t.out_leaves[node].remove(&key);
            t.in_leaves[node].insert(key);
        });
        Ok(())
    }

    fn remove(&mut self, e: ElementId) -> Result<()> {
        let l = self.leaf(e)?;
        if !l.in_basis {
            return Err(precondition(format!("{e} is not in the basis")));
        }
        self.leaf[e.index()] = Some(Leaf { in_basis: false, ..l });
        self.weight_sum -= l.weight;
        let key = WeightKey::new(l.weight, e);
        let node = l.node;
        self.path_update(node, 1, |t| {
            t.in_leaves[node].remove(&key);
            t.out_leaves[node].insert(key);
        });
        Ok(())
    }

    fn lowest_tight_constraint(&mut self, node: usize) -> Result<Option<usize>> {
        self.check_node(node)?;
        let s = self.expose_path(node);
        debug_assert!(s.minc >= 0, "negative residual on the path to node {node}");
        Ok((s.minc <= 0).then_some(s.argminc))
    }

    fn query_min(&mut self, node: usize) -> Result<Option<ElementId>> {
        self.check_node(node)?;
        Ok(self.expose_subtree(node).mine.map(|k| k.id))
    }

    fn query_max(&mut self, node: usize) -> Result<Option<ElementId>> {
        self.check_node(node)?;
        let s = if node == self.root_node { self.summary(self.top) } else { self.expose_subtree(node) };
        Ok(s.reachable_max().map(|k| k.id))
    }

    fn residual(&mut self, node: usize) -> Result<i64> {
        self.check_node(node)?;
        let target = self.base_of[node];
        let chain = self.load_chain(target);
        for &c in &chain[..chain.len() - 1] {
            self.push(c);
        }
        self.chain = chain;
        Ok(self.summary(target).minc)
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
