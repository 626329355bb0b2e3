//! Swap rounding of a convex combination of bases.
//!
//! Two bases are merged by repeatedly picking `i` in `B1 \ B2`, finding an
//! exchange partner `j` in `B2 \ B1` such that both `B1 - i + j` and
//! `B2 - j + i` are bases, and moving one of the two sets toward the other.
//! Exchange partners come from a per-class finder:
//!
//! * laminar: two top-tree structures, one per basis, answer each pair with a
//!   tight-constraint query in one and a heaviest-addable query in the other;
//! * transversal: the union of the two certifying matchings splits into paths
//!   and even cycles, and the path starting at `i` ends at the partner;
//! * graphic: a walk along the cycle that `i` closes in `B2`.

use rand::Rng;

use crate::element::ElementId;
use crate::error::{invalid, precondition, Result};
use crate::graphic::{GraphicMatroid, UnionFind};
use crate::laminar::{LaminarFamily, LaminarStructure, TopTreeLaminar};
use crate::matroid::Matroid;
use crate::optimizer::FractionalSolution;
use crate::transversal::TransversalMatroid;

/// Finds exchange partners while two bases are being merged.
trait ExchangeFinder {
    /// A `j` in `B2 \ B1` such that `B1 - i + j` and `B2 - j + i` are both bases.
    fn find(&mut self, i: ElementId) -> Result<ElementId>;
    /// Applies the outcome for the pair last returned by `find`: `first`
    /// means `B1` takes `j`, otherwise `B2` takes `i`.
    fn commit(&mut self, i: ElementId, j: ElementId, first: bool) -> Result<()>;
}

fn membership(n: usize, set: &[ElementId]) -> Vec<bool> {
    let mut m = vec![false; n];
    for &e in set {
        m[e.index()] = true;
    }
    m
}

struct LaminarExchange {
    family: LaminarFamily,
    first: TopTreeLaminar,
    second: TopTreeLaminar,
}

impl LaminarExchange {
    fn new(family: &LaminarFamily, b1: &[ElementId], b2: &[ElementId]) -> Result<Self> {
        let in1 = membership(family.n(), b1);
        let in2 = membership(family.n(), b2);
        let mut first = TopTreeLaminar::new(family);
        let mut second = TopTreeLaminar::new(family);
        let mut union: Vec<ElementId> = b1.iter().chain(b2).copied().collect();
        union.sort_unstable();
        union.dedup();
        for &e in &union {
            let node = family.element_node(e);
            let (a, b) = (in1[e.index()], in2[e.index()]);
            first.attach(e, node, 1.0, a)?;
            second.attach(e, node, 1.0, b)?;
            if a && b {
                // shared elements keep their capacity but never take part
                first.detach(e, false)?;
                second.detach(e, false)?;
            }
        }
        Ok(LaminarExchange { family: family.clone(), first, second })
    }
}

impl ExchangeFinder for LaminarExchange {
    fn find(&mut self, i: ElementId) -> Result<ElementId> {
        let node = self.family.element_node(i);
        let tight = match self.second.lowest_tight_constraint(node)? {
            Some(v) => v,
            None => self.second.root(),
        };
        self.first.remove(i)?;
        self.first.detach(i, true)?;
        self.first
            .query_max(tight)?
            .ok_or_else(|| precondition(format!("no exchange partner for {i}: inputs are not bases")))
    }

    fn commit(&mut self, i: ElementId, j: ElementId, first: bool) -> Result<()> {
        if first {
            self.first.add_unchecked(j)?;
            self.first.detach(j, false)?;
            self.second.detach(i, false)?;
            self.second.detach(j, false)?;
        } else {
            self.first.attach(i, self.family.element_node(i), 1.0, true)?;
            self.first.detach(i, false)?;
            self.first.detach(j, false)?;
            self.second.remove(j)?;
            self.second.detach(j, true)?;
            self.second.add_unchecked(i)?;
            self.second.detach(i, false)?;
        }
        Ok(())
    }
}

struct TransversalExchange {
    /// Per basis: right partner of each left vertex and left partner of each right vertex.
    left: [Vec<Option<u32>>; 2],
    right: [Vec<Option<u32>>; 2],
    /// Alternating path from the last `find`: left vertices `l_0 = i, l_1, ..., l_k = j`
    /// and right vertices `r_1..r_k` with `l_{t-1} r_t` in the first matching and
    /// `r_t l_t` in the second.
    path_left: Vec<u32>,
    path_right: Vec<u32>,
}

impl TransversalExchange {
    fn new(matroid: &TransversalMatroid, b1: &[ElementId], b2: &[ElementId]) -> Result<Self> {
        let mut left = [vec![None; matroid.n()], vec![None; matroid.n()]];
        let mut right = [vec![None; matroid.num_right()], vec![None; matroid.num_right()]];
        for (k, set) in [b1, b2].into_iter().enumerate() {
            let matching = matroid.matching_of(set);
            if matching.len() != set.len() {
                return Err(precondition("basis has no perfect matching"));
            }
            for (e, r) in matching {
                left[k][e.index()] = Some(r as u32);
                right[k][r] = Some(e.0);
            }
        }
        Ok(TransversalExchange { left, right, path_left: Vec::new(), path_right: Vec::new() })
    }

    fn rematch(&mut self, k: usize, l: u32, r: Option<u32>) {
        if let Some(old) = self.left[k][l as usize] {
            if self.right[k][old as usize] == Some(l) {
                self.right[k][old as usize] = None;
            }
        }
        self.left[k][l as usize] = r;
        if let Some(r) = r {
            self.right[k][r as usize] = Some(l);
        }
    }
}

impl ExchangeFinder for TransversalExchange {
    fn find(&mut self, i: ElementId) -> Result<ElementId> {
        self.path_left.clear();
        self.path_right.clear();
        let mut l = i.0;
        self.path_left.push(l);
        loop {
            let Some(r) = self.left[0][l as usize] else {
                // `l` is matched only in the second basis: the path ends here
                return Ok(ElementId(l));
            };
            let Some(next) = self.right[1][r as usize] else {
                return Err(precondition(format!("matching path from {i} ends on a right vertex: inputs are not bases")));
            };
            if self.path_left.len() > self.left[0].len() {
                return Err(precondition("matching union has a cycle through a non-shared vertex"));
            }
            self.path_right.push(r);
            self.path_left.push(next);
            l = next;
        }
    }

    fn commit(&mut self, i: ElementId, j: ElementId, first: bool) -> Result<()> {
        let (ls, rs) = (std::mem::take(&mut self.path_left), std::mem::take(&mut self.path_right));
        if ls.first() != Some(&i.0) || ls.last() != Some(&j.0) {
            return Err(invalid("commit does not match the last exchange found"));
        }
        if first {
            // B1 - i + j: every later path vertex takes its partner from the second matching
            self.rematch(0, i.0, None);
            for (t, &r) in rs.iter().enumerate() {
                self.rematch(0, ls[t + 1], Some(r));
            }
        } else {
            // B2 - j + i: every earlier path vertex takes its partner from the first matching
            self.rematch(1, j.0, None);
            for (t, &r) in rs.iter().enumerate() {
                self.rematch(1, ls[t], Some(r));
            }
        }
        Ok(())
    }
}

struct GraphicExchange {
    graph: GraphicMatroid,
    sets: [Vec<bool>; 2],
}

impl GraphicExchange {
    fn new(graph: &GraphicMatroid, b1: &[ElementId], b2: &[ElementId]) -> Self {
        GraphicExchange { graph: graph.clone(), sets: [membership(graph.n(), b1), membership(graph.n(), b2)] }
    }

    /// Edges of the forest `sets[k]` on the path from `from` to `to`, if any.
    fn forest_path(&self, k: usize, from: usize, to: usize) -> Option<Vec<ElementId>> {
        let nv = self.graph.num_vertices();
        let mut adj: Vec<Vec<(usize, u32)>> = vec![Vec::new(); nv];
        for (e, &inside) in self.sets[k].iter().enumerate() {
            if inside {
                let (u, v) = self.graph.endpoints(ElementId::new(e));
                adj[u].push((v, e as u32));
                adj[v].push((u, e as u32));
            }
        }
        let mut via: Vec<Option<(usize, u32)>> = vec![None; nv];
        let mut seen = vec![false; nv];
        seen[from] = true;
        let mut stack = vec![from];
        while let Some(u) = stack.pop() {
            if u == to {
                break;
            }
            for &(v, e) in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    via[v] = Some((u, e));
                    stack.push(v);
                }
            }
        }
        if !seen[to] {
            return None;
        }
        let mut path = Vec::new();
        let mut v = to;
        while let Some((u, e)) = via[v] {
            path.push(ElementId(e));
            v = u;
        }
        Some(path)
    }
}

impl ExchangeFinder for GraphicExchange {
    fn find(&mut self, i: ElementId) -> Result<ElementId> {
        let (a, b) = self.graph.endpoints(i);
        let cycle = self
            .forest_path(1, a, b)
            .ok_or_else(|| precondition(format!("{i} closes no cycle in the second set: inputs are not bases")))?;
        let mut components = UnionFind::new(self.graph.num_vertices());
        for (e, &inside) in self.sets[0].iter().enumerate() {
            if inside && e != i.index() {
                let (u, v) = self.graph.endpoints(ElementId::new(e));
                components.union(u, v);
            }
        }
        cycle
            .into_iter()
            .filter(|j| !self.sets[0][j.index()])
            .find(|&j| {
                let (u, v) = self.graph.endpoints(j);
                !components.same(u, v)
            })
            .ok_or_else(|| precondition(format!("no exchange partner for {i}: inputs are not bases")))
    }

    fn commit(&mut self, i: ElementId, j: ElementId, first: bool) -> Result<()> {
        let k = if first { 0 } else { 1 };
        let (out, inn) = if first { (i, j) } else { (j, i) };
        self.sets[k][out.index()] = false;
        self.sets[k][inn.index()] = true;
        Ok(())
    }
}

fn finder(matroid: &Matroid, b1: &[ElementId], b2: &[ElementId]) -> Result<Box<dyn ExchangeFinder>> {
    Ok(match matroid {
        Matroid::Laminar(m) => Box::new(LaminarExchange::new(m, b1, b2)?),
        Matroid::Graphic(m) => Box::new(GraphicExchange::new(m, b1, b2)),
        Matroid::Transversal(m) => Box::new(TransversalExchange::new(m, b1, b2)?),
    })
}

fn check_basis(matroid: &Matroid, set: &[ElementId]) -> Result<()> {
    let mut sorted = set.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != set.len() {
        return Err(invalid("basis lists an element twice"));
    }
    if let Some(e) = set.iter().find(|e| e.index() >= matroid.n()) {
        return Err(crate::error::Error::UnknownElement(e.index()));
    }
    if set.len() != matroid.rank() || !matroid.is_independent(set) {
        return Err(invalid(format!("set of size {} is not a basis (rank {})", set.len(), matroid.rank())));
    }
    Ok(())
}

/// An exchange partner of `i` for the bases `b1` and `b2`.
pub fn find_exchange(i: ElementId, b1: &[ElementId], b2: &[ElementId], matroid: &Matroid) -> Result<ElementId> {
    check_basis(matroid, b1)?;
    check_basis(matroid, b2)?;
    if !b1.contains(&i) || b2.contains(&i) {
        return Err(invalid(format!("{i} must lie in the first basis only")));
    }
    finder(matroid, b1, b2)?.find(i)
}

/// Merges two bases with weights `alpha1` and `alpha2`; each element ends up
/// in the result with probability proportional to the weight of the bases
/// holding it.
pub fn merge_bases<R: Rng + ?Sized>(
    alpha1: f64,
    b1: &[ElementId],
    alpha2: f64,
    b2: &[ElementId],
    matroid: &Matroid,
    rng: &mut R,
) -> Result<Vec<ElementId>> {
    if !(alpha1 >= 0.0 && alpha2 >= 0.0 && alpha1 + alpha2 > 0.0) {
        return Err(invalid(format!("merge weights must be non-negative with a positive sum, got {alpha1}, {alpha2}")));
    }
    check_basis(matroid, b1)?;
    check_basis(matroid, b2)?;
    let n = matroid.n();
    let mut first = membership(n, b1);
    let mut second = membership(n, b2);
    let pending: Vec<ElementId> = b1.iter().copied().filter(|e| !second[e.index()]).collect();
    if pending.is_empty() {
        return Ok(b1.to_vec());
    }
    let mut exchange = finder(matroid, b1, b2)?;
    let p_second = alpha2 / (alpha1 + alpha2);
    for i in pending {
        let j = exchange.find(i)?;
        if first[j.index()] || !second[j.index()] || j == i {
            return Err(precondition(format!("exchange partner {j} of {i} is not in the second basis only")));
        }
        let take_j = rng.gen::<f64>() < p_second;
        if take_j {
            first[i.index()] = false;
            first[j.index()] = true;
        } else {
            second[j.index()] = false;
            second[i.index()] = true;
        }
        exchange.commit(i, j, take_j)?;
        if cfg!(debug_assertions) {
            let collect = |m: &[bool]| (0..n).filter(|&e| m[e]).map(ElementId::new).collect::<Vec<_>>();
            debug_assert!(matroid.is_independent(&collect(&first)), "merge produced a dependent first set");
            debug_assert!(matroid.is_independent(&collect(&second)), "merge produced a dependent second set");
        }
    }
    debug_assert_eq!(first, second, "merged bases differ");
    Ok((0..n).filter(|&e| first[e]).map(ElementId::new).collect())
}

/// Rounds a convex combination of bases of `matroid` contracted by `seed`
/// to one such basis, preserving every element's marginal. The result
/// excludes `seed`.
pub fn swap_round_contracted<R: Rng + ?Sized>(
    fractional: &FractionalSolution,
    matroid: &Matroid,
    seed: &[ElementId],
    rng: &mut R,
) -> Result<Vec<ElementId>> {
    let mut parts = fractional.bases().iter();
    let Some((alpha, first)) = parts.next() else {
        return Err(invalid("fractional solution has no bases"));
    };
    let lift = |b: &[ElementId]| -> Vec<ElementId> {
        let mut v: Vec<ElementId> = b.iter().chain(seed).copied().collect();
        v.sort_unstable();
        v
    };
    let mut weight = *alpha;
    let mut current = lift(first);
    check_basis(matroid, &current)?;
    for (alpha, basis) in parts {
        current = merge_bases(weight, &current, *alpha, &lift(basis), matroid, rng)?;
        weight += alpha;
    }
    let seeded = membership(matroid.n(), seed);
    current.retain(|e| !seeded[e.index()]);
    Ok(current)
}

/// Rounds a convex combination of bases of `matroid` to one basis.
pub fn swap_round<R: Rng + ?Sized>(fractional: &FractionalSolution, matroid: &Matroid, rng: &mut R) -> Result<Vec<ElementId>> {
    swap_round_contracted(fractional, matroid, &[], rng)
}
