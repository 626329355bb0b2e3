//! Exact, deliberately simple algorithms used as ground truth in tests and by
//! the `verify` and `brute` CLI paths.

use std::collections::VecDeque;

use crate::element::{sort_by_weight_desc, ElementId};
use crate::error::{Error, Result};
use crate::matroid::Matroid;
use crate::submodular::ValueOracle;

/// Largest ground set `brute_force_opt` accepts.
pub const BRUTE_FORCE_LIMIT: usize = 20;

/// Greedy maximum-weight basis with the (weight, id) tie-break.
/// Zero-weight elements are included when they fit.
pub fn matroid_greedy_basis(weights: &[f64], matroid: &Matroid) -> Vec<ElementId> {
    let mut order: Vec<ElementId> = (0..matroid.n()).map(ElementId::new).collect();
    sort_by_weight_desc(&mut order, |e| weights[e.index()]);
    let mut basis = Vec::new();
    for e in order {
        basis.push(e);
        if !matroid.is_independent(&basis) {
            basis.pop();
        }
    }
    basis.sort_unstable();
    basis
}

/// Greedy basis for any independence test over elements `0..n`.
pub fn greedy_basis_with(
    weights: &[f64],
    candidates: &[ElementId],
    mut independent: impl FnMut(&[ElementId]) -> bool,
) -> Vec<ElementId> {
    let mut order = candidates.to_vec();
    sort_by_weight_desc(&mut order, |e| weights[e.index()]);
    let mut basis = Vec::new();
    for e in order {
        basis.push(e);
        if !independent(&basis) {
            basis.pop();
        }
    }
    basis.sort_unstable();
    basis
}

/// Maximum of `f` over independent sets by enumerating maximal independent
/// sets (monotonicity makes the others redundant).
pub fn brute_force_opt(f: &ValueOracle, matroid: &Matroid) -> Result<(Vec<ElementId>, f64)> {
    let n = matroid.n();
    if n > BRUTE_FORCE_LIMIT {
        return Err(Error::TooLarge { n, limit: BRUTE_FORCE_LIMIT });
    }
    let mut best = (Vec::new(), f.value(&[])?);
    let mut current = Vec::new();
    let rank = matroid.rank();
    enumerate_maximal(0, n, rank, matroid, &mut current, &mut |set| {
        let v = f.value(set)?;
        if v > best.1 {
            best = (set.to_vec(), v);
        }
        Ok(())
    })?;
    Ok(best)
}

fn enumerate_maximal(
    i: usize,
    n: usize,
    rank: usize,
    matroid: &Matroid,
    current: &mut Vec<ElementId>,
    visit: &mut impl FnMut(&[ElementId]) -> Result<()>,
) -> Result<()> {
    if i == n {
        // in a matroid every maximal independent set is a basis
        return if current.len() == rank { visit(current) } else { Ok(()) };
    }
    let e = ElementId::new(i);
    current.push(e);
    if matroid.is_independent(current) {
        enumerate_maximal(i + 1, n, rank, matroid, current, visit)?;
    }
    current.pop();
    enumerate_maximal(i + 1, n, rank, matroid, current, visit)
}

/// Maximum of `f` over all `2^n` subsets that are independent. Only for
/// cross-checking `brute_force_opt`.
pub fn brute_force_unpruned(f: &ValueOracle, matroid: &Matroid) -> Result<(Vec<ElementId>, f64)> {
    let n = matroid.n();
    if n > BRUTE_FORCE_LIMIT {
        return Err(Error::TooLarge { n, limit: BRUTE_FORCE_LIMIT });
    }
    let mut best = (Vec::new(), f.value(&[])?);
    for mask in 0u32..(1u32 << n) {
        let set: Vec<ElementId> = (0..n).filter(|&i| mask >> i & 1 == 1).map(ElementId::new).collect();
        if matroid.is_independent(&set) {
            let v = f.value(&set)?;
            if v > best.1 {
                best = (set, v);
            }
        }
    }
    Ok(best)
}

/// Maximum-cardinality bipartite matching. `adj[l]` lists the right
/// neighbours of left vertex `l`; returns each left vertex's partner.
pub fn hopcroft_karp(adj: &[Vec<u32>], num_right: usize) -> Vec<Option<usize>> {
    const FREE: usize = usize::MAX;
    let nl = adj.len();
    let mut mate_l = vec![FREE; nl];
    let mut mate_r = vec![FREE; num_right];
    let mut dist = vec![0usize; nl];
    loop {
        // layered BFS from free left vertices
        let mut queue = VecDeque::new();
        for l in 0..nl {
            if mate_l[l] == FREE {
                dist[l] = 0;
                queue.push_back(l);
            } else {
                dist[l] = usize::MAX;
            }
        }
        let mut found = false;
        while let Some(l) = queue.pop_front() {
            for &r in &adj[l] {
                let m = mate_r[r as usize];
                if m == FREE {
                    found = true;
                } else if dist[m] == usize::MAX {
                    dist[m] = dist[l] + 1;
                    queue.push_back(m);
                }
            }
        }
        if !found {
            break;
        }
        let mut it = vec![0usize; nl];
        for l in 0..nl {
            if mate_l[l] == FREE {
                augment_from(l, adj, &mut mate_l, &mut mate_r, &mut dist, &mut it);
            }
        }
    }
    mate_l.into_iter().map(|r| (r != FREE).then_some(r)).collect()
}

fn augment_from(
    start: usize,
    adj: &[Vec<u32>],
    mate_l: &mut [usize],
    mate_r: &mut [usize],
    dist: &mut [usize],
    it: &mut [usize],
) -> bool {
    const FREE: usize = usize::MAX;
    // iterative DFS along the BFS layers; it[l] is the edge being explored
    let mut stack = vec![start];
    while let Some(&l) = stack.last() {
        if it[l] == adj[l].len() {
            dist[l] = usize::MAX;
            stack.pop();
            if let Some(&parent) = stack.last() {
                it[parent] += 1;
            }
            continue;
        }
        let r = adj[l][it[l]] as usize;
        let m = mate_r[r];
        if m == FREE {
            for &x in &stack {
                let rx = adj[x][it[x]] as usize;
                mate_l[x] = rx;
                mate_r[rx] = x;
            }
            return true;
        }
        if dist[m] == dist[l] + 1 {
            stack.push(m);
        } else {
            it[l] += 1;
        }
    }
    false
}

/// Maximum-weight bipartite matching (Kuhn–Munkres on the square padding).
/// `weight[l][r]` is `None` for non-edges. Returns each left vertex's partner.
pub fn hungarian_max_weight(weight: &[Vec<Option<f64>>], num_right: usize) -> Vec<Option<usize>> {
    let nl = weight.len();
    let size = nl.max(num_right);
    if size == 0 {
        return Vec::new();
    }
    let max_w = weight.iter().flatten().flatten().fold(0.0f64, |a, &b| a.max(b));
    // minimise cost = max_w - w, non-edges cost max_w (equivalent to weight 0)
    let cost = |i: usize, j: usize| -> f64 {
        match weight.get(i).and_then(|row| row.get(j)).copied().flatten() {
            Some(w) => max_w - w,
            None => max_w,
        }
    };
    let inf = f64::INFINITY;
    // 1-indexed potentials, classic O(n^3) formulation
    let mut u = vec![0.0; size + 1];
    let mut v = vec![0.0; size + 1];
    let mut p = vec![0usize; size + 1];
    let mut way = vec![0usize; size + 1];
    for i in 1..=size {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![inf; size + 1];
        let mut used = vec![false; size + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = inf;
            let mut j1 = 0;
            for j in 1..=size {
                if !used[j] {
                    let cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=size {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut mate = vec![None; nl];
    for j in 1..=size {
        let i = p[j];
        if i >= 1 && i <= nl && j <= num_right {
            if let Some(w) = weight[i - 1].get(j - 1).copied().flatten() {
                if w > 0.0 {
                    mate[i - 1] = Some(j - 1);
                }
            }
        }
    }
    mate
}

/// Total weight of a left-vertex-weighted maximum matching.
pub fn max_vertex_weight_matching(adj: &[Vec<u32>], num_right: usize, left_weight: &[f64]) -> f64 {
    let weight: Vec<Vec<Option<f64>>> = adj
        .iter()
        .enumerate()
        .map(|(l, nbrs)| {
            let mut row = vec![None; num_right];
            for &r in nbrs {
                row[r as usize] = Some(left_weight[l]);
            }
            row
        })
        .collect();
    hungarian_max_weight(&weight, num_right)
        .iter()
        .enumerate()
        .filter(|(_, m)| m.is_some())
        .map(|(l, _)| left_weight[l])
        .sum()
}

/// From-scratch constraint check.
pub fn feasibility_verify(set: &[ElementId], matroid: &Matroid) -> bool {
    matroid.is_independent(set)
}

/// Weight of a maximum spanning forest over the edges with `alive[e]`,
/// after contracting the edges in `contracted`.
pub fn kruskal_weight(
    num_vertices: usize,
    edges: &[(u32, u32)],
    weights: &[f64],
    alive: impl Fn(usize) -> bool,
    contracted: &[usize],
) -> (f64, usize) {
    let mut uf = crate::graphic::UnionFind::new(num_vertices);
    for &e in contracted {
        uf.union(edges[e].0 as usize, edges[e].1 as usize);
    }
    let mut order: Vec<ElementId> = (0..edges.len()).filter(|&e| alive(e)).map(ElementId::new).collect();
    sort_by_weight_desc(&mut order, |e| weights[e.index()]);
    let (mut total, mut count) = (0.0, 0);
    for e in order {
        let (u, v) = edges[e.index()];
        if uf.union(u as usize, v as usize).is_some() {
            total += weights[e.index()];
            count += 1;
        }
    }
    (total, count)
}
