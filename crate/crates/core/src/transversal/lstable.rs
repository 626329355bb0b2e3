//! L-stable approximate maximum-weight matching with virtual weights.
//!
//! Weights are powers of `1 + eps` stored as integer levels, with `None`
//! meaning weight zero. Every right vertex scans its neighbour list level by
//! level looking for a neighbour whose virtual weight reaches the current
//! level; taking a neighbour lowers that neighbour's virtual weight by one
//! level, possibly stealing it from another right vertex which then resumes
//! its own scan. Matched left vertices only become unmatched when their own
//! weight is decremented.

use crate::classes::WeightClassifier;
use crate::element::ElementId;
use crate::error::{invalid, precondition, Error, Result};
use crate::oracle::{MaxWeightOracle, OracleChanges};

use super::TransversalMatroid;

/// Weight level: `Some(j)` is `(1 + eps)^j`, `None` is zero.
pub type Level = Option<i32>;

const NONE: u32 = u32::MAX;

fn lower(level: Level) -> Level {
    level.map(|j| j - 1)
}

#[derive(Debug, Clone)]
pub struct LStableMatching {
    epsilon: f64,
    top: i32,
    floor: i32,
    /// `N_r` for every right vertex.
    right_nbrs: Vec<Vec<u32>>,
    /// For every left vertex: `(r, position of the left vertex in N_r)`.
    left_nbrs: Vec<Vec<(u32, u32)>>,
    weight: Vec<Level>,
    virtual_weight: Vec<Level>,
    mate_l: Vec<Option<u32>>,
    mate_r: Vec<Option<u32>>,
    /// Left vertices matched by the zero-weight fallback rule.
    fallback: Vec<bool>,
    pointer: Vec<usize>,
    scan_level: Vec<i32>,
    /// Unmatched neighbours of each right vertex, as positions in `N_r`.
    free_list: Vec<Vec<u32>>,
    free_slot: Vec<Vec<u32>>,
    frozen: Vec<bool>,
    scans: u64,
    bookkeeping: u64,
    touched: Vec<(u32, bool)>,
}

impl LStableMatching {
    /// Builds the structure and runs the initial matching. `top` is the
    /// highest weight level; levels below `-floor(1/eps)` count as zero.
    pub fn new(num_right: usize, adjacency: &[Vec<u32>], weights: Vec<Level>, epsilon: f64, top: i32) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(invalid(format!("epsilon must lie in (0, 1), got {epsilon}")));
        }
        if weights.len() != adjacency.len() {
            return Err(invalid(format!("{} weights for {} left vertices", weights.len(), adjacency.len())));
        }
        let floor = -((1.0 / epsilon).floor() as i32);
        let mut weight = weights;
        for w in weight.iter_mut() {
            match *w {
                Some(j) if j > top => return Err(invalid(format!("weight level {j} above top level {top}"))),
                Some(j) if j < floor => *w = None,
                _ => {}
            }
        }
        let mut right_nbrs = vec![Vec::new(); num_right];
        let mut left_nbrs = vec![Vec::new(); adjacency.len()];
        for (l, nbrs) in adjacency.iter().enumerate() {
            for &r in nbrs {
                let r = r as usize;
                if r >= num_right {
                    return Err(Error::Instance(format!("left vertex {l} lists unknown right vertex {r}")));
                }
                left_nbrs[l].push((r as u32, right_nbrs[r].len() as u32));
                right_nbrs[r].push(l as u32);
            }
        }
        let free_list: Vec<Vec<u32>> = right_nbrs.iter().map(|n| (0..n.len() as u32).collect()).collect();
        let free_slot = free_list.clone();
        let m: usize = right_nbrs.iter().map(Vec::len).sum();
        let nl = adjacency.len();
        let mut s = LStableMatching {
            epsilon,
            top,
            floor,
            right_nbrs,
            left_nbrs,
            virtual_weight: weight.clone(),
            weight,
            mate_l: vec![None; nl],
            mate_r: vec![None; num_right],
            fallback: vec![false; nl],
            pointer: vec![0; num_right],
            scan_level: vec![top; num_right],
            free_list,
            free_slot,
            frozen: vec![false; nl],
            scans: 0,
            bookkeeping: m as u64,
            touched: Vec::new(),
        };
        for r in 0..num_right {
            s.match_chain(r);
        }
        s.touched.clear();
        Ok(s)
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn top_level(&self) -> i32 {
        self.top
    }

    pub fn floor_level(&self) -> i32 {
        self.floor
    }

    pub fn num_left(&self) -> usize {
        self.mate_l.len()
    }

    pub fn num_right(&self) -> usize {
        self.mate_r.len()
    }

    pub fn num_edges(&self) -> usize {
        self.left_nbrs.iter().map(Vec::len).sum()
    }

    pub fn weight(&self, l: usize) -> Level {
        self.weight[l]
    }

    pub fn virtual_weight(&self, l: usize) -> Level {
        self.virtual_weight[l]
    }

    pub fn mate(&self, l: usize) -> Option<usize> {
        self.mate_l[l].map(|r| r as usize)
    }

    pub fn mate_of_right(&self, r: usize) -> Option<usize> {
        self.mate_r[r].map(|l| l as usize)
    }

    pub fn is_matched(&self, l: usize) -> bool {
        self.mate_l[l].is_some()
    }

    pub fn is_frozen(&self, l: usize) -> bool {
        self.frozen[l]
    }

    pub fn matched_left(&self) -> Vec<ElementId> {
        (0..self.num_left()).filter(|&l| self.is_matched(l)).map(ElementId::new).collect()
    }

    pub fn matching_size(&self) -> usize {
        self.mate_l.iter().filter(|m| m.is_some()).count()
    }

    /// Positions scanned by right vertices plus the bookkeeping of the
    /// unmatched-neighbour lists.
    pub fn scans(&self) -> u64 {
        self.scans + self.bookkeeping
    }

    pub fn pointer_scans(&self) -> u64 {
        self.scans
    }

    pub fn level_value(&self, level: Level) -> f64 {
        level.map_or(0.0, |j| (1.0 + self.epsilon).powi(j))
    }

    pub fn matching_weight(&self) -> f64 {
        (0..self.num_left()).filter(|&l| self.is_matched(l)).map(|l| self.level_value(self.weight[l])).sum()
    }

    fn note(&mut self, l: usize) {
        if !self.touched.iter().any(|&(x, _)| x as usize == l) {
            self.touched.push((l as u32, self.mate_l[l].is_some()));
        }
    }

    /// Updates the unmatched-neighbour lists after `l` changes status.
    fn set_status(&mut self, l: usize, matched: bool) {
        self.note(l);
        self.bookkeeping += self.left_nbrs[l].len() as u64;
        for &(r, pos) in &self.left_nbrs[l] {
            let (r, pos) = (r as usize, pos as usize);
            if matched {
                let slot = self.free_slot[r][pos] as usize;
                self.free_list[r].swap_remove(slot);
                if let Some(&moved) = self.free_list[r].get(slot) {
                    self.free_slot[r][moved as usize] = slot as u32;
                }
                self.free_slot[r][pos] = NONE;
            } else {
                self.free_slot[r][pos] = self.free_list[r].len() as u32;
                self.free_list[r].push(pos as u32);
            }
        }
    }

    fn pair(&mut self, l: usize, r: usize, via_fallback: bool) {
        let was_free = self.mate_l[l].is_none();
        if was_free {
            self.set_status(l, true);
        }
        self.mate_l[l] = Some(r as u32);
        self.mate_r[r] = Some(l as u32);
        self.fallback[l] = via_fallback;
    }

    fn unpair(&mut self, l: usize) {
        self.note(l);
        if let Some(r) = self.mate_l[l].take() {
            self.mate_r[r as usize] = None;
            self.fallback[l] = false;
            self.set_status(l, false);
        }
    }

    /// Finds a partner for the unmatched right vertex `r`, following the chain
    /// of displaced right vertices until it ends.
    pub fn match_r(&mut self, r: usize) -> Result<()> {
        if r >= self.num_right() {
            return Err(invalid(format!("unknown right vertex {r}")));
        }
        if self.mate_r[r].is_some() {
            return Err(precondition(format!("right vertex {r} is already matched")));
        }
        self.match_chain(r);
        self.touched.clear();
        Ok(())
    }

    fn match_chain(&mut self, start: usize) {
        let mut next = Some(start);
        while let Some(r) = next.take() {
            let mut displaced: Option<usize> = None;
            'levels: while self.scan_level[r] >= self.floor && displaced.is_none() {
                while self.pointer[r] < self.right_nbrs[r].len() && displaced.is_none() {
                    let l = self.right_nbrs[r][self.pointer[r]] as usize;
                    self.pointer[r] += 1;
                    self.scans += 1;
                    if self.virtual_weight[l] >= Some(self.scan_level[r]) {
                        self.virtual_weight[l] = lower(self.virtual_weight[l]);
                        match self.mate_l[l] {
                            Some(prev) => {
                                let prev = prev as usize;
                                self.mate_r[prev] = None;
                                self.pair(l, r, false);
                                displaced = Some(prev);
                            }
                            None => {
                                self.pair(l, r, false);
                                break 'levels;
                            }
                        }
                    }
                }
                if self.pointer[r] == self.right_nbrs[r].len() {
                    self.scan_level[r] -= 1;
                    self.pointer[r] = 0;
                }
            }
            if self.mate_r[r].is_none() {
                if let Some(&pos) = self.free_list[r].first() {
                    self.bookkeeping += 1;
                    let l = self.right_nbrs[r][pos as usize] as usize;
                    self.pair(l, r, true);
                }
            }
            next = displaced;
        }
    }

    fn take_changes(&mut self) -> OracleChanges {
        let mut changes = OracleChanges::default();
        for (l, before) in self.touched.drain(..) {
            let now = self.mate_l[l as usize].is_some();
            match (before, now) {
                (false, true) => changes.added.push(ElementId(l)),
                (true, false) => changes.removed.push(ElementId(l)),
                _ => {}
            }
        }
        changes
    }

    /// Lowers the weight of `l` to `w` and repairs the matching. Only `l`
    /// itself can lose its partner.
    pub fn decrement(&mut self, l: usize, w: Level) -> Result<OracleChanges> {
        if l >= self.num_left() {
            return Err(Error::UnknownElement(l));
        }
        if self.frozen[l] {
            return Err(precondition(format!("left vertex {l} is frozen")));
        }
        let w = match w {
            Some(j) if j < self.floor => None,
            other => other,
        };
        if w >= self.weight[l] {
            return Err(invalid(format!("weight level {w:?} does not lower {:?}", self.weight[l])));
        }
        self.touched.clear();
        self.weight[l] = w;
        match self.mate_l[l] {
            None => self.virtual_weight[l] = w,
            // still one level below its weight: the match stays valid
            Some(_) if self.virtual_weight[l] < w => {}
            Some(r) => {
                self.virtual_weight[l] = self.virtual_weight[l].min(w);
                self.unpair(l);
                self.match_chain(r as usize);
            }
        }
        if self.mate_l[l].is_none() {
            // keep the matching maximal: an unmatched right neighbour has
            // finished all its levels, so it can only take a zero-weight vertex
            self.bookkeeping += self.left_nbrs[l].len() as u64;
            let free_r = self.left_nbrs[l].iter().map(|&(r, _)| r as usize).find(|&r| self.mate_r[r].is_none());
            if let Some(r) = free_r {
                debug_assert!(self.virtual_weight[l].map_or(true, |j| j < self.floor));
                self.pair(l, r, true);
            }
        }
        Ok(self.take_changes())
    }

    pub fn freeze(&mut self, l: usize) -> Result<()> {
        if l >= self.num_left() {
            return Err(Error::UnknownElement(l));
        }
        if self.mate_l[l].is_none() {
            return Err(precondition(format!("left vertex {l} is unmatched")));
        }
        self.frozen[l] = true;
        Ok(())
    }

    /// Checks both virtual-weight invariants, maximality and that frozen
    /// vertices are matched.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        for l in 0..self.num_left() {
            let (w, vw) = (self.weight[l], self.virtual_weight[l]);
            match self.mate_l[l] {
                None if vw != w => return Err(format!("unmatched left {l} has vw {vw:?} != w {w:?}")),
                Some(_) if self.fallback[l] && (w.is_some() || vw.is_some()) => {
                    return Err(format!("fallback-matched left {l} has nonzero weight"))
                }
                Some(_) if !self.fallback[l] && !(vw < w && vw <= lower(w)) => {
                    return Err(format!("matched left {l} has vw {vw:?} not below w {w:?}"))
                }
                _ => {}
            }
            if self.frozen[l] && self.mate_l[l].is_none() {
                return Err(format!("frozen left {l} is unmatched"));
            }
        }
        for r in 0..self.num_right() {
            if let Some(l) = self.mate_r[r] {
                if self.mate_l[l as usize] != Some(r as u32) {
                    return Err(format!("mate arrays disagree at right {r}"));
                }
                if let Some(j) = self.virtual_weight[l as usize] {
                    for &other in &self.right_nbrs[r] {
                        if other != l && self.virtual_weight[other as usize] > Some(j + 1) {
                            return Err(format!("right {r} holds level {j} but neighbour {other} is higher"));
                        }
                    }
                }
            } else {
                for &l in &self.right_nbrs[r] {
                    if self.mate_l[l as usize].is_none() {
                        return Err(format!("edge ({l}, {r}) has both endpoints unmatched"));
                    }
                }
            }
        }
        Ok(())
    }
}

/// The L-stable matching as a weight-class oracle: class `j` becomes level
/// `deepest - j`, where `1 + eps'` is the reciprocal of the class ratio, and
/// the bottom class becomes weight zero.
#[derive(Debug, Clone)]
pub struct TransversalOracle {
    inner: LStableMatching,
    classifier: WeightClassifier,
    class: Vec<usize>,
    deepest: Option<usize>,
    weight_sum: f64,
}

impl TransversalOracle {
    pub fn new(matroid: &TransversalMatroid, classifier: WeightClassifier, classes: &[usize]) -> Result<Self> {
        if classes.len() != matroid.n() {
            return Err(invalid(format!("{} classes for {} elements", classes.len(), matroid.n())));
        }
        let eps = classifier.epsilon() / (1.0 - classifier.epsilon());
        let deepest = classifier.deepest_live_class();
        let levels = classes.iter().map(|&j| Self::level_of(deepest, j)).collect();
        let top = deepest.map_or(0, |d| d as i32);
        let inner = LStableMatching::new(matroid.num_right(), matroid.adjacency(), levels, eps, top)?;
        let mut o = TransversalOracle { inner, classifier, class: classes.to_vec(), deepest, weight_sum: 0.0 };
        o.weight_sum = o.recompute_weight()?;
        Ok(o)
    }

    fn level_of(deepest: Option<usize>, class: usize) -> Level {
        match deepest {
            Some(d) if class <= d => Some((d - class) as i32),
            _ => None,
        }
    }

    fn recompute_weight(&self) -> Result<f64> {
        let mut total = 0.0;
        for l in 0..self.inner.num_left() {
            if self.inner.is_matched(l) {
                total += self.classifier.class_value(self.class[l])?;
            }
        }
        Ok(total)
    }

    pub fn matching(&self) -> &LStableMatching {
        &self.inner
    }
}

impl MaxWeightOracle for TransversalOracle {
    fn decrement(&mut self, e: ElementId, class: usize) -> Result<OracleChanges> {
        let l = e.index();
        if l >= self.class.len() {
            return Err(Error::UnknownElement(l));
        }
        if class <= self.class[l] {
            return Err(invalid(format!("class {class} does not lower {e} from class {}", self.class[l])));
        }
        let old_value = self.classifier.class_value(self.class[l])?;
        let new_value = self.classifier.class_value(class)?;
        let level = Self::level_of(self.deepest, class);
        let was_matched = self.inner.is_matched(l);
        let changes = if level < self.inner.weight(l) {
            self.inner.decrement(l, level)?
        } else {
            if self.inner.is_frozen(l) {
                return Err(precondition(format!("{e} is frozen")));
            }
            OracleChanges::default()
        };
        self.class[l] = class;
        if was_matched {
            self.weight_sum -= old_value;
        }
        for &a in &changes.added {
            if a != e {
                self.weight_sum += self.classifier.class_value(self.class[a.index()])?;
            }
        }
        for &x in &changes.removed {
            if x != e {
                self.weight_sum -= self.classifier.class_value(self.class[x.index()])?;
            }
        }
        if self.inner.is_matched(l) {
            self.weight_sum += new_value;
        }
        Ok(changes)
    }

    fn freeze(&mut self, e: ElementId) -> Result<OracleChanges> {
        if e.index() >= self.class.len() {
            return Err(Error::UnknownElement(e.index()));
        }
        self.inner.freeze(e.index())?;
        Ok(OracleChanges::default())
    }

    fn approx_base_weight(&self) -> f64 {
        self.weight_sum
    }

    fn current(&self) -> Vec<ElementId> {
        self.inner.matched_left()
    }

    fn contains(&self, e: ElementId) -> bool {
        e.index() < self.class.len() && self.inner.is_matched(e.index())
    }

    fn structural_ops(&self) -> u64 {
        self.inner.scans()
    }
}
