//! Laminar structures behind the generic oracle contracts.

use crate::classes::WeightClassifier;
use crate::element::ElementId;
use crate::error::{invalid, precondition, Error, Result};
use crate::oracle::{IncrementalOracle, MaxWeightOracle, OracleChanges};

use super::{LaminarFamily, LaminarStructure, TopTreeLaminar};

/// Exact maximum-weight basis under decrements and freezes. A decrement is a
/// deletion followed by a re-insertion at the lower weight; a freeze needs no
/// work because a frozen element is never decremented and so never leaves.
#[derive(Debug, Clone)]
pub struct LaminarOracle {
    family: LaminarFamily,
    classifier: WeightClassifier,
    tree: TopTreeLaminar,
    class: Vec<usize>,
    frozen: Vec<bool>,
}

impl LaminarOracle {
    pub fn new(family: &LaminarFamily, classifier: WeightClassifier, classes: &[usize]) -> Result<Self> {
        if classes.len() != family.n() {
            return Err(invalid(format!("{} classes for {} elements", classes.len(), family.n())));
        }
        let mut tree = TopTreeLaminar::new(family);
        for (i, &j) in classes.iter().enumerate() {
            let e = ElementId::new(i);
            tree.insert(e, family.element_node(e), classifier.class_value(j)?)?;
        }
        Ok(LaminarOracle {
            family: family.clone(),
            classifier,
            tree,
            class: classes.to_vec(),
            frozen: vec![false; family.n()],
        })
    }

    pub fn structure(&self) -> &TopTreeLaminar {
        &self.tree
    }

    fn check(&self, e: ElementId) -> Result<()> {
        if e.index() < self.class.len() {
            Ok(())
        } else {
            Err(Error::UnknownElement(e.index()))
        }
    }
}

impl MaxWeightOracle for LaminarOracle {
    fn decrement(&mut self, e: ElementId, class: usize) -> Result<OracleChanges> {
        self.check(e)?;
        if self.frozen[e.index()] {
            return Err(precondition(format!("{e} is frozen")));
        }
        if class <= self.class[e.index()] {
            return Err(invalid(format!("class {class} does not lower {e} from class {}", self.class[e.index()])));
        }
        let value = self.classifier.class_value(class)?;
        self.class[e.index()] = class;
        let mut changes = self.tree.delete(e)?;
        changes.merge(self.tree.insert(e, self.family.element_node(e), value)?);
        Ok(changes)
    }

    fn freeze(&mut self, e: ElementId) -> Result<OracleChanges> {
        self.check(e)?;
        if !self.tree.in_basis(e) {
            return Err(precondition(format!("{e} is not in the basis")));
        }
        self.frozen[e.index()] = true;
        Ok(OracleChanges::default())
    }

    fn approx_base_weight(&self) -> f64 {
        self.tree.base_weight()
    }

    fn current(&self) -> Vec<ElementId> {
        self.tree.basis()
    }

    fn contains(&self, e: ElementId) -> bool {
        self.tree.in_basis(e)
    }

    fn structural_ops(&self) -> u64 {
        self.tree.structural_ops()
    }
}

/// Growing independent set: an element fits when no node on its path to the
/// root is tight.
#[derive(Debug, Clone)]
pub struct LaminarIncremental {
    family: LaminarFamily,
    tree: TopTreeLaminar,
}

impl LaminarIncremental {
    pub fn new(family: &LaminarFamily, seed: &[ElementId]) -> Result<Self> {
        let mut inc = LaminarIncremental { family: family.clone(), tree: TopTreeLaminar::new(family) };
        for &e in seed {
            inc.insert(e)?;
        }
        Ok(inc)
    }
}

impl IncrementalOracle for LaminarIncremental {
    fn test(&mut self, e: ElementId) -> bool {
        if e.index() >= self.family.n() || self.tree.is_attached(e) {
            return false;
        }
        let node = self.family.element_node(e);
        matches!(self.tree.lowest_tight_constraint(node), Ok(None))
    }

    fn insert(&mut self, e: ElementId) -> Result<()> {
        if e.index() >= self.family.n() {
            return Err(Error::UnknownElement(e.index()));
        }
        if !self.test(e) {
            return Err(precondition(format!("{e} does not fit")));
        }
        self.tree.attach(e, self.family.element_node(e), 1.0, true)
    }

    fn members(&self) -> Vec<ElementId> {
        self.tree.basis()
    }
}
