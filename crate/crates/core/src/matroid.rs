//! The three supported matroid classes behind one type.

use serde::{Deserialize, Serialize};

use crate::classes::WeightClassifier;
use crate::element::ElementId;
use crate::error::Result;
use crate::graphic::{GraphicForestOracle, GraphicIncremental, GraphicMatroid};
use crate::laminar::{LaminarFamily, LaminarIncremental, LaminarOracle};
use crate::oracle::{IncrementalOracle, MaxWeightOracle};
use crate::transversal::{TransversalMatroid, TransversalOracle};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Matroid {
    Laminar(LaminarFamily),
    Graphic(GraphicMatroid),
    Transversal(TransversalMatroid),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatroidKind {
    Laminar,
    Graphic,
    Transversal,
}

impl MatroidKind {
    pub const ALL: [MatroidKind; 3] = [MatroidKind::Laminar, MatroidKind::Graphic, MatroidKind::Transversal];

    pub fn name(self) -> &'static str {
        match self {
            MatroidKind::Laminar => "laminar",
            MatroidKind::Graphic => "graphic",
            MatroidKind::Transversal => "transversal",
        }
    }
}

impl std::fmt::Display for MatroidKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for MatroidKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "laminar" => Ok(MatroidKind::Laminar),
            "graphic" => Ok(MatroidKind::Graphic),
            "transversal" => Ok(MatroidKind::Transversal),
            other => Err(format!("unknown matroid kind '{other}'")),
        }
    }
}

impl Matroid {
    pub fn kind(&self) -> MatroidKind {
        match self {
            Matroid::Laminar(_) => MatroidKind::Laminar,
            Matroid::Graphic(_) => MatroidKind::Graphic,
            Matroid::Transversal(_) => MatroidKind::Transversal,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Matroid::Laminar(m) => m.validate(),
            Matroid::Graphic(m) => m.validate(),
            Matroid::Transversal(m) => m.validate(),
        }
    }

    /// Ground-set size.
    pub fn n(&self) -> usize {
        match self {
            Matroid::Laminar(m) => m.n(),
            Matroid::Graphic(m) => m.n(),
            Matroid::Transversal(m) => m.n(),
        }
    }

    pub fn rank(&self) -> usize {
        match self {
            Matroid::Laminar(m) => m.rank(),
            Matroid::Graphic(m) => m.rank(),
            Matroid::Transversal(m) => m.rank(),
        }
    }

    pub fn is_independent(&self, set: &[ElementId]) -> bool {
        match self {
            Matroid::Laminar(m) => m.is_independent(set),
            Matroid::Graphic(m) => m.is_independent(set),
            Matroid::Transversal(m) => m.is_independent(set),
        }
    }

    /// Exact incremental independence oracle seeded with the independent set `seed`.
    pub fn incremental_oracle(&self, seed: &[ElementId]) -> Result<Box<dyn IncrementalOracle>> {
        Ok(match self {
            Matroid::Laminar(m) => Box::new(LaminarIncremental::new(m, seed)?),
            Matroid::Graphic(m) => Box::new(GraphicIncremental::new(m, seed)?),
            Matroid::Transversal(m) => Box::new(crate::transversal::TransversalIncremental::new(m, seed)?),
        })
    }

    /// Dynamic approximate maximum-weight oracle for the class, with initial
    /// weight classes `classes`.
    pub fn max_weight_oracle(
        &self,
        classifier: WeightClassifier,
        classes: &[usize],
    ) -> Result<Box<dyn MaxWeightOracle>> {
        Ok(match self {
            Matroid::Laminar(m) => Box::new(LaminarOracle::new(m, classifier, classes)?),
            Matroid::Graphic(m) => Box::new(GraphicForestOracle::new(m, classifier, classes)?),
            Matroid::Transversal(m) => Box::new(TransversalOracle::new(m, classifier, classes)?),
        })
    }
}
