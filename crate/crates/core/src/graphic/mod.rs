//! Graphic matroids: independent sets are forests.

mod oracle;
mod pairing_heap;
mod union_find;

pub use oracle::{GraphicForestOracle, GraphicIncremental};
pub use pairing_heap::PairingHeap;
pub use union_find::UnionFind;

use serde::{Deserialize, Serialize};

use crate::element::ElementId;
use crate::error::{Error, Result};

/// Undirected multigraph whose edges are the ground set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphicMatroid {
    num_vertices: usize,
    edges: Vec<(u32, u32)>,
}

impl GraphicMatroid {
    pub fn new(num_vertices: usize, edges: Vec<(u32, u32)>) -> Result<Self> {
        let g = GraphicMatroid { num_vertices, edges };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        for (i, &(u, v)) in self.edges.iter().enumerate() {
            if u as usize >= self.num_vertices || v as usize >= self.num_vertices {
                return Err(Error::Instance(format!("edge {i} = ({u}, {v}) has an endpoint out of range")));
            }
        }
        Ok(())
    }

    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    pub fn n(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    pub fn endpoints(&self, e: ElementId) -> (usize, usize) {
        let (u, v) = self.edges[e.index()];
        (u as usize, v as usize)
    }

    pub fn is_independent(&self, set: &[ElementId]) -> bool {
        let mut uf = UnionFind::new(self.num_vertices);
        set.iter().all(|&e| e.index() < self.n() && {
            let (u, v) = self.endpoints(e);
            uf.union(u, v).is_some()
        })
    }

    pub fn rank(&self) -> usize {
        let mut uf = UnionFind::new(self.num_vertices);
        self.edges.iter().filter(|&&(u, v)| uf.union(u as usize, v as usize).is_some()).count()
    }
}
