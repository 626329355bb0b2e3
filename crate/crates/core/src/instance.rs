//! Versioned problem instances and seeded random generators.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::graphic::GraphicMatroid;
use crate::laminar::LaminarFamily;
use crate::matroid::{Matroid, MatroidKind};
use crate::submodular::Objective;
use crate::transversal::TransversalMatroid;

pub const INSTANCE_VERSION: u32 = 1;

/// A matroid constraint together with the objective to maximize.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub version: u32,
    pub matroid: Matroid,
    pub objective: Objective,
}

impl Instance {
    pub fn new(matroid: Matroid, objective: Objective) -> Result<Self> {
        let inst = Instance { version: INSTANCE_VERSION, matroid, objective };
        inst.validate()?;
        Ok(inst)
    }

    pub fn validate(&self) -> Result<()> {
        if self.version != INSTANCE_VERSION {
            return Err(Error::Instance(format!("unsupported instance version {}", self.version)));
        }
        self.matroid.validate()?;
        self.objective.validate()?;
        if self.matroid.n() != self.objective.n() {
            return Err(Error::Instance(format!(
                "matroid has {} elements but the objective has {}",
                self.matroid.n(),
                self.objective.n()
            )));
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.matroid.n()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let inst: Instance = serde_json::from_str(text).map_err(|e| Error::Instance(e.to_string()))?;
        inst.validate()?;
        Ok(inst)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instances always serialize")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjectiveKind {
    Coverage,
    Facility,
    Additive,
}

impl std::str::FromStr for ObjectiveKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "coverage" => Ok(ObjectiveKind::Coverage),
            "facility" => Ok(ObjectiveKind::Facility),
            "additive" => Ok(ObjectiveKind::Additive),
            other => Err(format!("unknown objective kind '{other}'")),
        }
    }
}

/// Knobs for `generate`. Shape knobs left at `None` get size-dependent defaults.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GenConfig {
    pub matroid: MatroidKind,
    pub objective: ObjectiveKind,
    pub n: usize,
    pub seed: u64,
    /// Laminar: maximum depth of the internal tree.
    pub tree_depth: usize,
    /// Laminar: maximum children per internal node.
    pub branching: usize,
    /// Graphic: average edges per vertex.
    pub density: f64,
    /// Transversal: right neighbours per element.
    pub degree: usize,
    /// Transversal: right side size; defaults to `n / 2`.
    pub num_right: Option<usize>,
    /// Coverage: universe size; defaults to `2n`.
    pub universe: Option<usize>,
}

impl GenConfig {
    pub fn new(matroid: MatroidKind, objective: ObjectiveKind, n: usize, seed: u64) -> Self {
        GenConfig {
            matroid,
            objective,
            n,
            seed,
            tree_depth: 3,
            branching: 3,
            density: 1.5,
            degree: 2,
            num_right: None,
            universe: None,
        }
    }
}

/// Deterministic random instance for the given configuration.
pub fn generate(config: &GenConfig) -> Result<Instance> {
    if config.n == 0 {
        return Err(invalid("instances need at least one element"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let matroid = match config.matroid {
        MatroidKind::Laminar => Matroid::Laminar(random_laminar(config.n, config.tree_depth, config.branching, &mut rng)?),
        MatroidKind::Graphic => Matroid::Graphic(random_graphic(config.n, config.density, &mut rng)?),
        MatroidKind::Transversal => {
            let right = config.num_right.unwrap_or((config.n / 2).max(1));
            Matroid::Transversal(random_transversal(config.n, right, config.degree, &mut rng)?)
        }
    };
    let objective = match config.objective {
        ObjectiveKind::Coverage => random_coverage(config.n, config.universe.unwrap_or(2 * config.n), &mut rng),
        ObjectiveKind::Facility => random_facility(config.n, config.n.max(2), &mut rng),
        ObjectiveKind::Additive => Objective::Additive { weights: (0..config.n).map(|_| rng.gen_range(0.0..10.0)).collect() },
    };
    Instance::new(matroid, objective)
}

/// Random laminar family: a random tree of internal nodes with elements
/// spread over them and capacities between 1 and the number of elements below.
pub fn random_laminar<R: Rng + ?Sized>(n: usize, depth: usize, branching: usize, rng: &mut R) -> Result<LaminarFamily> {
    if branching == 0 {
        return Err(invalid("branching must be positive"));
    }
    let target = rng.gen_range(1..=(n / 2).max(1));
    let mut parent = vec![None];
    let mut level = vec![0usize];
    let mut kids = vec![0usize];
    for _ in 1..target {
        let open: Vec<usize> = (0..parent.len()).filter(|&v| level[v] < depth && kids[v] < branching).collect();
        let Some(&p) = open.get(rng.gen_range(0..open.len().max(1))) else { break };
        parent.push(Some(p));
        level.push(level[p] + 1);
        kids[p] += 1;
        kids.push(0);
    }
    let nodes = parent.len();
    let element_node: Vec<usize> = (0..n).map(|_| rng.gen_range(0..nodes)).collect();
    let mut below = vec![0u32; nodes];
    for &v in &element_node {
        below[v] += 1;
    }
    // parents are created before children, so a reverse sweep accumulates counts
    for v in (1..nodes).rev() {
        let p = parent[v].expect("non-root node");
        below[p] += below[v];
    }
    let capacity = below.iter().map(|&b| rng.gen_range(1..=b.max(1))).collect();
    LaminarFamily::new(parent, capacity, element_node)
}

/// Random multigraph with `n` edges and no self-loops.
pub fn random_graphic<R: Rng + ?Sized>(n: usize, density: f64, rng: &mut R) -> Result<GraphicMatroid> {
    if !(density > 0.0) {
        return Err(invalid("density must be positive"));
    }
    let vertices = ((n as f64 / density).ceil() as usize + 1).max(2);
    let edges = (0..n)
        .map(|_| {
            let pair = sample(rng, vertices, 2);
            (pair.index(0) as u32, pair.index(1) as u32)
        })
        .collect();
    GraphicMatroid::new(vertices, edges)
}

/// Random bipartite graph: each element gets `degree` distinct right
/// neighbours (fewer if the right side is smaller).
pub fn random_transversal<R: Rng + ?Sized>(n: usize, num_right: usize, degree: usize, rng: &mut R) -> Result<TransversalMatroid> {
    if num_right == 0 || degree == 0 {
        return Err(invalid("transversal instances need right vertices and positive degree"));
    }
    let adjacency = (0..n)
        .map(|_| {
            let d = rng.gen_range(1..=degree.min(num_right));
            let mut nbrs: Vec<u32> = sample(rng, num_right, d).into_iter().map(|r| r as u32).collect();
            nbrs.sort_unstable();
            nbrs
        })
        .collect();
    TransversalMatroid::new(num_right, adjacency)
}

/// Weighted coverage: every element covers 1 to 4 random universe items.
pub fn random_coverage<R: Rng + ?Sized>(n: usize, universe: usize, rng: &mut R) -> Objective {
    let universe = universe.max(1);
    let universe_weights = (0..universe).map(|_| rng.gen_range(0.5..2.0)).collect();
    let sets = (0..n)
        .map(|_| {
            let k = rng.gen_range(1..=4usize.min(universe));
            let mut items: Vec<u32> = sample(rng, universe, k).into_iter().map(|u| u as u32).collect();
            items.sort_unstable();
            items
        })
        .collect();
    Objective::Coverage { universe_weights, sets }
}

/// Facility location with uniform random similarities.
pub fn random_facility<R: Rng + ?Sized>(n: usize, clients: usize, rng: &mut R) -> Objective {
    Objective::Facility { similarity: (0..n).map(|_| (0..clients).map(|_| rng.gen_range(0.0..1.0)).collect()).collect() }
}
