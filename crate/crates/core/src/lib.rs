//! Monotone submodular maximization under laminar, graphic and transversal
//! matroid constraints in near-linear time.
//!
//! The pipeline has two phases. A lazy sampling greedy phase freezes a small
//! partial solution using a dynamic approximate maximum-weight basis oracle
//! whose weights only decrease. A continuous greedy phase then builds a
//! fractional solution on the contracted matroid with descending thresholds,
//! and swap rounding turns it into an independent set.

pub mod classes;
pub mod element;
pub mod error;
pub mod graphic;
pub mod instance;
pub mod laminar;
pub mod matroid;
pub mod optimizer;
pub mod oracle;
pub mod reference;
pub mod rounding;
pub mod sampler;
pub mod submodular;
pub mod transversal;

pub use classes::WeightClassifier;
pub use element::{ElementId, WeightKey};
pub use error::{Error, Result};
pub use matroid::{Matroid, MatroidKind};
pub use optimizer::{run_pipeline, FractionalSolution, PipelineConfig, PipelineOutcome};
pub use oracle::{IncrementalOracle, MaxWeightOracle, OracleChanges};
pub use submodular::{FractionalPoint, Objective, ValueOracle};
