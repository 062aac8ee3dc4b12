//! Fully dynamic approximate maximum matching in bipartite graphs.
//!
//! The pipeline processes every edge update of the input graph in three
//! layers:
//!
//! 1. an [`orientation`] assigns each edge to one endpoint with small load;
//! 2. an edge-degree constrained subgraph `H` is repaired along short
//!    alternating paths ([`edcs_general`] for arbitrary graphs,
//!    [`edcs_weighted`] for graphs of small arboricity);
//! 3. a [`matching`] of the bounded-degree subgraph `H` is maintained.
//!
//! [`oracle`] holds the independent ground truth used to check all of it.

pub mod edcs_general;
pub mod edcs_weighted;
pub mod exec;
pub mod graph;
pub mod matching;
pub mod oracle;
pub mod orientation;
pub mod path;
pub mod ring;

use std::collections::hash_map::DefaultHasher;
use std::collections::{HashMap, HashSet};
use std::hash::BuildHasherDefault;

/// Hash map with a fixed-key hasher, so iteration order depends only on the
/// sequence of operations and runs are reproducible.
pub type DetHashMap<K, V> = HashMap<K, V, BuildHasherDefault<DefaultHasher>>;
pub type DetHashSet<T> = HashSet<T, BuildHasherDefault<DefaultHasher>>;

pub use edcs_general::{GeneralEdcs, GeneralParams, RangeLabel};
pub use edcs_weighted::WeightedEdcs;
pub use graph::{DynBipartiteGraph, Edge, GraphError, Side, VertexId, VertexSpace};
pub use matching::MaintainedMatching;
pub use orientation::{FlipEvent, OrientOutcome, OrientationError, OrientationState, Scheme};
pub use path::{AlternatingPath, EdcsError, HChange, PathStep};
