//! Succinct encoding of unlabeled simple planar graphs under minor
//! operations: edge contraction, vertex deletion and (with hashing enabled)
//! edge deletion, with constant-time-per-element neighborhood and degree
//! queries, verified against a naive dynamic-graph oracle.

pub mod encoding;
pub mod error;
pub mod forbidden;
pub mod graph;
pub mod mappings;
pub mod microtable;
pub mod partition;
pub mod succinct;
pub mod verify;

pub use encoding::{DynamicEncoding, InvariantReport, Relabeling, SpaceReport};
pub use error::{Error, Result};
pub use forbidden::{ForbiddenGraph, MergeReport};
pub use graph::{generate_planar, parse_graph, parse_script, write_graph, LabeledGraph, OpScript, ScriptOp};
pub use microtable::{tiny_planarity, MicroGraphCode, MicroTable};
pub use partition::{build_rpartition, PartitionConfig, RPartition};
pub use succinct::{BitVector, CompactArray, IndexableDictionary};
