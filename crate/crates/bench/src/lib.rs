//! Shared helpers for the criterion benches.

use std::sync::Arc;

use planarsucc_core::encoding::DynamicEncoding;
use planarsucc_core::graph::{generate_planar, LabeledGraph};
use planarsucc_core::microtable::MicroTable;
use planarsucc_core::partition::PartitionConfig;

pub fn config(r: u32, r_prime: u32) -> PartitionConfig {
    PartitionConfig {
        r,
        r_prime,
        size_cap_multiplier: 2,
    }
}

pub fn table(r_prime: u32) -> Arc<MicroTable> {
    Arc::new(MicroTable::build(r_prime).unwrap())
}

pub fn build(n: u32, seed: u64, cfg: &PartitionConfig, table: Arc<MicroTable>, hashing: bool) -> DynamicEncoding {
    let g = graph(n, seed);
    DynamicEncoding::build(&g, cfg, table, hashing).unwrap().0
}

pub fn graph(n: u32, seed: u64) -> LabeledGraph {
    generate_planar(n, seed)
}
