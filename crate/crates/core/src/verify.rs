//! Lockstep verification of the encoding against the naive oracle: random
//! legal operation sequences, sampled and periodic full comparisons, and
//! per-operation invariant scans.

use std::fmt::Write as _;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::encoding::DynamicEncoding;
use crate::error::Result;
use crate::graph::{generate_planar, LabeledGraph};
use crate::microtable::MicroTable;
use crate::partition::PartitionConfig;

#[derive(Debug, Clone)]
pub struct VerifyParams {
    pub n: u32,
    pub ops: usize,
    pub seed: u64,
    pub cfg: PartitionConfig,
    pub hashing: bool,
    pub check_every_op: bool,
    /// Per-call probe budget factor for the neighborhood operation.
    pub probe_factor: u64,
}

impl Default for VerifyParams {
    fn default() -> Self {
        VerifyParams {
            n: 100,
            ops: 300,
            seed: 0,
            cfg: PartitionConfig::default(),
            hashing: true,
            check_every_op: false,
            probe_factor: 16,
        }
    }
}

#[derive(Debug, Default, Clone)]
pub struct VerifyStats {
    pub ops_executed: usize,
    pub contractions: usize,
    pub vertex_deletions: usize,
    pub edge_deletions: usize,
    pub queries: usize,
    pub neighborhood_calls: u64,
    pub probe_budget_violations: u64,
    pub work: u64,
    pub invariant_scans: usize,
}

/// Runs the replay; `Err` carries a divergence transcript.
pub fn run_verify(p: &VerifyParams) -> std::result::Result<VerifyStats, String> {
    let table = Arc::new(MicroTable::build(p.cfg.r_prime).map_err(|e| e.to_string())?);
    run_verify_with_table(p, table)
}

pub fn run_verify_with_table(
    p: &VerifyParams,
    table: Arc<MicroTable>,
) -> std::result::Result<VerifyStats, String> {
    let g0 = generate_planar(p.n, p.seed);
    let (mut enc, relab) = DynamicEncoding::build(&g0, &p.cfg, table, p.hashing)
        .map_err(|e| format!("build failed: {e}"))?;
    let mut oracle = LabeledGraph::new();
    for v in g0.vertices() {
        oracle.add_vertex(relab.to_global[v as usize]);
    }
    for (a, b) in g0.edges() {
        oracle
            .add_edge(relab.to_global[a as usize], relab.to_global[b as usize])
            .unwrap();
    }
    let mut stats = VerifyStats::default();
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed.wrapping_mul(0x9e3779b97f4a7c15) + 1);

    compare_full(&enc, &oracle, &mut stats, p).map_err(|d| transcript("init", 0, &d))?;
    let rpt = enc.check_invariants(Some(&oracle));
    if !rpt.ok() {
        return Err(transcript("init", 0, &rpt.violations.join("; ")));
    }

    for step in 0..p.ops {
        let edges = oracle.edges();
        let verts: Vec<u32> = oracle.vertices().collect();
        if verts.is_empty() {
            break;
        }
        let roll: f64 = rng.gen();
        let op = if roll < 0.5 && !edges.is_empty() {
            let (a, b) = edges[rng.gen_range(0..edges.len())];
            let (a, b) = if rng.gen() { (a, b) } else { (b, a) };
            Op::Contract(a, b)
        } else if roll < 0.7 && verts.len() > 1 {
            Op::DeleteVertex(verts[rng.gen_range(0..verts.len())])
        } else if roll < 0.9 && p.hashing && !edges.is_empty() {
            let (a, b) = edges[rng.gen_range(0..edges.len())];
            Op::DeleteEdge(a, b)
        } else {
            Op::Query(verts[rng.gen_range(0..verts.len())])
        };
        let desc = match op {
            Op::Contract(a, b) => {
                let s = enc
                    .contract(a, b)
                    .map_err(|e| transcript("contract", step, &e.to_string()))?;
                let loser = if s == a { b } else { a };
                oracle.merge(s, loser).unwrap();
                stats.contractions += 1;
                format!("C {a} {b} -> {s}")
            }
            Op::DeleteVertex(v) => {
                enc.delete_vertex(v)
                    .map_err(|e| transcript("delete_vertex", step, &e.to_string()))?;
                oracle.delete_vertex(v).unwrap();
                stats.vertex_deletions += 1;
                format!("DV {v}")
            }
            Op::DeleteEdge(a, b) => {
                enc.delete_edge(a, b)
                    .map_err(|e| transcript("delete_edge", step, &e.to_string()))?;
                oracle.delete_edge(a, b).unwrap();
                stats.edge_deletions += 1;
                format!("DE {a} {b}")
            }
            Op::Query(v) => {
                let d = enc
                    .degree(v)
                    .map_err(|e| transcript("degree", step, &e.to_string()))?;
                if d as usize != oracle.degree(v).unwrap() {
                    return Err(transcript("degree", step, &format!("vertex {v}")));
                }
                stats.queries += 1;
                format!("D {v}")
            }
        };
        stats.ops_executed += 1;
        if std::env::var_os("VERIFY_TRACE").is_some() {
            eprintln!("step {step}: {desc}");
        }

        compare_sampled(&enc, &oracle, &mut rng, &mut stats, p)
            .map_err(|d| transcript(&desc, step, &d))?;
        if (step + 1) % 50 == 0 {
            compare_full(&enc, &oracle, &mut stats, p).map_err(|d| transcript(&desc, step, &d))?;
        }
        if p.check_every_op {
            let rpt = enc.check_invariants(Some(&oracle));
            stats.invariant_scans += 1;
            if !rpt.ok() {
                return Err(transcript(&desc, step, &rpt.violations.join("; ")));
            }
        }
    }
    if !p.check_every_op {
        let rpt = enc.check_invariants(Some(&oracle));
        stats.invariant_scans += 1;
        if !rpt.ok() {
            return Err(transcript("final", p.ops, &rpt.violations.join("; ")));
        }
    }
    compare_full(&enc, &oracle, &mut stats, p).map_err(|d| transcript("final", p.ops, &d))?;
    stats.work = enc.work();
    Ok(stats)
}

enum Op {
    Contract(u32, u32),
    DeleteVertex(u32),
    DeleteEdge(u32, u32),
    Query(u32),
}

fn transcript(op: &str, step: usize, detail: &str) -> String {
    format!("step {step} [{op}]: {detail}")
}

fn check_vertex(
    enc: &DynamicEncoding,
    oracle: &LabeledGraph,
    v: u32,
    stats: &mut VerifyStats,
    p: &VerifyParams,
) -> std::result::Result<(), String> {
    let before = enc.probes_taken();
    let mut got = enc.neighbors(v).map_err(|e| e.to_string())?;
    let probes = enc.probes_taken() - before;
    got.sort_unstable();
    let want: Vec<u32> = oracle.neighbors(v).unwrap().collect();
    if got != want {
        return Err(format!("vertex {v}: neighbors {got:?} != oracle {want:?}"));
    }
    stats.neighborhood_calls += 1;
    if probes > p.probe_factor * (want.len() as u64 + 1) {
        stats.probe_budget_violations += 1;
    }
    let d = enc.degree(v).map_err(|e| e.to_string())?;
    if d as usize != want.len() {
        return Err(format!("vertex {v}: degree {d} != {}", want.len()));
    }
    Ok(())
}

fn compare_sampled(
    enc: &DynamicEncoding,
    oracle: &LabeledGraph,
    rng: &mut ChaCha8Rng,
    stats: &mut VerifyStats,
    p: &VerifyParams,
) -> std::result::Result<(), String> {
    let verts: Vec<u32> = oracle.vertices().collect();
    if verts.is_empty() {
        return Ok(());
    }
    for _ in 0..32.min(verts.len()) {
        let v = verts[rng.gen_range(0..verts.len())];
        check_vertex(enc, oracle, v, stats, p)?;
    }
    if p.hashing && verts.len() >= 2 {
        for _ in 0..32 {
            let a = verts[rng.gen_range(0..verts.len())];
            let b = verts[rng.gen_range(0..verts.len())];
            if a == b {
                continue;
            }
            let got = enc.adjacent(a, b).map_err(|e| e.to_string())?;
            if got != oracle.has_edge(a, b) {
                return Err(format!("adjacency {a},{b}: encoding says {got}"));
            }
        }
    }
    Ok(())
}

fn compare_full(
    enc: &DynamicEncoding,
    oracle: &LabeledGraph,
    stats: &mut VerifyStats,
    p: &VerifyParams,
) -> std::result::Result<(), String> {
    let mut live = enc.live_vertices();
    live.sort_unstable();
    let mut ov: Vec<u32> = oracle.vertices().collect();
    ov.sort_unstable();
    if live != ov {
        return Err(format!(
            "live sets differ: encoding {} vs oracle {} vertices",
            live.len(),
            ov.len()
        ));
    }
    for v in ov {
        check_vertex(enc, oracle, v, stats, p)?;
    }
    Ok(())
}

/// Contracts the graph to a single vertex by repeatedly contracting an edge
/// at the current survivor. Returns (work, live vertices left).
pub fn contract_to_point(enc: &mut DynamicEncoding) -> Result<(u64, usize)> {
    let live = enc.live_vertices();
    if live.is_empty() {
        return Ok((enc.work(), 0));
    }
    let mut current = live[0];
    loop {
        let nb = enc.neighbors(current)?;
        match nb.first() {
            Some(&w) => current = enc.contract(current, w)?,
            None => break,
        }
    }
    // a connected input is now one vertex; stray isolated vertices (from a
    // disconnected input) fall to deletion, the only minor operation left
    let live = enc.live_vertices();
    for &v in &live {
        if v != current {
            enc.delete_vertex(v)?;
        }
    }
    Ok((enc.work(), enc.live_vertices().len()))
}

/// Deletes every edge, then every vertex, walking each vertex until it is
/// isolated. Returns the number of edge deletions.
pub fn delete_everything(enc: &mut DynamicEncoding) -> Result<usize> {
    let mut deleted = 0usize;
    for v in enc.live_vertices() {
        loop {
            let nb = enc.neighbors(v)?;
            match nb.first() {
                Some(&w) => {
                    enc.delete_edge(v, w)?;
                    deleted += 1;
                }
                None => break,
            }
        }
    }
    for v in enc.live_vertices() {
        enc.delete_vertex(v)?;
    }
    Ok(deleted)
}

/// Writes a short human-readable summary of verify stats.
pub fn format_stats(s: &VerifyStats) -> String {
    let mut out = String::new();
    let _ = write!(
        out,
        "ops={} (C {} / DV {} / DE {} / Q {}), neighborhood calls={}, probe violations={}, work={}",
        s.ops_executed,
        s.contractions,
        s.vertex_deletions,
        s.edge_deletions,
        s.queries,
        s.neighborhood_calls,
        s.probe_budget_violations,
        s.work
    );
    out
}
