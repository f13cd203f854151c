//! Behavioral examples for the assembled encoding: construction shapes,
//! the surviving-label rule, deletions, masking of the connectivity dummy,
//! and fault detection in the invariant scan.

use std::sync::Arc;

use planarsucc_core::encoding::DynamicEncoding;
use planarsucc_core::graph::{generate_planar, LabeledGraph};
use planarsucc_core::microtable::MicroTable;
use planarsucc_core::partition::PartitionConfig;
use planarsucc_core::Error;

fn table() -> Arc<MicroTable> {
    Arc::new(MicroTable::build(4).unwrap())
}

fn cfg(r: u32, rp: u32) -> PartitionConfig {
    PartitionConfig {
        r,
        r_prime: rp,
        size_cap_multiplier: 2,
    }
}

fn complete(n: u32) -> LabeledGraph {
    let mut g = LabeledGraph::with_vertices(n);
    for u in 0..n {
        for v in u + 1..n {
            g.add_edge(u, v).unwrap();
        }
    }
    g
}

fn path(n: u32) -> LabeledGraph {
    let mut g = LabeledGraph::with_vertices(n);
    for v in 1..n {
        g.add_edge(v - 1, v).unwrap();
    }
    g
}

#[test]
fn k4_single_piece_no_boundary() {
    let (enc, _) = DynamicEncoding::build(&complete(4), &cfg(64, 4), table(), false).unwrap();
    let rep = enc.space_report();
    assert_eq!(rep.piece_count, 1);
    assert_eq!(rep.boundary_count, 0);
    assert_eq!(rep.micro_count, 1);
    for v in 0..4 {
        assert_eq!(enc.degree(v).unwrap(), 3);
        assert_eq!(enc.neighbors(v).unwrap().len(), 3);
    }
    assert!(enc.check_invariants(None).ok());
}

#[test]
fn single_piece_path_contract() {
    // path 1-2-3 as 0-1-2: contracting (1,2) leaves neighbors(1) = {0}
    let (mut enc, relab) = DynamicEncoding::build(&path(3), &cfg(64, 4), table(), false).unwrap();
    let g = |x: u32| relab.to_global[x as usize];
    let s = enc.contract(g(1), g(2)).unwrap();
    assert_eq!(s, g(1));
    assert_eq!(enc.neighbors(g(1)).unwrap(), vec![g(0)]);
    assert_eq!(enc.degree(g(1)).unwrap(), 1);
}

#[test]
fn k4_contract_survivor_degree() {
    let (mut enc, relab) = DynamicEncoding::build(&complete(4), &cfg(64, 4), table(), false).unwrap();
    let g = |x: u32| relab.to_global[x as usize];
    let s = enc.contract(g(0), g(1)).unwrap();
    assert_eq!(enc.degree(s).unwrap(), 2);
    assert!(enc.check_invariants(None).ok());
}

#[test]
fn boundary_endpoint_survives() {
    // force multiple pieces; a contraction between a boundary vertex and a
    // plain neighbor must keep the boundary label
    let (mut enc, _) = DynamicEncoding::build(&path(100), &cfg(8, 4), table(), false).unwrap();
    let rep = enc.space_report();
    assert!(rep.boundary_count > 0, "need pieces for this test");
    let gb_off = 100 - rep.boundary_count;
    let b = gb_off; // smallest boundary global label
    let plain_nb = enc
        .neighbors(b)
        .unwrap()
        .into_iter()
        .find(|&x| x < gb_off)
        .expect("boundary vertex with a plain neighbor");
    let s = enc.contract(plain_nb, b).unwrap();
    assert_eq!(s, b, "the boundary endpoint survives");
    assert!(enc.check_invariants(None).ok());
}

#[test]
fn contract_errors() {
    let (mut enc, relab) = DynamicEncoding::build(&path(3), &cfg(64, 4), table(), false).unwrap();
    let g = |x: u32| relab.to_global[x as usize];
    assert_eq!(enc.contract(g(0), g(2)), Err(Error::NotAnEdge(g(0), g(2))));
    assert_eq!(enc.contract(g(0), 99), Err(Error::UnknownVertex(99)));
    enc.delete_vertex(g(2)).unwrap();
    assert_eq!(enc.contract(g(1), g(2)), Err(Error::Deleted(g(2))));
}

#[test]
fn deletions_and_flags() {
    let (mut enc, relab) = DynamicEncoding::build(&complete(3), &cfg(64, 4), table(), false).unwrap();
    let g = |x: u32| relab.to_global[x as usize];
    enc.delete_vertex(g(2)).unwrap();
    assert_eq!(enc.neighbors(g(0)).unwrap(), vec![g(1)]);
    assert_eq!(enc.degree(g(0)).unwrap(), 1);
    assert_eq!(enc.neighbors(g(2)), Err(Error::Deleted(g(2))));
    assert_eq!(enc.live_vertices().len(), 2);
    assert!(enc.check_invariants(None).ok());
}

#[test]
fn hashing_mode_gates_and_answers() {
    let (enc, relab) = DynamicEncoding::build(&complete(3), &cfg(64, 4), table(), false).unwrap();
    let g = |x: u32| relab.to_global[x as usize];
    assert_eq!(enc.adjacent(g(0), g(1)), Err(Error::HashingRequired));

    let (mut enc, relab) = DynamicEncoding::build(&complete(3), &cfg(64, 4), table(), true).unwrap();
    let g = |x: u32| relab.to_global[x as usize];
    assert!(enc.adjacent(g(0), g(1)).unwrap());
    enc.delete_edge(g(0), g(1)).unwrap();
    assert!(!enc.adjacent(g(0), g(1)).unwrap());
    assert_eq!(enc.degree(g(0)).unwrap(), 1);
    // K3 minus one edge is the path 0-2-1
    let mut nb = enc.neighbors(g(2)).unwrap();
    nb.sort_unstable();
    let mut want = vec![g(0), g(1)];
    want.sort_unstable();
    assert_eq!(nb, want);
}

#[test]
fn cross_piece_adjacency() {
    let g = generate_planar(100, 3);
    let (enc, relab) = DynamicEncoding::build(&g, &cfg(8, 4), table(), true).unwrap();
    for a in 0..100u32 {
        for b in a + 1..100 {
            let ga = relab.to_global[a as usize];
            let gb = relab.to_global[b as usize];
            assert_eq!(enc.adjacent(ga, gb).unwrap(), g.has_edge(a, b), "{a},{b}");
        }
    }
}

#[test]
fn disconnected_input_masks_dummy() {
    let mut g = LabeledGraph::with_vertices(6);
    g.add_edge(0, 1).unwrap();
    g.add_edge(2, 3).unwrap();
    g.add_edge(4, 5).unwrap();
    let (mut enc, relab) = DynamicEncoding::build(&g, &cfg(64, 4), table(), true).unwrap();
    let vd = enc.dummy_label().expect("dummy for disconnected input");
    let gl = |x: u32| relab.to_global[x as usize];
    assert_eq!(enc.live_vertices().len(), 6);
    for x in 0..6 {
        let nb = enc.neighbors(gl(x)).unwrap();
        assert!(!nb.contains(&vd), "dummy leaked into a neighborhood");
        assert_eq!(nb.len(), 1);
        assert_eq!(enc.degree(gl(x)).unwrap(), 1);
    }
    assert_eq!(enc.neighbors(vd), Err(Error::UnknownVertex(vd)));
    assert_eq!(enc.contract(gl(0), vd), Err(Error::UnknownVertex(vd)));
    // contracting a component to a point keeps the dummy hidden
    let s = enc.contract(gl(0), gl(1)).unwrap();
    assert_eq!(enc.degree(s).unwrap(), 0);
    assert!(enc.check_invariants(None).ok());
}

#[test]
fn phi_lists_pieces_of_boundary_vertices() {
    let (enc, _) = DynamicEncoding::build(&path(100), &cfg(8, 4), table(), false).unwrap();
    let rep = enc.space_report();
    let gb_off = 100 - rep.boundary_count;
    // a path boundary vertex joins exactly two pieces
    let entries = enc.phi(gb_off).unwrap();
    assert_eq!(entries.len(), 2);
    // plain vertices have no dynamic duplicate list
    assert_eq!(enc.phi(0), Err(Error::NotBoundary(0)));
}

#[test]
fn fault_injection_is_detected() {
    let g = generate_planar(200, 1);
    let (mut enc, _) = DynamicEncoding::build(&g, &cfg(16, 4), table(), false).unwrap();
    assert!(enc.check_invariants(None).ok());
    enc.debug_corrupt_degree();
    let rpt = enc.check_invariants(None);
    assert!(!rpt.ok(), "corrupted degree entry must be reported");
}

#[test]
fn full_contraction_matches_oracle_stepwise() {
    let g = generate_planar(500, 2);
    let (mut enc, relab) = DynamicEncoding::build(&g, &cfg(24, 4), table(), false).unwrap();
    let mut oracle = LabeledGraph::new();
    for v in g.vertices() {
        oracle.add_vertex(relab.to_global[v as usize]);
    }
    for (a, b) in g.edges() {
        oracle
            .add_edge(relab.to_global[a as usize], relab.to_global[b as usize])
            .unwrap();
    }
    let mut current = enc.live_vertices()[0];
    let mut step = 0usize;
    loop {
        let nb = enc.neighbors(current).unwrap();
        let Some(&w) = nb.first() else { break };
        let prev = current;
        current = enc.contract(prev, w).unwrap();
        let loser = if current == prev { w } else { prev };
        oracle.merge(current, loser).unwrap();
        step += 1;
        if step % 25 == 0 {
            let mut got = enc.neighbors(current).unwrap();
            got.sort_unstable();
            let want: Vec<u32> = oracle.neighbors(current).unwrap().collect();
            assert_eq!(got, want, "step {step}");
        }
    }
    assert_eq!(enc.live_vertices().len(), 1);
    assert_eq!(oracle.vertex_count(), 1);
    assert!(enc.check_invariants(Some(&oracle)).ok());
}