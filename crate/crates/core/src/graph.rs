//! Labeled simple-graph container used as the correctness oracle, plus
//! planar test-input generation and the edge-list / script file formats.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Mutable simple graph over integer labels. Adjacency is kept symmetric and
/// loop-free by construction; all mutations preserve simplicity.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LabeledGraph {
    adj: BTreeMap<u32, BTreeSet<u32>>,
}

impl LabeledGraph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Graph on labels `0..n` with no edges.
    pub fn with_vertices(n: u32) -> Self {
        let mut g = Self::new();
        for v in 0..n {
            g.add_vertex(v);
        }
        g
    }

    pub fn add_vertex(&mut self, v: u32) {
        self.adj.entry(v).or_default();
    }

    pub fn add_edge(&mut self, u: u32, v: u32) -> Result<()> {
        if u == v {
            return Err(Error::SameVertex(u));
        }
        self.add_vertex(u);
        self.add_vertex(v);
        if !self.adj.get_mut(&u).unwrap().insert(v) {
            return Err(Error::EdgeExists(u, v));
        }
        self.adj.get_mut(&v).unwrap().insert(u);
        Ok(())
    }

    pub fn has_vertex(&self, v: u32) -> bool {
        self.adj.contains_key(&v)
    }

    pub fn has_edge(&self, u: u32, v: u32) -> bool {
        self.adj.get(&u).map_or(false, |s| s.contains(&v))
    }

    pub fn vertex_count(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.values().map(|s| s.len()).sum::<usize>() / 2
    }

    pub fn vertices(&self) -> impl Iterator<Item = u32> + '_ {
        self.adj.keys().copied()
    }

    pub fn neighbors(&self, u: u32) -> Result<impl Iterator<Item = u32> + '_> {
        self.adj
            .get(&u)
            .map(|s| s.iter().copied())
            .ok_or(Error::UnknownVertex(u))
    }

    pub fn degree(&self, u: u32) -> Result<usize> {
        self.adj.get(&u).map(|s| s.len()).ok_or(Error::UnknownVertex(u))
    }

    pub fn edges(&self) -> Vec<(u32, u32)> {
        let mut out = Vec::with_capacity(self.edge_count());
        for (&u, s) in &self.adj {
            for &v in s {
                if u < v {
                    out.push((u, v));
                }
            }
        }
        out
    }

    /// Contracts the edge `{u, v}`: v is merged to u, the result stays simple.
    /// Returns the surviving label (always `u`).
    pub fn contract(&mut self, u: u32, v: u32) -> Result<u32> {
        if !self.has_vertex(u) {
            return Err(Error::UnknownVertex(u));
        }
        if !self.has_vertex(v) {
            return Err(Error::UnknownVertex(v));
        }
        if !self.has_edge(u, v) {
            return Err(Error::NotAnEdge(u, v));
        }
        self.merge(u, v)
    }

    /// Merges v to u (no adjacency required): `N(u) := N(u) ∪ N(v) ∖ {u, v}`.
    pub fn merge(&mut self, u: u32, v: u32) -> Result<u32> {
        if u == v {
            return Err(Error::SameVertex(u));
        }
        if !self.has_vertex(u) {
            return Err(Error::UnknownVertex(u));
        }
        let nv = self.adj.remove(&v).ok_or(Error::UnknownVertex(v))?;
        for x in nv {
            self.adj.get_mut(&x).unwrap().remove(&v);
            if x != u {
                self.adj.get_mut(&x).unwrap().insert(u);
                self.adj.get_mut(&u).unwrap().insert(x);
            }
        }
        self.adj.get_mut(&u).unwrap().remove(&v);
        Ok(u)
    }

    pub fn delete_vertex(&mut self, u: u32) -> Result<()> {
        let nu = self.adj.remove(&u).ok_or(Error::UnknownVertex(u))?;
        for x in nu {
            self.adj.get_mut(&x).unwrap().remove(&u);
        }
        Ok(())
    }

    pub fn delete_edge(&mut self, u: u32, v: u32) -> Result<()> {
        if !self.has_vertex(u) {
            return Err(Error::UnknownVertex(u));
        }
        if !self.has_vertex(v) {
            return Err(Error::UnknownVertex(v));
        }
        if !self.has_edge(u, v) {
            return Err(Error::NotAnEdge(u, v));
        }
        self.adj.get_mut(&u).unwrap().remove(&v);
        self.adj.get_mut(&v).unwrap().remove(&u);
        Ok(())
    }

    /// Connected components as sorted vertex lists, ordered by smallest member.
    pub fn components(&self) -> Vec<Vec<u32>> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for &start in self.adj.keys() {
            if seen.contains(&start) {
                continue;
            }
            let mut comp = Vec::new();
            let mut queue = vec![start];
            seen.insert(start);
            while let Some(x) = queue.pop() {
                comp.push(x);
                for &y in &self.adj[&x] {
                    if seen.insert(y) {
                        queue.push(y);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        self.components().len() <= 1
    }

    /// Adds a dummy vertex adjacent to the smallest label of every connected
    /// component and returns it. The dummy label is `max label + 1`.
    pub fn connect_components(&mut self) -> u32 {
        let dummy = self.adj.keys().next_back().map_or(0, |&m| m + 1);
        let reps: Vec<u32> = self.components().iter().map(|c| c[0]).collect();
        self.add_vertex(dummy);
        for r in reps {
            self.add_edge(dummy, r).expect("dummy edge is fresh");
        }
        dummy
    }

    /// Full-scan structural check used by tests: symmetry, no loops.
    pub fn check_simple_symmetric(&self) -> bool {
        for (&u, s) in &self.adj {
            for &v in s {
                if v == u {
                    return false;
                }
                if !self.has_edge(v, u) {
                    return false;
                }
            }
        }
        true
    }
}

/// Deterministic connected planar graph: random points in the unit square,
/// Delaunay triangulation, then seeded edge subsampling that keeps a spanning
/// tree.
pub fn generate_planar(n: u32, seed: u64) -> LabeledGraph {
    assert!(n >= 1, "generate_planar requires n >= 1");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = LabeledGraph::with_vertices(n);
    if n == 1 {
        return g;
    }
    if n == 2 {
        g.add_edge(0, 1).unwrap();
        return g;
    }
    let points: Vec<delaunator::Point> = (0..n)
        .map(|_| delaunator::Point {
            x: rng.gen::<f64>(),
            y: rng.gen::<f64>(),
        })
        .collect();
    let tri = delaunator::triangulate(&points);
    let mut edges = BTreeSet::new();
    for t in tri.triangles.chunks(3) {
        for k in 0..3 {
            let a = t[k] as u32;
            let b = t[(k + 1) % 3] as u32;
            edges.insert((a.min(b), a.max(b)));
        }
    }
    if edges.is_empty() {
        // degenerate point set; fall back to a path
        for v in 1..n {
            g.add_edge(v - 1, v).unwrap();
        }
        return g;
    }
    let mut edges: Vec<(u32, u32)> = edges.into_iter().collect();
    edges.shuffle(&mut rng);
    // spanning tree first, then keep a seeded fraction of the rest
    fn find(uf: &mut [u32], mut x: u32) -> u32 {
        while uf[x as usize] != x {
            uf[x as usize] = uf[uf[x as usize] as usize];
            x = uf[x as usize];
        }
        x
    }
    let mut uf: Vec<u32> = (0..n).collect();
    let mut extra = Vec::new();
    for &(a, b) in &edges {
        let ra = find(&mut uf, a);
        let rb = find(&mut uf, b);
        if ra != rb {
            uf[ra as usize] = rb;
            g.add_edge(a, b).unwrap();
        } else {
            extra.push((a, b));
        }
    }
    for (a, b) in extra {
        if rng.gen::<f64>() < 0.6 {
            g.add_edge(a, b).unwrap();
        }
    }
    g
}

/// One operation of a replayable script.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScriptOp {
    Contract(u32, u32),
    DeleteVertex(u32),
    DeleteEdge(u32, u32),
    Neighbors(u32),
    Degree(u32),
    Adjacent(u32, u32),
}

/// Ordered list of operations over non-negative integer labels.
pub type OpScript = Vec<ScriptOp>;

/// Parses the graph file format: `p <n> <m>` then `m` lines `e <u> <v>`
/// with 1-based labels. Returns a 0-based graph.
pub fn parse_graph(text: &str) -> Result<LabeledGraph> {
    let mut n: u32 = 0;
    let mut m: usize = 0;
    let mut seen_header = false;
    let mut g = LabeledGraph::new();
    let mut edges_read = 0usize;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let l = raw.trim();
        if l.is_empty() || l.starts_with('c') {
            continue;
        }
        let mut it = l.split_whitespace();
        match it.next() {
            Some("p") => {
                if seen_header {
                    return Err(Error::Parse {
                        line,
                        msg: "duplicate header".into(),
                    });
                }
                n = it.next().and_then(|s| s.parse().ok()).ok_or(Error::Parse {
                    line,
                    msg: "bad vertex count".into(),
                })?;
                m = it.next().and_then(|s| s.parse().ok()).ok_or(Error::Parse {
                    line,
                    msg: "bad edge count".into(),
                })?;
                seen_header = true;
                g = LabeledGraph::with_vertices(n);
            }
            Some("e") => {
                if !seen_header {
                    return Err(Error::Parse {
                        line,
                        msg: "edge before header".into(),
                    });
                }
                let u: u32 = it.next().and_then(|s| s.parse().ok()).ok_or(Error::Parse {
                    line,
                    msg: "bad endpoint".into(),
                })?;
                let v: u32 = it.next().and_then(|s| s.parse().ok()).ok_or(Error::Parse {
                    line,
                    msg: "bad endpoint".into(),
                })?;
                if u == v {
                    return Err(Error::Parse {
                        line,
                        msg: format!("self-loop e {u} {v}"),
                    });
                }
                if u < 1 || v < 1 || u > n || v > n {
                    return Err(Error::Parse {
                        line,
                        msg: format!("label out of range in e {u} {v}"),
                    });
                }
                g.add_edge(u - 1, v - 1).map_err(|_| Error::Parse {
                    line,
                    msg: format!("duplicate edge e {u} {v}"),
                })?;
                edges_read += 1;
            }
            Some(tok) => {
                return Err(Error::Parse {
                    line,
                    msg: format!("unknown record '{tok}'"),
                })
            }
            None => {}
        }
    }
    if !seen_header {
        return Err(Error::Parse {
            line: 1,
            msg: "missing p header".into(),
        });
    }
    if edges_read != m {
        return Err(Error::Parse {
            line: 0,
            msg: format!("header declares {m} edges, found {edges_read}"),
        });
    }
    Ok(g)
}

/// Writes the edge-list format; inverse of [`parse_graph`] up to ordering.
pub fn write_graph(g: &LabeledGraph) -> String {
    let n = g.vertices().max().map_or(0, |m| m + 1);
    let edges = g.edges();
    let mut out = String::new();
    let _ = writeln!(out, "p {} {}", n, edges.len());
    for (u, v) in edges {
        let _ = writeln!(out, "e {} {}", u + 1, v + 1);
    }
    out
}

/// Parses a script file: one op per line, 1-based labels.
pub fn parse_script(text: &str) -> Result<OpScript> {
    let mut ops = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let l = raw.trim();
        if l.is_empty() || l.starts_with('#') {
            continue;
        }
        let toks: Vec<&str> = l.split_whitespace().collect();
        let arg = |k: usize| -> Result<u32> {
            let v: u32 = toks
                .get(k)
                .and_then(|s| s.parse().ok())
                .ok_or(Error::Parse {
                    line,
                    msg: format!("bad argument in '{l}'"),
                })?;
            if v < 1 {
                return Err(Error::Parse {
                    line,
                    msg: "labels are 1-based".into(),
                });
            }
            Ok(v - 1)
        };
        let op = match toks[0] {
            "C" => ScriptOp::Contract(arg(1)?, arg(2)?),
            "DV" => ScriptOp::DeleteVertex(arg(1)?),
            "DE" => ScriptOp::DeleteEdge(arg(1)?, arg(2)?),
            "N" => ScriptOp::Neighbors(arg(1)?),
            "D" => ScriptOp::Degree(arg(1)?),
            "A" => ScriptOp::Adjacent(arg(1)?, arg(2)?),
            other => {
                return Err(Error::Parse {
                    line,
                    msg: format!("unknown op '{other}'"),
                })
            }
        };
        ops.push(op);
    }
    Ok(ops)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path3() -> LabeledGraph {
        let mut g = LabeledGraph::with_vertices(3);
        g.add_edge(0, 1).unwrap();
        g.add_edge(1, 2).unwrap();
        g
    }

    fn k(n: u32) -> LabeledGraph {
        let mut g = LabeledGraph::with_vertices(n);
        for u in 0..n {
            for v in u + 1..n {
                g.add_edge(u, v).unwrap();
            }
        }
        g
    }

    #[test]
    fn contract_path() {
        // path 1-2-3 (as 0-1-2), contract(0,1) -> vertices {0,2}, edge {0,2}
        let mut g = path3();
        let s = g.contract(0, 1).unwrap();
        assert_eq!(s, 0);
        assert_eq!(g.vertices().collect::<Vec<_>>(), vec![0, 2]);
        assert!(g.has_edge(0, 2));
        assert!(g.check_simple_symmetric());
    }

    #[test]
    fn contract_triangle_discards_parallel() {
        let mut g = k(3);
        g.contract(0, 1).unwrap();
        assert_eq!(g.edge_count(), 1);
        assert!(g.has_edge(0, 2));
    }

    #[test]
    fn contract_k4_gives_triangle() {
        // derived by brute-force union of neighborhoods
        let mut g = k(4);
        g.contract(0, 1).unwrap();
        assert_eq!(g.vertex_count(), 3);
        assert_eq!(g.edge_count(), 3);
        for (u, v) in [(0, 2), (0, 3), (2, 3)] {
            assert!(g.has_edge(u, v));
        }
    }

    #[test]
    fn contract_errors() {
        let mut g = path3();
        assert_eq!(g.contract(0, 2), Err(Error::NotAnEdge(0, 2)));
        assert_eq!(g.contract(0, 9), Err(Error::UnknownVertex(9)));
    }

    #[test]
    fn deletions() {
        let mut g = k(3);
        g.delete_vertex(2).unwrap();
        assert_eq!(g.edges(), vec![(0, 1)]);

        let mut g = k(3);
        g.delete_edge(0, 1).unwrap();
        assert!(g.has_edge(0, 2) && g.has_edge(1, 2) && !g.has_edge(0, 1));

        // star S4: deleting the center isolates the leaves
        let mut g = LabeledGraph::with_vertices(5);
        for v in 1..5 {
            g.add_edge(0, v).unwrap();
        }
        g.delete_vertex(0).unwrap();
        assert_eq!(g.edge_count(), 0);
        assert_eq!(g.vertex_count(), 4);
    }

    #[test]
    fn connect_components_rules() {
        // components {0,1},{2} -> dummy 3 with N(3)={0,2}
        let mut g = LabeledGraph::with_vertices(3);
        g.add_edge(0, 1).unwrap();
        let d = g.connect_components();
        assert_eq!(d, 3);
        assert_eq!(g.neighbors(3).unwrap().collect::<Vec<_>>(), vec![0, 2]);

        // connected graph: dummy adjacent to exactly one vertex
        let mut g = path3();
        let d = g.connect_components();
        assert_eq!(g.degree(d).unwrap(), 1);

        // empty-edge graph on 3 vertices: dummy adjacent to all
        let mut g = LabeledGraph::with_vertices(3);
        let d = g.connect_components();
        assert_eq!(g.degree(d).unwrap(), 3);
        assert!(g.is_connected());

        // the transform keeps the planar edge bound
        let mut g = generate_planar(50, 2);
        g.delete_vertex(10).unwrap();
        g.delete_vertex(30).unwrap();
        g.connect_components();
        let n = g.vertex_count();
        assert!(g.edge_count() <= 3 * n - 6);
        assert!(g.is_connected());
    }

    #[test]
    fn generate_planar_bounds() {
        let g = generate_planar(1, 0);
        assert_eq!(g.vertex_count(), 1);

        for seed in 0..5 {
            let g = generate_planar(4, seed);
            assert!(g.edge_count() <= 6);
            assert!(g.is_connected());
        }

        let g = generate_planar(1000, 42);
        assert!(g.edge_count() <= 2994);
        assert!(g.is_connected());
        assert!(g.check_simple_symmetric());

        // deterministic for a fixed seed
        assert_eq!(generate_planar(200, 9).edges(), generate_planar(200, 9).edges());
    }

    #[test]
    fn graph_file_roundtrip() {
        let g = parse_graph("p 3 2\ne 1 2\ne 2 3\n").unwrap();
        assert_eq!(g.edges(), vec![(0, 1), (1, 2)]);

        let g = k(4);
        let text = write_graph(&g);
        assert_eq!(parse_graph(&text).unwrap(), g);

        match parse_graph("p 2 1\ne 1 1\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn script_parsing() {
        let ops = parse_script("C 1 2\nDV 3\nDE 1 4\nN 1\nD 2\nA 1 3\n").unwrap();
        assert_eq!(
            ops,
            vec![
                ScriptOp::Contract(0, 1),
                ScriptOp::DeleteVertex(2),
                ScriptOp::DeleteEdge(0, 3),
                ScriptOp::Neighbors(0),
                ScriptOp::Degree(1),
                ScriptOp::Adjacent(0, 2),
            ]
        );
        assert!(parse_script("X 1\n").is_err());
    }
}
