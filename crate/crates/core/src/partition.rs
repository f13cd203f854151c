//! r-partitions of planar graphs: recursive BFS-level separator bisection,
//! the standalone edge-disjoint partition, and the two-level decomposition
//! (mini pieces, micro pieces, routed boundary edges) that the dynamic
//! encoding is built from.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::graph::LabeledGraph;

/// Build parameters. `r` sizes the outer pieces, `r_prime` the micro pieces
/// (hard cap, table-encodable); pieces may hold up to `size_cap_multiplier
/// * r` vertices.
#[derive(Debug, Clone, Copy)]
pub struct PartitionConfig {
    pub r: u32,
    pub r_prime: u32,
    pub size_cap_multiplier: u32,
}

impl Default for PartitionConfig {
    fn default() -> Self {
        PartitionConfig {
            r: 64,
            r_prime: 4,
            size_cap_multiplier: 2,
        }
    }
}

impl PartitionConfig {
    pub fn validate(&self) -> Result<()> {
        if self.r_prime < 2 || self.r < self.r_prime {
            return Err(Error::InvalidConfig(format!(
                "need r >= r' >= 2, got r={} r'={}",
                self.r, self.r_prime
            )));
        }
        if self.r_prime > crate::microtable::R_PRIME_CAP {
            return Err(Error::CapExceeded(self.r_prime));
        }
        if self.size_cap_multiplier < 1 {
            return Err(Error::InvalidConfig("size cap multiplier must be >= 1".into()));
        }
        Ok(())
    }
}

/// Edge-disjoint partition into pieces with per-piece boundary sets.
#[derive(Debug, Clone)]
pub struct RPartition {
    /// Per piece: sorted vertex set.
    pub piece_vertices: Vec<Vec<u32>>,
    /// Per piece: assigned edges.
    pub piece_edges: Vec<Vec<(u32, u32)>>,
    /// Per piece: sorted boundary set (vertices with an edge leaving the piece).
    pub boundary: Vec<Vec<u32>>,
    /// Union of all per-piece boundaries, sorted.
    pub delta: Vec<u32>,
}

fn adjacency_of(g: &LabeledGraph, n: u32) -> Vec<Vec<u32>> {
    let mut adj = vec![Vec::new(); n as usize];
    for (u, v) in g.edges() {
        adj[u as usize].push(v);
        adj[v as usize].push(u);
    }
    for a in &mut adj {
        a.sort_unstable();
    }
    adj
}

/// Components of the subgraph induced on non-separator vertices, sorted by
/// smallest member, members sorted.
fn components_excluding(adj: &[Vec<u32>], in_x: &[bool], universe: &[u32]) -> Vec<Vec<u32>> {
    let n = adj.len();
    let mut seen = vec![false; n];
    let mut comps = Vec::new();
    for &start in universe {
        let s = start as usize;
        if in_x[s] || seen[s] {
            continue;
        }
        let mut comp = Vec::new();
        let mut queue = vec![start];
        seen[s] = true;
        while let Some(v) = queue.pop() {
            comp.push(v);
            for &w in &adj[v as usize] {
                if !in_x[w as usize] && !seen[w as usize] {
                    seen[w as usize] = true;
                    queue.push(w);
                }
            }
        }
        comp.sort_unstable();
        comps.push(comp);
    }
    comps
}

fn x_neighbors(adj: &[Vec<u32>], in_x: &[bool], comp: &[u32]) -> Vec<u32> {
    let mut nx = BTreeSet::new();
    for &v in comp {
        for &w in &adj[v as usize] {
            if in_x[w as usize] {
                nx.insert(w);
            }
        }
    }
    nx.into_iter().collect()
}

/// BFS levels from the smallest label of the component; median level as the
/// separator, falling back to splitting the largest level set when the level
/// structure gives no proper cut.
fn bfs_level_separator(adj: &[Vec<u32>], in_x: &[bool], comp: &[u32]) -> Vec<u32> {
    debug_assert!(comp.len() >= 2);
    let root = comp[0];
    let member: BTreeSet<u32> = comp.iter().copied().collect();
    let mut level_of = std::collections::BTreeMap::new();
    level_of.insert(root, 0usize);
    let mut levels: Vec<Vec<u32>> = vec![vec![root]];
    let mut frontier = vec![root];
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for &v in &frontier {
            for &w in &adj[v as usize] {
                if !in_x[w as usize] && member.contains(&w) && !level_of.contains_key(&w) {
                    level_of.insert(w, levels.len());
                    next.push(w);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        next.sort_unstable();
        levels.push(next.clone());
        frontier = next;
    }
    // median level by cumulative size
    let total: usize = levels.iter().map(|l| l.len()).sum();
    let mut cum = 0;
    let mut pick = 0;
    for (i, l) in levels.iter().enumerate() {
        cum += l.len();
        if cum * 2 >= total {
            pick = i;
            break;
        }
    }
    let sep = &levels[pick];
    if sep.len() < comp.len() {
        return sep.clone();
    }
    // single-level component: split the largest level set
    let largest = levels.iter().max_by_key(|l| l.len()).unwrap();
    largest.iter().copied().step_by(2).take(largest.len().div_ceil(2).max(1)).collect()
}

/// Grows a separator set until every component C of G - X satisfies
/// `|C| + |N_X(C)| <= cap`. Hopeless singletons are promoted into X.
pub(crate) fn separator_decomposition(
    adj: &[Vec<u32>],
    universe: &[u32],
    cap: usize,
) -> (Vec<bool>, Vec<Vec<u32>>) {
    let n = adj.len();
    let mut in_x = vec![false; n];
    fn refine(adj: &[Vec<u32>], in_x: &mut Vec<bool>, comp: Vec<u32>, cap: usize) {
        let nx = x_neighbors(adj, in_x, &comp);
        if comp.len() + nx.len() <= cap {
            return;
        }
        if comp.len() == 1 {
            in_x[comp[0] as usize] = true;
            return;
        }
        let sep = bfs_level_separator(adj, in_x, &comp);
        debug_assert!(!sep.is_empty() && sep.len() < comp.len());
        for &v in &sep {
            in_x[v as usize] = true;
        }
        let rest: Vec<u32> = comp.iter().copied().filter(|&v| !in_x[v as usize]).collect();
        for sub in components_excluding(adj, in_x, &rest) {
            refine(adj, in_x, sub, cap);
        }
    }
    for comp in components_excluding(adj, &in_x.clone(), universe) {
        refine(adj, &mut in_x, comp, cap);
    }
    let comps = components_excluding(adj, &in_x, universe);
    (in_x, comps)
}

/// Builds an r-partition covering every edge of `g`. Labels must be dense
/// (`0..n`). Boundary-boundary edges are spread over the pieces that already
/// contain an endpoint, keeping piece loads balanced.
pub fn build_rpartition(g: &LabeledGraph, r: u32) -> Result<RPartition> {
    build_rpartition_with_cap(g, (2 * r) as usize)
}

pub fn build_rpartition_with_cap(g: &LabeledGraph, cap: usize) -> Result<RPartition> {
    let n = g.vertices().max().map_or(0, |m| m + 1);
    if g.vertex_count() as u32 != n {
        return Err(Error::InvalidConfig("labels must be dense 0..n".into()));
    }
    if n == 0 {
        return Ok(RPartition {
            piece_vertices: vec![],
            piece_edges: vec![],
            boundary: vec![],
            delta: vec![],
        });
    }
    let adj = adjacency_of(g, n);
    let universe: Vec<u32> = (0..n).collect();
    let (in_x, comps) = separator_decomposition(&adj, &universe, cap.max(1));

    let mut piece_vertices: Vec<BTreeSet<u32>> = Vec::new();
    let mut piece_edges: Vec<Vec<(u32, u32)>> = Vec::new();
    let mut piece_of = vec![u32::MAX; n as usize];
    for comp in &comps {
        let id = piece_vertices.len();
        let mut vs: BTreeSet<u32> = comp.iter().copied().collect();
        vs.extend(x_neighbors(&adj, &in_x, comp));
        for &v in comp {
            piece_of[v as usize] = id as u32;
        }
        piece_vertices.push(vs);
        piece_edges.push(Vec::new());
    }
    if piece_vertices.is_empty() {
        piece_vertices.push(BTreeSet::new());
        piece_edges.push(Vec::new());
    }
    let mut leftovers = Vec::new();
    for (u, v) in g.edges() {
        match (in_x[u as usize], in_x[v as usize]) {
            (false, _) => piece_edges[piece_of[u as usize] as usize].push((u, v)),
            (true, false) => piece_edges[piece_of[v as usize] as usize].push((u, v)),
            (true, true) => leftovers.push((u, v)),
        }
    }
    for (u, v) in leftovers {
        let candidates: Vec<usize> = (0..piece_vertices.len())
            .filter(|&i| piece_vertices[i].contains(&u) || piece_vertices[i].contains(&v))
            .collect();
        let pool: Vec<usize> = if candidates.is_empty() {
            (0..piece_vertices.len()).collect()
        } else {
            candidates
        };
        let best = pool
            .into_iter()
            .min_by_key(|&i| (piece_edges[i].len(), i))
            .unwrap();
        piece_vertices[best].insert(u);
        piece_vertices[best].insert(v);
        piece_edges[best].push((u, v));
    }

    let piece_vertices: Vec<Vec<u32>> = piece_vertices
        .into_iter()
        .map(|s| s.into_iter().collect())
        .collect();
    // boundary: vertex of a piece incident to an E-edge whose other endpoint
    // lies outside the piece
    let mut boundary = Vec::with_capacity(piece_vertices.len());
    let mut delta = BTreeSet::new();
    for vs in &piece_vertices {
        let member: BTreeSet<u32> = vs.iter().copied().collect();
        let mut b = Vec::new();
        for &v in vs {
            if adj[v as usize].iter().any(|w| !member.contains(w)) {
                b.push(v);
                delta.insert(v);
            }
        }
        boundary.push(b);
    }
    Ok(RPartition {
        piece_vertices,
        piece_edges,
        boundary,
        delta: delta.into_iter().collect(),
    })
}

/// One outer piece of the two-level decomposition, in piece-local positions
/// (`0..vertices.len()`, sorted by original label).
#[derive(Debug, Clone)]
pub struct PieceDecomp {
    /// Sorted original labels; position in this list is the local id.
    pub vertices: Vec<u32>,
    /// Local: member of the inner separator (mini-boundary)?
    pub x_inner: Vec<bool>,
    /// Per micro piece: sorted local ids (inner component plus its inner
    /// boundary partners).
    pub micro_members: Vec<Vec<u32>>,
    /// Per micro piece: its managed edges (local id pairs).
    pub micro_edges: Vec<Vec<(u32, u32)>>,
    /// Inner boundary-boundary edges, routed to the mini boundary graph.
    pub fi_edges: Vec<(u32, u32)>,
}

/// Two-level decomposition with boundary edges routed out of the pieces:
/// outer boundary-boundary edges go to `f_edges`, inner ones to per-piece
/// `fi_edges`, everything else to exactly one micro piece.
#[derive(Debug, Clone)]
pub struct TwoLevel {
    pub n: u32,
    /// Original label in the outer separator (global boundary)?
    pub x_global: Vec<bool>,
    pub pieces: Vec<PieceDecomp>,
    /// Outer boundary-boundary edges (original labels).
    pub f_edges: Vec<(u32, u32)>,
}

/// Debug rendering of a two-level decomposition: pieces, boundaries and
/// micro membership.
pub fn dump_two_level(tl: &TwoLevel) -> String {
    use std::fmt::Write as _;
    let mut out = String::new();
    let bndry: Vec<u32> = (0..tl.n).filter(|&v| tl.x_global[v as usize]).collect();
    let _ = writeln!(out, "n {} boundary {:?}", tl.n, bndry);
    for (i, pc) in tl.pieces.iter().enumerate() {
        let inner: Vec<u32> = pc
            .vertices
            .iter()
            .enumerate()
            .filter(|(l, _)| pc.x_inner[*l])
            .map(|(_, &orig)| orig)
            .collect();
        let _ = writeln!(out, "piece {i} vertices {:?} inner-boundary {:?}", pc.vertices, inner);
        for (j, ms) in pc.micro_members.iter().enumerate() {
            let orig: Vec<u32> = ms.iter().map(|&l| pc.vertices[l as usize]).collect();
            let _ = writeln!(out, "  micro {j} {:?}", orig);
        }
    }
    out
}

pub fn build_two_level(g: &LabeledGraph, cfg: &PartitionConfig) -> Result<TwoLevel> {
    cfg.validate()?;
    let n = g.vertices().max().map_or(0, |m| m + 1);
    if g.vertex_count() as u32 != n {
        return Err(Error::InvalidConfig("labels must be dense 0..n".into()));
    }
    if !g.is_connected() && n > 0 {
        return Err(Error::NotConnected);
    }
    let adj = adjacency_of(g, n);
    let universe: Vec<u32> = (0..n).collect();
    let cap = (cfg.size_cap_multiplier as usize) * cfg.r as usize;
    let (in_x, comps) = separator_decomposition(&adj, &universe, cap.max(1));

    let mut pieces = Vec::new();
    let mut f_edges = Vec::new();
    let mut piece_of = vec![u32::MAX; n as usize];
    let mut piece_vertex_sets: Vec<Vec<u32>> = Vec::new();
    for comp in &comps {
        let id = piece_vertex_sets.len() as u32;
        let mut vs: BTreeSet<u32> = comp.iter().copied().collect();
        vs.extend(x_neighbors(&adj, &in_x, comp));
        for &v in comp {
            piece_of[v as usize] = id;
        }
        piece_vertex_sets.push(vs.into_iter().collect());
    }
    let mut piece_edge_lists: Vec<Vec<(u32, u32)>> = vec![Vec::new(); piece_vertex_sets.len()];
    for (u, v) in g.edges() {
        match (in_x[u as usize], in_x[v as usize]) {
            (true, true) => f_edges.push((u, v)),
            (false, _) => piece_edge_lists[piece_of[u as usize] as usize].push((u, v)),
            (true, false) => piece_edge_lists[piece_of[v as usize] as usize].push((u, v)),
        }
    }

    for (vs, edges) in piece_vertex_sets.into_iter().zip(piece_edge_lists) {
        let local_of = |orig: u32| vs.binary_search(&orig).unwrap() as u32;
        let nv = vs.len();
        let mut ladj = vec![Vec::new(); nv];
        let ledges: Vec<(u32, u32)> = edges
            .iter()
            .map(|&(u, v)| (local_of(u), local_of(v)))
            .collect();
        for &(u, v) in &ledges {
            ladj[u as usize].push(v);
            ladj[v as usize].push(u);
        }
        for a in &mut ladj {
            a.sort_unstable();
        }
        let luniverse: Vec<u32> = (0..nv as u32).collect();
        let (lx, lcomps) = separator_decomposition(&ladj, &luniverse, cfg.r_prime as usize);
        let mut micro_members = Vec::new();
        let mut micro_edges = Vec::new();
        let mut fi_edges = Vec::new();
        let mut micro_of = vec![u32::MAX; nv];
        for comp in &lcomps {
            let id = micro_members.len() as u32;
            let mut ms: BTreeSet<u32> = comp.iter().copied().collect();
            ms.extend(x_neighbors(&ladj, &lx, comp));
            debug_assert!(ms.len() <= cfg.r_prime as usize);
            for &v in comp {
                micro_of[v as usize] = id;
            }
            micro_members.push(ms.into_iter().collect::<Vec<u32>>());
            micro_edges.push(Vec::new());
        }
        for &(u, v) in &ledges {
            match (lx[u as usize], lx[v as usize]) {
                (true, true) => fi_edges.push((u, v)),
                (false, _) => micro_edges[micro_of[u as usize] as usize].push((u, v)),
                (true, false) => micro_edges[micro_of[v as usize] as usize].push((u, v)),
            }
        }
        pieces.push(PieceDecomp {
            vertices: vs,
            x_inner: lx,
            micro_members,
            micro_edges,
            fi_edges,
        });
    }
    Ok(TwoLevel {
        n,
        x_global: in_x,
        pieces,
        f_edges,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::generate_planar;

    fn grid(side: u32) -> LabeledGraph {
        let mut g = LabeledGraph::with_vertices(side * side);
        let id = |r: u32, c: u32| r * side + c;
        for r in 0..side {
            for c in 0..side {
                if c + 1 < side {
                    g.add_edge(id(r, c), id(r, c + 1)).unwrap();
                }
                if r + 1 < side {
                    g.add_edge(id(r, c), id(r + 1, c)).unwrap();
                }
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
    fn small_graph_single_piece() {
        let g = grid(3);
        let p = build_rpartition(&g, 32).unwrap();
        assert_eq!(p.piece_vertices.len(), 1);
        assert!(p.delta.is_empty());
    }

    #[test]
    fn grid_partition_covers_edges_disjointly() {
        let g = grid(16);
        let p = build_rpartition(&g, 32).unwrap();
        for vs in &p.piece_vertices {
            assert!(vs.len() <= 64, "piece too large: {}", vs.len());
        }
        let mut all: Vec<(u32, u32)> = p.piece_edges.iter().flatten().copied().collect();
        all.sort_unstable();
        let mut expect = g.edges();
        expect.sort_unstable();
        assert_eq!(all, expect, "edge sets must partition E");
        let total: usize = p.piece_edges.iter().map(|e| e.len()).sum();
        assert_eq!(total, g.edge_count());
    }

    #[test]
    fn path_boundary_is_shared_vertices() {
        let g = path(100);
        let p = build_rpartition(&g, 10).unwrap();
        assert!(p.piece_vertices.len() > 1);
        // boundary = vertices appearing in at least two pieces
        let mut count = std::collections::BTreeMap::new();
        for vs in &p.piece_vertices {
            for &v in vs {
                *count.entry(v).or_insert(0) += 1;
            }
        }
        let shared: Vec<u32> = count
            .iter()
            .filter(|(_, &c)| c >= 2)
            .map(|(&v, _)| v)
            .collect();
        assert_eq!(p.delta, shared);
    }

    #[test]
    fn two_level_routes_every_edge_once() {
        let g = generate_planar(500, 3);
        let cfg = PartitionConfig {
            r: 16,
            r_prime: 4,
            size_cap_multiplier: 2,
        };
        let tl = build_two_level(&g, &cfg).unwrap();
        let mut seen = Vec::new();
        for &(u, v) in &tl.f_edges {
            assert!(tl.x_global[u as usize] && tl.x_global[v as usize]);
            seen.push((u.min(v), u.max(v)));
        }
        for pc in &tl.pieces {
            let orig = |l: u32| pc.vertices[l as usize];
            for &(u, v) in &pc.fi_edges {
                assert!(pc.x_inner[u as usize] && pc.x_inner[v as usize]);
                let (a, b) = (orig(u), orig(v));
                assert!(!(tl.x_global[a as usize] && tl.x_global[b as usize]));
                seen.push((a.min(b), a.max(b)));
            }
            for (j, edges) in pc.micro_edges.iter().enumerate() {
                for &(u, v) in edges {
                    assert!(
                        pc.micro_members[j].contains(&u) && pc.micro_members[j].contains(&v)
                    );
                    let (a, b) = (orig(u), orig(v));
                    seen.push((a.min(b), a.max(b)));
                }
            }
            for ms in &pc.micro_members {
                assert!(ms.len() <= 4, "micro piece exceeds r'");
            }
        }
        seen.sort_unstable();
        let mut expect = g.edges();
        expect.sort_unstable();
        assert_eq!(seen, expect, "every edge managed exactly once");
    }

    #[test]
    fn two_level_requires_connected() {
        let mut g = LabeledGraph::with_vertices(4);
        g.add_edge(0, 1).unwrap();
        g.add_edge(2, 3).unwrap();
        let cfg = PartitionConfig::default();
        assert_eq!(build_two_level(&g, &cfg).unwrap_err(), Error::NotConnected);
    }

    #[test]
    fn config_validation() {
        assert!(PartitionConfig { r: 4, r_prime: 5, size_cap_multiplier: 2 }
            .validate()
            .is_err());
        assert!(PartitionConfig { r: 64, r_prime: 1, size_cap_multiplier: 2 }
            .validate()
            .is_err());
        assert!(PartitionConfig { r: 64, r_prime: 7, size_cap_multiplier: 2 }
            .validate()
            .is_err());
        assert!(PartitionConfig::default().validate().is_ok());
    }
}
