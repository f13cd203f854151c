//! Lookup table over all planar graphs with vertex set `[k]` for every
//! `k <= r' + 1`. The highest label of each graph is a reserved dummy vertex:
//! marking a vertex deleted is realized as adjacency to the dummy, which keeps
//! vertex sets fixed under label-preserving merges.
//!
//! Vertices are 0-based here: a graph with `m` real vertices lives in the
//! stratum `k = m + 1` with real labels `0..m` and dummy label `m`.

use std::collections::HashMap;
use std::fs;
use std::hash::BuildHasherDefault;
use std::path::Path;

use crate::error::{Error, Result};
use crate::graph::LabeledGraph;

type DetHasher = BuildHasherDefault<std::collections::hash_map::DefaultHasher>;

pub const R_PRIME_CAP: u32 = 6;

const NO_TRANSITION: u32 = u32::MAX;

#[inline]
fn pair_bit(a: u8, b: u8) -> u32 {
    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
    (hi as u32 * (hi as u32 - 1)) / 2 + lo as u32
}

#[inline]
fn has_pair(mask: u32, a: u8, b: u8) -> bool {
    mask >> pair_bit(a, b) & 1 == 1
}

/// Identifier of one table graph: stratum vertex count (dummy included) and
/// the dense index within the stratum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MicroGraphCode {
    pub k: u8,
    pub index: u32,
}

#[derive(Debug)]
struct Stratum {
    k: u8, // vertex count including the dummy
    masks: Vec<u32>,
    index_of: HashMap<u32, u32, DetHasher>,
    // merge[(index * real * real) + u * real + v] -> index after merging v to u
    merge: Vec<u32>,
}

impl Stratum {
    fn real(&self) -> u8 {
        self.k - 1
    }
}

/// The table plus precomputed label-preserving merge transitions.
#[derive(Debug)]
pub struct MicroTable {
    r_prime: u32,
    strata: Vec<Stratum>, // position k-1 holds stratum for k vertices
}

/// Enumerates planarity for every edge subset over `k` labeled vertices.
///
/// A graph is nonplanar iff some one-edge-deleted subgraph already is, or the
/// graph itself is an edge-minimal obstruction, i.e. a subdivision of K5 or
/// K3,3. Masks are processed in increasing numeric order, so all submasks are
/// resolved first.
fn nonplanar_table(k: u8) -> Vec<bool> {
    let pairs = (k as usize * (k as usize - 1)) / 2;
    let mut nonplanar = vec![false; 1usize << pairs];
    for mask in 0..(1u32 << pairs) {
        let m = mask.count_ones();
        if m < 9 {
            continue; // every graph with fewer than 9 edges is planar
        }
        let mut bad = false;
        let mut rest = mask;
        while rest != 0 {
            let bit = rest & rest.wrapping_neg();
            if nonplanar[(mask & !bit) as usize] {
                bad = true;
                break;
            }
            rest &= rest - 1;
        }
        nonplanar[mask as usize] = bad || is_kuratowski_subdivision(mask, k);
    }
    nonplanar
}

/// True iff the edge set of `mask` is exactly a subdivision of K5 or K3,3
/// (isolated vertices allowed). Suppresses degree-2 vertices and compares.
fn is_kuratowski_subdivision(mask: u32, k: u8) -> bool {
    let mut adj: Vec<Vec<u8>> = vec![Vec::new(); k as usize];
    for a in 0..k {
        for b in a + 1..k {
            if has_pair(mask, a, b) {
                adj[a as usize].push(b);
                adj[b as usize].push(a);
            }
        }
    }
    loop {
        let Some(v) = (0..k).find(|&v| adj[v as usize].len() == 2) else {
            break;
        };
        let a = adj[v as usize][0];
        let b = adj[v as usize][1];
        if adj[a as usize].contains(&b) {
            return false; // suppression would create a parallel edge
        }
        adj[v as usize].clear();
        adj[a as usize].retain(|&x| x != v);
        adj[b as usize].retain(|&x| x != v);
        adj[a as usize].push(b);
        adj[b as usize].push(a);
    }
    let live: Vec<u8> = (0..k).filter(|&v| !adj[v as usize].is_empty()).collect();
    match live.len() {
        5 => live
            .iter()
            .all(|&v| adj[v as usize].len() == 4),
        6 => {
            if !live.iter().all(|&v| adj[v as usize].len() == 3) {
                return false;
            }
            let side_b = &adj[live[0] as usize];
            let side_a: Vec<u8> = live
                .iter()
                .copied()
                .filter(|v| !side_b.contains(v))
                .collect();
            side_a.len() == 3
                && side_a
                    .iter()
                    .all(|&a| side_b.iter().all(|&b| adj[a as usize].contains(&b)))
        }
        _ => false,
    }
}

impl MicroTable {
    /// Enumerates all strata up to `r_prime + 1` vertices and precomputes the
    /// merge transition for every ordered pair of real labels.
    pub fn build(r_prime: u32) -> Result<Self> {
        if !(2..=R_PRIME_CAP).contains(&r_prime) {
            return Err(Error::CapExceeded(r_prime));
        }
        let mut strata = Vec::new();
        for k in 1..=(r_prime + 1) as u8 {
            let nonplanar = nonplanar_table(k);
            let masks: Vec<u32> = (0..nonplanar.len() as u32)
                .filter(|&m| !nonplanar[m as usize])
                .collect();
            let mut index_of = HashMap::with_hasher(DetHasher::default());
            for (i, &m) in masks.iter().enumerate() {
                index_of.insert(m, i as u32);
            }
            let real = (k - 1) as usize;
            let mut merge = vec![NO_TRANSITION; masks.len() * real * real];
            for (idx, &m) in masks.iter().enumerate() {
                for u in 0..real as u8 {
                    for v in 0..real as u8 {
                        if u == v {
                            continue;
                        }
                        let merged = merge_mask(m, k, u, v);
                        let slot = idx * real * real + u as usize * real + v as usize;
                        if let Some(&j) = index_of.get(&merged) {
                            merge[slot] = j;
                        }
                    }
                }
            }
            strata.push(Stratum {
                k,
                masks,
                index_of,
                merge,
            });
        }
        Ok(MicroTable { r_prime, strata })
    }

    pub fn r_prime(&self) -> u32 {
        self.r_prime
    }

    fn stratum(&self, k: u8) -> Result<&Stratum> {
        self.strata
            .get(k as usize - 1)
            .ok_or(Error::CapExceeded(k as u32))
    }

    /// Number of planar graphs in the stratum with `k` vertices.
    pub fn stratum_len(&self, k: u8) -> Result<usize> {
        Ok(self.stratum(k)?.masks.len())
    }

    /// Bits needed for one index of the `k`-vertex stratum.
    pub fn index_width(&self, k: u8) -> Result<usize> {
        let len = self.stratum_len(k)?;
        Ok((usize::BITS - (len.max(1) - 1).leading_zeros()) as usize)
    }

    pub fn encode(&self, k: u8, mask: u32) -> Result<u32> {
        self.stratum(k)?
            .index_of
            .get(&mask)
            .copied()
            .ok_or_else(|| Error::NotPlanar(format!("mask {mask:#b} on k={k}")))
    }

    pub fn decode(&self, k: u8, index: u32) -> Result<u32> {
        let s = self.stratum(k)?;
        s.masks
            .get(index as usize)
            .copied()
            .ok_or(Error::IndexOutOfRange(index as u64, s.masks.len() as u64))
    }

    fn check_real(&self, k: u8, x: u8) -> Result<()> {
        if x + 1 >= k {
            return Err(Error::UnknownVertex(x as u32));
        }
        Ok(())
    }

    /// A vertex is deleted exactly if it is adjacent to the dummy.
    pub fn is_deleted(&self, k: u8, index: u32, x: u8) -> Result<bool> {
        self.check_real(k, x)?;
        let mask = self.decode(k, index)?;
        Ok(has_pair(mask, x, k - 1))
    }

    fn check_live(&self, k: u8, index: u32, x: u8) -> Result<()> {
        if self.is_deleted(k, index, x)? {
            return Err(Error::Deleted(x as u32));
        }
        Ok(())
    }

    pub fn adjacent(&self, k: u8, index: u32, u: u8, v: u8) -> Result<bool> {
        self.check_live(k, index, u)?;
        self.check_live(k, index, v)?;
        Ok(has_pair(self.decode(k, index)?, u, v))
    }

    pub fn degree(&self, k: u8, index: u32, u: u8) -> Result<u32> {
        self.check_live(k, index, u)?;
        let mask = self.decode(k, index)?;
        let mut d = 0;
        for x in 0..k - 1 {
            if x != u && has_pair(mask, u, x) && !has_pair(mask, x, k - 1) {
                d += 1;
            }
        }
        Ok(d)
    }

    pub fn neighbors(&self, k: u8, index: u32, u: u8) -> Result<Vec<u8>> {
        self.range_neighbors(k, index, u, 0, k.saturating_sub(2))
    }

    /// Sorted neighbors of `u` with labels in `[a, b]`; the dummy vertex and
    /// deleted vertices never appear in the output.
    pub fn range_neighbors(&self, k: u8, index: u32, u: u8, a: u8, b: u8) -> Result<Vec<u8>> {
        self.check_live(k, index, u)?;
        let mask = self.decode(k, index)?;
        let hi = b.min(k - 2);
        let mut out = Vec::new();
        let mut x = a;
        while x <= hi {
            if x != u && has_pair(mask, u, x) && !has_pair(mask, x, k - 1) {
                out.push(x);
            }
            if x == hi {
                break;
            }
            x += 1;
        }
        Ok(out)
    }

    /// Removes every edge `{u, x}` with `a <= x <= b`; returns the new index.
    pub fn batch_delete(&self, k: u8, index: u32, u: u8, a: u8, b: u8) -> Result<u32> {
        self.check_real(k, u)?;
        let mut mask = self.decode(k, index)?;
        let hi = b.min(k - 2);
        let mut x = a;
        while x <= hi {
            if x != u {
                mask &= !(1 << pair_bit(u, x));
            }
            if x == hi {
                break;
            }
            x += 1;
        }
        self.encode(k, mask)
    }

    /// Removes a single edge.
    pub fn delete_edge(&self, k: u8, index: u32, u: u8, v: u8) -> Result<u32> {
        if !self.adjacent(k, index, u, v)? {
            return Err(Error::NotAnEdge(u as u32, v as u32));
        }
        let mask = self.decode(k, index)? & !(1 << pair_bit(u, v));
        self.encode(k, mask)
    }

    /// Removes all incident edges of `u` and marks it deleted.
    pub fn delete_vertex(&self, k: u8, index: u32, u: u8) -> Result<u32> {
        self.check_live(k, index, u)?;
        let mut mask = self.decode(k, index)?;
        for x in 0..k - 1 {
            if x != u {
                mask &= !(1 << pair_bit(u, x));
            }
        }
        mask |= 1 << pair_bit(u, k - 1);
        self.encode(k, mask)
    }

    /// Label-preserving merge of `v` to `u`: precomputed transition. Fails
    /// with `NonplanarResult` when the merged graph left the table (possible
    /// only for non-adjacent pairs).
    pub fn merge(&self, k: u8, index: u32, u: u8, v: u8) -> Result<u32> {
        if u == v {
            return Err(Error::SameVertex(u as u32));
        }
        self.check_live(k, index, u)?;
        self.check_live(k, index, v)?;
        let s = self.stratum(k)?;
        let real = s.real() as usize;
        let slot = index as usize * real * real + u as usize * real + v as usize;
        match s.merge[slot] {
            NO_TRANSITION => Err(Error::NonplanarResult(u as u32, v as u32)),
            j => Ok(j),
        }
    }

    /// Decodes the live-induced part of a table graph into a
    /// [`LabeledGraph`]: deleted-marked vertices and their edges are
    /// dropped. States reachable through the provided operations never give
    /// a deleted vertex live neighbors anyway.
    pub fn to_graph(&self, k: u8, index: u32) -> Result<LabeledGraph> {
        let mask = self.decode(k, index)?;
        let live = |x: u8| !has_pair(mask, x, k - 1);
        let mut g = LabeledGraph::new();
        for x in 0..k - 1 {
            if live(x) {
                g.add_vertex(x as u32);
            }
        }
        for a in 0..k - 1 {
            for b in a + 1..k - 1 {
                if has_pair(mask, a, b) && live(a) && live(b) {
                    g.add_edge(a as u32, b as u32).unwrap();
                }
            }
        }
        Ok(g)
    }

    /// Serializes the table with a versioned header.
    pub fn write_cache(&self, path: &Path) -> Result<()> {
        let mut buf: Vec<u8> = Vec::new();
        buf.extend_from_slice(format!("MTBL1 {}\n", self.r_prime).as_bytes());
        for s in &self.strata {
            buf.extend_from_slice(&(s.masks.len() as u32).to_le_bytes());
            for &m in &s.masks {
                buf.extend_from_slice(&m.to_le_bytes());
            }
            for &t in &s.merge {
                buf.extend_from_slice(&t.to_le_bytes());
            }
        }
        fs::write(path, buf)?;
        Ok(())
    }

    /// Loads a table previously written by [`MicroTable::write_cache`].
    pub fn read_cache(path: &Path) -> Result<Self> {
        let data = fs::read(path)?;
        let nl = data
            .iter()
            .position(|&b| b == b'\n')
            .ok_or_else(|| Error::Io("truncated cache".into()))?;
        let header = std::str::from_utf8(&data[..nl]).map_err(|_| Error::Io("bad header".into()))?;
        let r_prime: u32 = header
            .strip_prefix("MTBL1 ")
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| Error::Io(format!("unsupported cache header '{header}'")))?;
        if !(2..=R_PRIME_CAP).contains(&r_prime) {
            return Err(Error::CapExceeded(r_prime));
        }
        let mut pos = nl + 1;
        let next_u32 = |pos: &mut usize| -> Result<u32> {
            let b = data
                .get(*pos..*pos + 4)
                .ok_or_else(|| Error::Io("truncated cache".into()))?;
            *pos += 4;
            Ok(u32::from_le_bytes(b.try_into().unwrap()))
        };
        let mut strata = Vec::new();
        for k in 1..=(r_prime + 1) as u8 {
            let count = next_u32(&mut pos)? as usize;
            let mut masks = Vec::with_capacity(count);
            for _ in 0..count {
                masks.push(next_u32(&mut pos)?);
            }
            let real = (k - 1) as usize;
            let mut merge = Vec::with_capacity(count * real * real);
            for _ in 0..count * real * real {
                merge.push(next_u32(&mut pos)?);
            }
            let mut index_of = HashMap::with_hasher(DetHasher::default());
            for (i, &m) in masks.iter().enumerate() {
                index_of.insert(m, i as u32);
            }
            strata.push(Stratum {
                k,
                masks,
                index_of,
                merge,
            });
        }
        Ok(MicroTable { r_prime, strata })
    }
}

/// Mask after merging v to u: `N(u) := N(u) ∪ N(v) ∖ {u, v}`, `N(v) := {dummy}`.
fn merge_mask(mask: u32, k: u8, u: u8, v: u8) -> u32 {
    let mut out = mask;
    for x in 0..k - 1 {
        if x == u || x == v {
            continue;
        }
        if has_pair(mask, v, x) {
            out |= 1 << pair_bit(u, x);
            out &= !(1 << pair_bit(v, x));
        }
    }
    out &= !(1 << pair_bit(u, v));
    out |= 1 << pair_bit(v, k - 1);
    out
}

/// Kuratowski-based planarity test for graphs with at most 8 vertices:
/// true iff the graph contains no K5 and no K3,3 topological minor. This
/// searches branch-vertex subsets and internally disjoint subdivision paths
/// directly, independently of the table enumeration.
pub fn tiny_planarity(g: &LabeledGraph) -> Result<bool> {
    let verts: Vec<u32> = g.vertices().collect();
    let n = verts.len();
    if n > 8 {
        return Err(Error::TooLarge(n));
    }
    let m = g.edge_count();
    if m < 9 {
        return Ok(true);
    }
    if n >= 3 && m > 3 * n - 6 {
        return Ok(false);
    }
    let idx_of = |v: u32| verts.iter().position(|&x| x == v).unwrap() as u8;
    let mut adj = vec![0u16; n];
    for (a, b) in g.edges() {
        let (a, b) = (idx_of(a), idx_of(b));
        adj[a as usize] |= 1 << b;
        adj[b as usize] |= 1 << a;
    }
    Ok(!has_subdivision(&adj, n, 5, false) && !has_subdivision(&adj, n, 6, true))
}

/// Searches a K5 (bipartite=false) or K3,3 (bipartite=true) subdivision.
fn has_subdivision(adj: &[u16], n: usize, branches: usize, bipartite: bool) -> bool {
    if n < branches {
        return false;
    }
    let mut choose = Vec::new();
    subsets(n, branches, &mut choose, &mut |set: &[u8]| {
        if bipartite {
            // try every 3+3 split of the chosen 6
            let mut split = Vec::new();
            let mut found = false;
            subsets_of(&set[1..], 2, &mut split, &mut |half: &[u8]| {
                let mut a = vec![set[0]];
                a.extend_from_slice(half);
                let b: Vec<u8> = set.iter().copied().filter(|x| !a.contains(x)).collect();
                let pairs: Vec<(u8, u8)> =
                    a.iter().flat_map(|&x| b.iter().map(move |&y| (x, y))).collect();
                if connect_pairs(adj, n, set, &pairs) {
                    found = true;
                }
                found
            });
            found
        } else {
            let mut pairs = Vec::new();
            for i in 0..branches {
                for j in i + 1..branches {
                    pairs.push((set[i], set[j]));
                }
            }
            connect_pairs(adj, n, set, &pairs)
        }
    })
}

fn subsets(n: usize, k: usize, cur: &mut Vec<u8>, f: &mut impl FnMut(&[u8]) -> bool) -> bool {
    if cur.len() == k {
        return f(cur);
    }
    let start = cur.last().map_or(0, |&l| l + 1);
    for v in start..n as u8 {
        cur.push(v);
        if subsets(n, k, cur, f) {
            cur.pop();
            return true;
        }
        cur.pop();
    }
    false
}

fn subsets_of(pool: &[u8], k: usize, cur: &mut Vec<u8>, f: &mut impl FnMut(&[u8]) -> bool) -> bool {
    if cur.len() == k {
        return f(cur);
    }
    let start = cur
        .last()
        .map_or(0, |&l| pool.iter().position(|&p| p == l).unwrap() + 1);
    for i in start..pool.len() {
        cur.push(pool[i]);
        if subsets_of(pool, k, cur, f) {
            cur.pop();
            return true;
        }
        cur.pop();
    }
    false
}

/// Backtracking over the required pairs: each is either a direct edge or a
/// path through spare vertices, all paths internally disjoint.
fn connect_pairs(adj: &[u16], n: usize, branch: &[u8], pairs: &[(u8, u8)]) -> bool {
    let branch_mask: u16 = branch.iter().fold(0, |m, &b| m | 1 << b);
    let spare: Vec<u8> = (0..n as u8).filter(|&v| branch_mask >> v & 1 == 0).collect();
    fn rec(adj: &[u16], pairs: &[(u8, u8)], i: usize, spare: &[u8], used: u16) -> bool {
        if i == pairs.len() {
            return true;
        }
        let (a, b) = pairs[i];
        if adj[a as usize] >> b & 1 == 1 && rec(adj, pairs, i + 1, spare, used) {
            return true;
        }
        // paths a - s1 [- s2 [- s3]] - b over unused spares
        let free: Vec<u8> = spare.iter().copied().filter(|&s| used >> s & 1 == 0).collect();
        fn extend(
            adj: &[u16],
            pairs: &[(u8, u8)],
            i: usize,
            spare: &[u8],
            used: u16,
            last: u8,
            target: u8,
            free: &[u8],
        ) -> bool {
            for &s in free {
                if used >> s & 1 == 1 || adj[last as usize] >> s & 1 == 0 {
                    continue;
                }
                let used2 = used | 1 << s;
                if adj[s as usize] >> target & 1 == 1
                    && rec(adj, pairs, i + 1, spare, used2)
                {
                    return true;
                }
                if extend(adj, pairs, i, spare, used2, s, target, free) {
                    return true;
                }
            }
            false
        }
        extend(adj, pairs, i, spare, used, a, b, &free)
    }
    rec(adj, pairs, 0, &spare, 0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn complete(n: u32) -> LabeledGraph {
        let mut g = LabeledGraph::with_vertices(n);
        for u in 0..n {
            for v in u + 1..n {
                g.add_edge(u, v).unwrap();
            }
        }
        g
    }

    fn k33() -> LabeledGraph {
        let mut g = LabeledGraph::with_vertices(6);
        for a in 0..3 {
            for b in 3..6 {
                g.add_edge(a, b).unwrap();
            }
        }
        g
    }

    #[test]
    fn tiny_planarity_kuratowski() {
        assert!(!tiny_planarity(&complete(5)).unwrap());
        assert!(!tiny_planarity(&k33()).unwrap());
        assert!(tiny_planarity(&complete(4)).unwrap());

        // K4 plus pendant, checked against the exhaustive subdivision search
        let mut g = complete(4);
        g.add_edge(3, 4).unwrap();
        assert!(tiny_planarity(&g).unwrap());

        // subdivided K5 on 7 vertices is still nonplanar
        let mut g = complete(5);
        g.delete_edge(0, 1).unwrap();
        g.add_edge(0, 5).unwrap();
        g.add_edge(5, 1).unwrap();
        g.delete_edge(2, 3).unwrap();
        g.add_edge(2, 6).unwrap();
        g.add_edge(6, 3).unwrap();
        assert!(!tiny_planarity(&g).unwrap());

        // subdivided K3,3 on 7 vertices
        let mut g = k33();
        g.delete_edge(0, 3).unwrap();
        g.add_edge(0, 6).unwrap();
        g.add_edge(6, 3).unwrap();
        assert!(!tiny_planarity(&g).unwrap());

        assert!(tiny_planarity(&LabeledGraph::with_vertices(9)).is_err());
    }

    /// Independent oracle: minor-based planarity by enumerating vertex-class
    /// assignments into 5 (K5) or 3+3 (K3,3) connected branch sets.
    fn planar_by_minor_search(mask: u32, k: u8) -> bool {
        !has_minor(mask, k, &[1, 1, 1, 1, 1]) && !has_k33_minor(mask, k)
    }

    fn adj_of(mask: u32, k: u8) -> Vec<u16> {
        let mut adj = vec![0u16; k as usize];
        for a in 0..k {
            for b in a + 1..k {
                if has_pair(mask, a, b) {
                    adj[a as usize] |= 1 << b;
                    adj[b as usize] |= 1 << a;
                }
            }
        }
        adj
    }

    fn connected_subset(adj: &[u16], set: u16) -> bool {
        if set == 0 {
            return false;
        }
        let start = set.trailing_zeros() as u16;
        let mut seen = 1u16 << start;
        let mut frontier = seen;
        while frontier != 0 {
            let mut next = 0u16;
            let mut f = frontier;
            while f != 0 {
                let v = f.trailing_zeros() as usize;
                f &= f - 1;
                next |= adj[v] & set & !seen;
            }
            seen |= next;
            frontier = next;
        }
        seen == set
    }

    fn blocks_adjacent(adj: &[u16], x: u16, y: u16) -> bool {
        let mut f = x;
        while f != 0 {
            let v = f.trailing_zeros() as usize;
            f &= f - 1;
            if adj[v] & y != 0 {
                return true;
            }
        }
        false
    }

    fn has_minor(mask: u32, k: u8, _shape: &[u8]) -> bool {
        // assign each vertex one of {unused, block 0..4}; need connected,
        // pairwise adjacent blocks
        let adj = adj_of(mask, k);
        let n = k as usize;
        let mut assign = vec![0u8; n];
        fn rec(adj: &[u16], assign: &mut Vec<u8>, i: usize) -> bool {
            if i == assign.len() {
                let mut blocks = [0u16; 5];
                for (v, &a) in assign.iter().enumerate() {
                    if a > 0 {
                        blocks[(a - 1) as usize] |= 1 << v;
                    }
                }
                if blocks.iter().any(|&b| b == 0) {
                    return false;
                }
                for b in &blocks {
                    if !connected_subset(adj, *b) {
                        return false;
                    }
                }
                for x in 0..5 {
                    for y in x + 1..5 {
                        if !blocks_adjacent(adj, blocks[x], blocks[y]) {
                            return false;
                        }
                    }
                }
                return true;
            }
            for a in 0..=5u8 {
                assign[i] = a;
                if rec(adj, assign, i + 1) {
                    return true;
                }
            }
            assign[i] = 0;
            false
        }
        rec(&adj, &mut assign, 0)
    }

    fn has_k33_minor(mask: u32, k: u8) -> bool {
        let adj = adj_of(mask, k);
        let n = k as usize;
        let mut assign = vec![0u8; n];
        fn rec(adj: &[u16], assign: &mut Vec<u8>, i: usize) -> bool {
            if i == assign.len() {
                let mut blocks = [0u16; 6];
                for (v, &a) in assign.iter().enumerate() {
                    if a > 0 {
                        blocks[(a - 1) as usize] |= 1 << v;
                    }
                }
                if blocks.iter().any(|&b| b == 0) {
                    return false;
                }
                for b in &blocks {
                    if !connected_subset(adj, *b) {
                        return false;
                    }
                }
                for x in 0..3 {
                    for y in 3..6 {
                        if !blocks_adjacent(adj, blocks[x], blocks[y]) {
                            return false;
                        }
                    }
                }
                return true;
            }
            for a in 0..=6u8 {
                assign[i] = a;
                if rec(adj, assign, i + 1) {
                    return true;
                }
            }
            assign[i] = 0;
            false
        }
        rec(&adj, &mut assign, 0)
    }

    #[test]
    fn build_counts_match_minor_oracle() {
        // r' = 2: strata k = 1, 2, 3 checked against brute force with the
        // independent minor-based planarity filter
        let t = MicroTable::build(2).unwrap();
        for k in 1..=3u8 {
            let pairs = (k as usize * (k as usize - 1)) / 2;
            let oracle = (0..1u32 << pairs)
                .filter(|&m| planar_by_minor_search(m, k))
                .count();
            assert_eq!(t.stratum_len(k).unwrap(), oracle, "k={k}");
        }
        // all graphs on <= 4 vertices are planar
        assert_eq!(t.stratum_len(3).unwrap(), 8);
    }

    #[test]
    fn k5_absent_k4_present() {
        let t = MicroTable::build(4).unwrap();
        // stratum k=5: 4 real vertices + dummy; the full K4 on real labels
        let mut k4_mask = 0u32;
        for a in 0..4u8 {
            for b in a + 1..4 {
                k4_mask |= 1 << pair_bit(a, b);
            }
        }
        assert!(t.encode(5, k4_mask).is_ok());
        // the complete graph on all 5 labels of stratum 5 is K5: absent
        let mut k5_mask = 0u32;
        for a in 0..5u8 {
            for b in a + 1..5 {
                k5_mask |= 1 << pair_bit(a, b);
            }
        }
        assert!(t.encode(5, k5_mask).is_err());
        // sanity against the minor oracle for the whole stratum
        let pairs = 10;
        let oracle = (0..1u32 << pairs).filter(|&m| planar_by_minor_search(m, 5)).count();
        assert_eq!(t.stratum_len(5).unwrap(), oracle);
    }

    #[test]
    fn queries_on_triangle() {
        let t = MicroTable::build(3).unwrap();
        // K3 lives in stratum k=4 (3 real + dummy)
        let mask = (1 << pair_bit(0, 1)) | (1 << pair_bit(0, 2)) | (1 << pair_bit(1, 2));
        let idx = t.encode(4, mask).unwrap();
        assert_eq!(t.degree(4, idx, 0).unwrap(), 2);
        assert!(t.adjacent(4, idx, 0, 1).unwrap());

        // merge 1 into 0: edge {0,2} remains, 1 deleted
        let j = t.merge(4, idx, 0, 1).unwrap();
        assert_eq!(t.neighbors(4, j, 0).unwrap(), vec![2]);
        assert!(t.is_deleted(4, j, 1).unwrap());
        assert_eq!(t.degree(4, j, 1), Err(Error::Deleted(1)));

        // isolated vertices graph
        let empty = t.encode(4, 0).unwrap();
        assert!(t.neighbors(4, empty, 1).unwrap().is_empty());
    }

    #[test]
    fn range_and_batch_ops() {
        let t = MicroTable::build(4).unwrap();
        // K4 in stratum 5, real labels 0..3
        let mut mask = 0u32;
        for a in 0..4u8 {
            for b in a + 1..4 {
                mask |= 1 << pair_bit(a, b);
            }
        }
        let idx = t.encode(5, mask).unwrap();
        assert_eq!(t.range_neighbors(5, idx, 0, 1, 2).unwrap(), vec![1, 2]);
        assert_eq!(t.range_neighbors(5, idx, 0, 3, 3).unwrap(), vec![3]);
        assert_eq!(
            t.range_neighbors(5, idx, 0, 0, 3).unwrap(),
            t.neighbors(5, idx, 0).unwrap()
        );

        // path 0-1-2 in stratum 4: range [2,2] of vertex 1
        let t3 = MicroTable::build(3).unwrap();
        let p = (1 << pair_bit(0, 1)) | (1 << pair_bit(1, 2));
        let pidx = t3.encode(4, p).unwrap();
        assert_eq!(t3.range_neighbors(4, pidx, 1, 2, 2).unwrap(), vec![2]);

        // K3 batch deletions
        let k3 = (1 << pair_bit(0, 1)) | (1 << pair_bit(0, 2)) | (1 << pair_bit(1, 2));
        let k3i = t3.encode(4, k3).unwrap();
        let j = t3.batch_delete(4, k3i, 0, 1, 2).unwrap();
        assert_eq!(t3.decode(4, j).unwrap(), 1 << pair_bit(1, 2));
        let j2 = t3.batch_delete(4, k3i, 0, 2, 2).unwrap();
        assert_eq!(
            t3.decode(4, j2).unwrap(),
            (1 << pair_bit(0, 1)) | (1 << pair_bit(1, 2))
        );
        // empty range on an isolated vertex is the identity
        let e = t3.encode(4, 0).unwrap();
        assert_eq!(t3.batch_delete(4, e, 0, 0, 2).unwrap(), e);
    }

    #[test]
    fn merge_nonadjacent_c4() {
        // C4 0-1-2-3-0, merge(0,2) non-adjacent: N(0) = {1,3}, planar
        let t = MicroTable::build(4).unwrap();
        let mask = (1 << pair_bit(0, 1))
            | (1 << pair_bit(1, 2))
            | (1 << pair_bit(2, 3))
            | (1 << pair_bit(0, 3));
        let idx = t.encode(5, mask).unwrap();
        let j = t.merge(5, idx, 0, 2).unwrap();
        assert_eq!(t.neighbors(5, j, 0).unwrap(), vec![1, 3]);
        assert!(t.is_deleted(5, j, 2).unwrap());

        // two isolated vertices: merge leaves one isolated, one deleted
        let e = t.encode(5, 0).unwrap();
        let j = t.merge(5, e, 0, 1).unwrap();
        assert_eq!(t.neighbors(5, j, 0).unwrap(), Vec::<u8>::new());
        assert!(t.is_deleted(5, j, 1).unwrap());
    }

    #[test]
    fn merges_match_oracle_exhaustively_r4() {
        // every merge transition equals oracle merge + re-encode
        let t = MicroTable::build(4).unwrap();
        for k in 2..=5u8 {
            for idx in 0..t.stratum_len(k).unwrap() as u32 {
                for u in 0..k - 1 {
                    for v in 0..k - 1 {
                        if u == v
                            || t.is_deleted(k, idx, u).unwrap()
                            || t.is_deleted(k, idx, v).unwrap()
                        {
                            continue;
                        }
                        let mut g = t.to_graph(k, idx).unwrap();
                        g.merge(u as u32, v as u32).unwrap();
                        match t.merge(k, idx, u, v) {
                            Ok(j) => {
                                assert_eq!(t.to_graph(k, j).unwrap(), g, "k={k} idx={idx} {u},{v}");
                                assert!(t.is_deleted(k, j, v).unwrap());
                            }
                            Err(Error::NonplanarResult(..)) => {
                                // only reachable for non-adjacent pairs
                                assert!(!t.adjacent(k, idx, u, v).unwrap());
                            }
                            Err(e) => panic!("unexpected error {e}"),
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn stored_graphs_pass_tiny_planarity() {
        let t = MicroTable::build(4).unwrap();
        for k in 1..=5u8 {
            for idx in 0..t.stratum_len(k).unwrap() as u32 {
                let mask = t.decode(k, idx).unwrap();
                // rebuild over all real labels, ignoring deletion marks
                let mut g = LabeledGraph::new();
                for x in 0..k - 1 {
                    g.add_vertex(x as u32);
                }
                let mut ok = true;
                for a in 0..k - 1 {
                    for b in a + 1..k - 1 {
                        if has_pair(mask, a, b) {
                            g.add_edge(a as u32, b as u32).unwrap();
                            ok = true;
                        }
                    }
                }
                assert!(ok);
                assert!(tiny_planarity(&g).unwrap(), "k={k} idx={idx}");
            }
        }
    }

    #[test]
    fn cache_roundtrip() {
        let t = MicroTable::build(3).unwrap();
        let dir = std::env::temp_dir().join("mtbl_test_cache.bin");
        t.write_cache(&dir).unwrap();
        let t2 = MicroTable::read_cache(&dir).unwrap();
        assert_eq!(t2.r_prime(), 3);
        for k in 1..=4u8 {
            assert_eq!(t.stratum_len(k).unwrap(), t2.stratum_len(k).unwrap());
            for idx in 0..t.stratum_len(k).unwrap() as u32 {
                assert_eq!(t.decode(k, idx).unwrap(), t2.decode(k, idx).unwrap());
            }
        }
        let _ = std::fs::remove_file(dir);
    }

    #[test]
    fn generated_tiny_graphs_are_planar() {
        use crate::graph::generate_planar;
        for n in 1..=8u32 {
            for seed in 0..4 {
                let g = generate_planar(n, seed);
                assert!(tiny_planarity(&g).unwrap(), "n={n} seed={seed}");
            }
        }
    }

    #[test]
    fn cap_enforced() {
        assert_eq!(MicroTable::build(7).unwrap_err(), Error::CapExceeded(7));
        assert!(MicroTable::build(1).is_err());
    }
}
