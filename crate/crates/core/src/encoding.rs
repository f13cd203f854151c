//! The assembled succinct dynamic encoding: boundary graphs, micro-graph
//! table indices, label hierarchies, dynamic mappings and degree arrays,
//! with edge contraction, vertex deletion and (in hashing mode) adjacency
//! queries and edge deletion.
//!
//! Labels live on three levels. Global labels number non-boundary vertices
//! piece by piece, then boundary vertices. Mini labels inside a piece come
//! in four blocks: plain vertices (grouped by micro graph), duplicates of
//! global boundary vertices, plain inner-boundary vertices, and duplicates
//! that are also inner boundary. Micro labels are ordered by color class:
//! simple, global-boundary, mini-boundary, double-boundary.
//!
//! Dynamic inverse maps store internal ids of the bookkeeping graphs and
//! externalize on read, so merge-time rewrites stay proportional to the
//! absorbed side.

use std::collections::HashMap;
use std::hash::BuildHasherDefault;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::forbidden::{ForbiddenGraph, InsertOutcome};
use crate::graph::LabeledGraph;
use crate::mappings::{DynInverse, HFamily, IntExtMap};
use crate::microtable::MicroTable;
use crate::partition::{build_two_level, PartitionConfig};
use crate::succinct::{BitVector, CompactArray};

type DetHasher = BuildHasherDefault<std::collections::hash_map::DefaultHasher>;

const SKIP: u32 = u32::MAX;

/// Mutation work and query probe counters.
#[derive(Debug, Default)]
pub struct Counters {
    /// Structure operations on the mutation path.
    pub work: u64,
    /// Query-side structure probes.
    pub probes: AtomicU64,
    /// Full duplicate-range scans during micro-label searches.
    pub fallback_scans: u64,
    /// Free-assignment requests that would need a name outside the managed
    /// set; must stay zero when driven from the public operations.
    pub m2_special_attempts: u64,
}

#[derive(Debug, Clone)]
struct Micro {
    real: u8,
    idx: u32,
    c_g: u8,
    c_m: u8,
    c_d: u8,
    /// Internal ids of the mini bookkeeping family, one per label in
    /// `[c_g, real)`.
    dyn_inv: CompactArray,
}

impl Micro {
    fn k(&self) -> u8 {
        self.real + 1
    }
}

struct Piece {
    n_mini: u32,
    /// Managed set `[d_start, n_mini)`: inner boundary plus duplicates.
    d_start: u32,
    /// Inner boundary `[dp_start, n_mini)`.
    dp_start: u32,
    b1_len: u32,
    b3_len: u32,
    g_b1_start: u32,
    g_b3_start: u32,
    /// Duplicate name set (blocks 2 and 4).
    delta_names: crate::succinct::IndexableDictionary,
    intext: IntExtMap,
    /// Duplicate name -> internal id in the global bookkeeping family.
    phi_inv: DynInverse,
    /// Piece degree per managed name, indexed by `name - d_start`.
    deg_i: CompactArray,
    /// Physical mini currently represents a global boundary vertex.
    rep: Vec<bool>,
    mini_deleted: Vec<bool>,
    fi: ForbiddenGraph<()>,
    fpi: ForbiddenGraph<()>,
    hfam: HFamily,
    /// Entries whose duplicate has a boundary-colored neighbor; serves the
    /// mini-label search.
    hq: ForbiddenGraph<u32>,
    micros: Vec<Micro>,
    /// Per micro: first block-1 mini label of its simple color class.
    plain_off: Vec<u32>,
    /// (block-1 start, micro) for micros with simple vertices, sorted.
    plain_lookup: Vec<(u32, u32)>,
}

impl Piece {
    fn in_d(&self, name: u32) -> bool {
        name >= self.d_start && name < self.n_mini
    }

    fn is_dp(&self, phys: u32) -> bool {
        phys >= self.dp_start
    }

    fn phys(&self, name: u32) -> u32 {
        self.intext.internal(name)
    }

    fn name_of(&self, phys: u32) -> u32 {
        self.intext.external(phys)
    }

    fn hq_node(&self, j: u32) -> u32 {
        self.n_mini + j
    }
}

/// The succinct dynamic encoding of a planar graph.
pub struct DynamicEncoding {
    table: Arc<MicroTable>,
    n: u32,
    boundary_count: u32,
    vd: Option<u32>,
    pieces: Vec<Piece>,
    /// (global start, length, piece, name base) for plain vertices.
    plain_intervals: Vec<(u32, u32, u32, u32)>,
    f: ForbiddenGraph<()>,
    hglob: HFamily,
    deg: CompactArray,
    deleted: BitVector,
    adj_vd: BitVector,
    hashing: bool,
    dup_of: Option<HashMap<(u32, u32), u32, DetHasher>>,
    micro_of: Option<HashMap<(u32, u32, u32), u8, DetHasher>>,
    pub counters: Counters,
}

/// Relabeling between input labels and the encoding's global labels.
#[derive(Debug, Clone)]
pub struct Relabeling {
    pub to_global: Vec<u32>,
    pub to_original: Vec<u32>,
}

impl DynamicEncoding {
    fn gb_off(&self) -> u32 {
        self.n - self.boundary_count
    }

    fn is_gb(&self, g: u32) -> bool {
        g >= self.gb_off()
    }

    fn dense(&self, g: u32) -> u32 {
        debug_assert!(self.is_gb(g));
        g - self.gb_off()
    }

    fn probe(&self, k: u64) {
        self.counters.probes.fetch_add(k, Ordering::Relaxed);
    }

    pub fn vertex_universe(&self) -> u32 {
        self.n
    }

    pub fn dummy_label(&self) -> Option<u32> {
        self.vd
    }

    pub fn is_live(&self, g: u32) -> bool {
        g < self.n && !self.deleted.get(g as usize) && Some(g) != self.vd
    }

    pub fn live_vertices(&self) -> Vec<u32> {
        (0..self.n).filter(|&g| self.is_live(g)).collect()
    }

    fn validate_live(&self, g: u32) -> Result<()> {
        if g >= self.n || Some(g) == self.vd {
            return Err(Error::UnknownVertex(g));
        }
        if self.deleted.get(g as usize) {
            return Err(Error::Deleted(g));
        }
        Ok(())
    }

    // ---- static translations -------------------------------------------

    /// Piece and mini name of a non-boundary global label.
    fn plain_lookup(&self, g: u32) -> (u32, u32) {
        debug_assert!(!self.is_gb(g));
        let pos = self
            .plain_intervals
            .partition_point(|&(start, _, _, _)| start <= g)
            - 1;
        let (start, len, piece, base) = self.plain_intervals[pos];
        debug_assert!(g >= start && g < start + len);
        (piece, base + (g - start))
    }

    /// Static micro graph of a plain (block 1) physical mini.
    fn static_micro(&self, i: u32, phys: u32) -> (u32, u8) {
        let pc = &self.pieces[i as usize];
        debug_assert!(phys < pc.b1_len);
        let pos = pc.plain_lookup.partition_point(|&(off, _)| off <= phys) - 1;
        let (off, j) = pc.plain_lookup[pos];
        (j, (phys - off) as u8)
    }

    /// Micro label -> physical mini label.
    fn micro_to_phys(&self, i: u32, j: u32, x: u8) -> u32 {
        let pc = &self.pieces[i as usize];
        let m = &pc.micros[j as usize];
        if x >= m.c_g {
            let hint = m.dyn_inv.get((x - m.c_g) as usize) as u32;
            pc.hfam.member_name_of_internal(hint)
        } else {
            pc.plain_off[j as usize] + x as u32
        }
    }

    /// Mini name -> global label.
    fn mini_to_global(&self, i: u32, name: u32) -> u32 {
        let pc = &self.pieces[i as usize];
        if pc.delta_names.member(name as usize) {
            let hint = pc.phi_inv.get(name).unwrap();
            self.gb_off() + self.hglob.member_name_of_internal(hint)
        } else if name < pc.b1_len {
            pc.g_b1_start + name
        } else {
            debug_assert!(name >= pc.dp_start && name < pc.dp_start + pc.b3_len);
            pc.g_b3_start + (name - pc.dp_start)
        }
    }

    fn table_state(&self, i: u32, j: u32) -> (u8, u32) {
        let m = &self.pieces[i as usize].micros[j as usize];
        (m.k(), m.idx)
    }

    // ---- events ---------------------------------------------------------

    /// One stored piece edge vanished (`to_f` = it moved to the global
    /// boundary graph instead of disappearing from the graph). Both ends
    /// are (physical, charged name); SKIP names belong to vertices being
    /// deleted outright.
    fn ev_mini_edge(&mut self, i: u32, ends: [(u32, u32); 2], to_f: bool) {
        self.counters.work += 1;
        for &(phys, name) in &ends {
            if name == SKIP {
                continue;
            }
            let pc = &mut self.pieces[i as usize];
            if pc.in_d(name) {
                let slot = (name - pc.d_start) as usize;
                let val = pc.deg_i.get(slot);
                debug_assert!(val > 0, "piece degree underflow");
                pc.deg_i.set(slot, val - 1);
                if val == 1 && pc.rep[phys as usize] {
                    let hint = pc.phi_inv.get(name).unwrap();
                    let ud = self.hglob.member_name_of_internal(hint);
                    self.hglob.nonzero_update(ud, i, name, false).unwrap();
                }
            }
            if !to_f {
                let g = self.mini_to_global(i, name);
                if self.is_gb(g) {
                    let d = self.dense(g) as usize;
                    let val = self.deg.get(d);
                    debug_assert!(val > 0, "degree underflow for {g}");
                    self.deg.set(d, val - 1);
                }
            }
        }
    }

    /// An edge stored in the global boundary graph vanished.
    fn ev_f_edge(&mut self, d1: u32, d2: u32) {
        self.counters.work += 1;
        for d in [d1, d2] {
            if d == SKIP {
                continue;
            }
            let val = self.deg.get(d as usize);
            debug_assert!(val > 0);
            self.deg.set(d as usize, val - 1);
        }
    }

    // ---- micro-level synchronization -------------------------------------

    /// Recomputes the positive-degree and boundary-neighbor entries for a
    /// live boundary-colored micro label.
    fn sync_micro_vertex(&mut self, i: u32, j: u32, x: u8) {
        let (k, idx) = self.table_state(i, j);
        let pc = &self.pieces[i as usize];
        let m = &pc.micros[j as usize];
        if x < m.c_g {
            return;
        }
        if self.table.is_deleted(k, idx, x).unwrap() {
            return;
        }
        let hint = m.dyn_inv.get((x - m.c_g) as usize) as u32;
        let phys = pc.hfam.member_name_of_internal(hint);
        if pc.mini_deleted[phys as usize] {
            return;
        }
        let d = self.table.degree(k, idx, x).unwrap();
        let is_dp = pc.is_dp(phys);
        let has_bnd = !self
            .table
            .range_neighbors(k, idx, x, m.c_g, m.real.saturating_sub(1))
            .unwrap()
            .is_empty();
        let pc = &mut self.pieces[i as usize];
        pc.hfam.nonzero_update(phys, j, x as u32, d > 0).unwrap();
        if is_dp {
            let node = pc.hq_node(j);
            let present = pc.hq.adjacent(phys, node).unwrap_or(false);
            match (present, has_bnd) {
                (false, true) => {
                    pc.hq.insert(phys, node, x as u32).unwrap();
                }
                (true, false) => {
                    pc.hq.delete_edge(phys, node).unwrap();
                }
                (true, true) => {
                    pc.hq.set_payload(phys, node, x as u32).unwrap();
                }
                (false, false) => {}
            }
        }
        self.counters.work += 1;
    }

    // the hashing mirrors are keyed by the bookkeeping graphs' internal ids,
    // which survive free-assignment renames

    fn hash_set_micro(&mut self, i: u32, j: u32, internal: u32, label: u8) {
        if let Some(m) = self.micro_of.as_mut() {
            m.insert((i, j, internal), label);
        }
    }

    fn hash_del_micro(&mut self, i: u32, j: u32, internal: u32) {
        if let Some(m) = self.micro_of.as_mut() {
            m.remove(&(i, j, internal));
        }
    }

    fn hash_set_dup(&mut self, internal: u32, i: u32, name: u32) {
        if let Some(m) = self.dup_of.as_mut() {
            m.insert((internal, i), name);
        }
    }

    fn hash_del_dup(&mut self, internal: u32, i: u32) {
        if let Some(m) = self.dup_of.as_mut() {
            m.remove(&(internal, i));
        }
    }

    // ---- micro operations -------------------------------------------------

    /// Classifies a stored piece edge by the current statuses of its
    /// endpoints: the global boundary graph, the mini boundary graph, or the
    /// micro graph itself.
    fn edge_home(&self, i: u32, pa: u32, pb: u32) -> EdgeHome {
        let pc = &self.pieces[i as usize];
        if pc.rep[pa as usize] && pc.rep[pb as usize] {
            EdgeHome::Global
        } else if pc.is_dp(pa) && pc.is_dp(pb) {
            EdgeHome::MiniBoundary
        } else {
            EdgeHome::Micro
        }
    }

    /// Merges `kill` into `keep` inside micro graph `j`, extracts edges that
    /// must leave the micro graph, and keeps every derived structure in sync.
    /// `owner` is the surviving (physical, charged name) of the merged mini
    /// vertex. Returns global edge pairs bound for the boundary graph F plus
    /// the boundary-colored partner physicals the killed side contributed,
    /// which the caller must deduplicate across structures.
    fn micro_merge_op(
        &mut self,
        i: u32,
        j: u32,
        keep: u8,
        kill: u8,
        owner: (u32, u32),
    ) -> (Vec<(u32, u32)>, Vec<u32>) {
        let (k, idx) = self.table_state(i, j);
        let nk = self.table.neighbors(k, idx, keep).unwrap();
        let nv = self.table.neighbors(k, idx, kill).unwrap();
        let direct = nk.contains(&kill);
        let commons: Vec<u8> = nk
            .iter()
            .copied()
            .filter(|x| *x != kill && nv.contains(x))
            .collect();
        // boundary-colored partners brought in by the killed side may hold
        // a second copy of the merged edge in another structure
        let c_g = self.pieces[i as usize].micros[j as usize].c_g;
        let killed_partners: Vec<u32> = nv
            .iter()
            .copied()
            .filter(|&x| x != keep && x >= c_g)
            .map(|x| self.micro_to_phys(i, j, x))
            .collect();
        self.counters.work += (nk.len() + nv.len()) as u64 + 1;

        let new_idx = self
            .table
            .merge(k, idx, keep, kill)
            .expect("minor-driven micro merges stay planar");
        self.pieces[i as usize].micros[j as usize].idx = new_idx;

        if direct {
            self.ev_mini_edge(i, [owner, owner], false);
        }
        for &x in &commons {
            let pxp = self.micro_to_phys(i, j, x);
            let pxn = self.pieces[i as usize].name_of(pxp);
            self.ev_mini_edge(i, [(pxp, pxn), owner], false);
        }

        let (ups, moved) = self.extract_forbidden_edges(i, j, keep, owner);
        let mut killed_partners = killed_partners;
        killed_partners.extend(moved);

        // refresh derived entries around the merge: the killed side's
        // partners swapped a neighbor, which can flip their
        // boundary-colored-neighbor predicate either way
        let mut touched: Vec<u8> = commons.clone();
        touched.extend(nv.iter().copied().filter(|&y| y != keep));
        touched.push(keep);
        touched.sort_unstable();
        touched.dedup();
        for x in touched {
            self.sync_micro_vertex(i, j, x);
        }
        (ups, killed_partners)
    }

    /// After a duplicate-set merge, an edge of the merged vertex may be
    /// stored several times: once per micro graph the two sides occupied,
    /// or in the mini boundary graph and a micro graph. Keeps one copy
    /// (preferring the boundary graph) and collapses the rest.
    fn dedup_partner(&mut self, i: u32, owner: (u32, u32), px: u32) {
        let (both_dp, mut in_fi, sites, nx) = {
            let pc = &self.pieces[i as usize];
            if pc.mini_deleted[px as usize] || px == owner.0 {
                return;
            }
            let both_dp = pc.is_dp(owner.0) && pc.is_dp(px);
            let in_fi = both_dp && pc.fi.adjacent(owner.0, px).unwrap_or(false);
            let mut sites: Vec<(u32, u8, u8)> = Vec::new();
            for (j, xd) in pc.hfam.iter(px).unwrap_or_default() {
                if let Ok(true) = pc.hfam.has_entry(owner.0, j) {
                    let sd = pc.hfam.payload(owner.0, j).unwrap();
                    let m = &pc.micros[j as usize];
                    if self
                        .table
                        .adjacent(m.k(), m.idx, sd as u8, xd as u8)
                        .unwrap_or(false)
                    {
                        sites.push((j, sd as u8, xd as u8));
                    }
                }
            }
            (both_dp, in_fi, sites, pc.name_of(px))
        };
        self.counters.work += sites.len() as u64 + 1;
        let total = sites.len() + usize::from(in_fi);
        if total == 0 {
            return;
        }
        let mut keep_micro = if in_fi { None } else { Some(sites[0].0) };
        if both_dp && !in_fi {
            // a lone micro copy of an inner-boundary pair belongs in F_i
            let (j, sd, xd) = sites[0];
            let (k, idx) = self.table_state(i, j);
            let new_idx = self.table.batch_delete(k, idx, sd, xd, xd).unwrap();
            self.pieces[i as usize].micros[j as usize].idx = new_idx;
            {
                let pc = &mut self.pieces[i as usize];
                let _ = pc.fi.insert(owner.0, px, ());
                if pc.rep[owner.0 as usize] || pc.rep[px as usize] {
                    let _ = pc.fpi.insert(owner.0, px, ());
                }
            }
            self.sync_micro_vertex(i, j, sd);
            self.sync_micro_vertex(i, j, xd);
            in_fi = true;
            keep_micro = None;
        }
        if total <= 1 {
            return;
        }
        let _ = in_fi;
        for &(j, sd, xd) in &sites {
            if Some(j) == keep_micro {
                continue;
            }
            let (k, idx) = self.table_state(i, j);
            if !self.table.adjacent(k, idx, sd, xd).unwrap_or(false) {
                continue;
            }
            let new_idx = self.table.delete_edge(k, idx, sd, xd).unwrap();
            self.pieces[i as usize].micros[j as usize].idx = new_idx;
            self.ev_mini_edge(i, [owner, (px, nx)], false);
            self.sync_micro_vertex(i, j, sd);
            self.sync_micro_vertex(i, j, xd);
        }
    }

    /// Scans the neighborhood of `x` and pulls out every edge that the
    /// edge-singleton rule assigns to F or to the mini boundary graph.
    fn extract_forbidden_edges(
        &mut self,
        i: u32,
        j: u32,
        x: u8,
        owner: (u32, u32),
    ) -> (Vec<(u32, u32)>, Vec<u32>) {
        let (k, idx0) = self.table_state(i, j);
        let mut idx = idx0;
        let mut ups = Vec::new();
        let mut moved = Vec::new();
        let partners = self.table.neighbors(k, idx, x).unwrap();
        self.counters.work += partners.len() as u64;
        let mut touched = Vec::new();
        for y in partners {
            let py = self.micro_to_phys(i, j, y);
            match self.edge_home(i, owner.0, py) {
                EdgeHome::Micro => continue,
                EdgeHome::Global => {
                    idx = self.table.batch_delete(k, idx, x, y, y).unwrap();
                    self.pieces[i as usize].micros[j as usize].idx = idx;
                    let ny = self.pieces[i as usize].name_of(py);
                    let ga = self.mini_to_global(i, owner.1);
                    let gb = self.mini_to_global(i, ny);
                    self.ev_mini_edge(i, [owner, (py, ny)], true);
                    ups.push((ga, gb));
                    moved.push(py);
                    touched.push(y);
                }
                EdgeHome::MiniBoundary => {
                    idx = self.table.batch_delete(k, idx, x, y, y).unwrap();
                    self.pieces[i as usize].micros[j as usize].idx = idx;
                    let ny = self.pieces[i as usize].name_of(py);
                    let pc = &mut self.pieces[i as usize];
                    match pc.fi.insert(owner.0, py, ()) {
                        Ok(InsertOutcome::Inserted) => {
                            if pc.rep[owner.0 as usize] || pc.rep[py as usize] {
                                let _ = pc.fpi.insert(owner.0, py, ());
                            }
                        }
                        Ok(InsertOutcome::RejectedForbidden) => {
                            unreachable!("rep-rep pairs are routed to F")
                        }
                        Err(Error::EdgeExists(..)) => {
                            // the true edge collapsed onto an existing one
                            self.ev_mini_edge(i, [owner, (py, ny)], false);
                        }
                        Err(e) => panic!("fi insert: {e}"),
                    }
                    moved.push(py);
                    touched.push(y);
                }
            }
        }
        for y in touched {
            self.sync_micro_vertex(i, j, y);
        }
        self.sync_micro_vertex(i, j, x);
        (ups, moved)
    }

    /// Removes a micro vertex outright: all incident edges disappear from
    /// the graph. `charge_own` names the slot charged for the deleted side
    /// (SKIP when the owning vertex itself is being deleted).
    fn micro_delete_vertex(&mut self, i: u32, j: u32, x: u8, own: (u32, u32)) {
        let (k, idx) = self.table_state(i, j);
        let partners = self.table.neighbors(k, idx, x).unwrap();
        self.counters.work += partners.len() as u64 + 1;
        let new_idx = self.table.delete_vertex(k, idx, x).unwrap();
        self.pieces[i as usize].micros[j as usize].idx = new_idx;
        for y in partners {
            let py = self.micro_to_phys(i, j, y);
            let ny = self.pieces[i as usize].name_of(py);
            self.ev_mini_edge(i, [own, (py, ny)], false);
            self.sync_micro_vertex(i, j, y);
        }
        if let Ok(internal) = self.pieces[i as usize].hfam.internal_of_member(own.0) {
            self.hash_del_micro(i, j, internal);
        }
    }

    // ---- piece-level merge ------------------------------------------------

    /// Searches the duplicate of physical `target` among the
    /// boundary-colored neighbors of micro label `from`; falls back to
    /// scanning the whole duplicate range only for boundary-graph driven
    /// merges.
    fn micro_label_search(
        &mut self,
        i: u32,
        j: u32,
        from: u8,
        target_phys: u32,
        f_driven: bool,
    ) -> Option<u8> {
        let (k, idx) = self.table_state(i, j);
        let m = &self.pieces[i as usize].micros[j as usize];
        let (c_g, real) = (m.c_g, m.real);
        if real == 0 {
            return None;
        }
        for y in self
            .table
            .range_neighbors(k, idx, from, c_g, real - 1)
            .unwrap()
        {
            self.counters.work += 1;
            if self.micro_to_phys(i, j, y) == target_phys {
                return Some(y);
            }
        }
        if !f_driven {
            return None;
        }
        // the special case: the contracted edge lives in F, duplicates need
        // not be adjacent
        self.counters.fallback_scans += 1;
        for y in c_g..real {
            self.counters.work += 1;
            if self.table.is_deleted(k, idx, y).unwrap() {
                continue;
            }
            if self.micro_to_phys(i, j, y) == target_phys {
                return Some(y);
            }
        }
        None
    }

    /// After a physical mini vertex becomes a boundary representative, pull
    /// every now-misplaced edge out of its micro graphs.
    fn sweep_rep_micros(
        &mut self,
        i: u32,
        phys: u32,
        entries: &[(u32, u32)],
    ) -> (Vec<(u32, u32)>, Vec<u32>) {
        let mut ups = Vec::new();
        let mut moved = Vec::new();
        let name = self.pieces[i as usize].name_of(phys);
        for &(j, dup) in entries {
            let (k, idx) = self.table_state(i, j);
            if self.table.is_deleted(k, idx, dup as u8).unwrap() {
                continue;
            }
            let (u, m) = self.extract_forbidden_edges(i, j, dup as u8, (phys, name));
            ups.extend(u);
            moved.extend(m);
        }
        (ups, moved)
    }

    /// Rebuilds the boundary-restricted subgraph entries of `phys` from the
    /// current mini boundary graph state.
    fn resync_fpi(&mut self, i: u32, phys: u32) {
        let pc = &mut self.pieces[i as usize];
        if !pc.is_dp(phys) {
            return;
        }
        let current: Vec<u32> = pc.fpi.neighbors(phys).map(|it| it.map(|(x, _)| x).collect()).unwrap_or_default();
        for x in current {
            let keep = pc.fi.adjacent(phys, x).unwrap_or(false)
                && (pc.rep[phys as usize] || pc.rep[x as usize]);
            if !keep {
                let _ = pc.fpi.delete_edge(phys, x);
            }
        }
        let want: Vec<u32> = pc
            .fi
            .neighbors(phys)
            .map(|it| it.map(|(x, _)| x).collect())
            .unwrap_or_default();
        for x in want {
            if pc.rep[phys as usize] || pc.rep[x as usize] {
                if !pc.fpi.adjacent(phys, x).unwrap_or(false) {
                    let _ = pc.fpi.insert(phys, x, ());
                }
            }
        }
    }

    /// Merges the mini vertices named `a_name` and `b_name` in piece `i`;
    /// the survivor carries `want_name`. Returns edges bound for F.
    fn piece_merge(
        &mut self,
        i: u32,
        a_name: u32,
        b_name: u32,
        want_name: u32,
        require_edge: bool,
    ) -> Result<Vec<(u32, u32)>> {
        debug_assert!(want_name == a_name || want_name == b_name);
        let pc = &self.pieces[i as usize];
        let pa = pc.phys(a_name);
        let pb = pc.phys(b_name);
        debug_assert!(!pc.mini_deleted[pa as usize] && !pc.mini_deleted[pb as usize]);
        let (da, db) = (pc.in_d(a_name), pc.in_d(b_name));
        self.counters.work += 1;
        match (da, db) {
            (false, false) => self.piece_merge_plain(i, a_name, b_name, want_name, require_edge),
            (true, true) => self.piece_merge_managed(i, a_name, b_name, want_name, require_edge),
            _ => {
                let (d_name, p_name) = if da { (a_name, b_name) } else { (b_name, a_name) };
                if want_name != d_name {
                    self.counters.m2_special_attempts += 1;
                    return Err(Error::InvalidConfig(
                        "free assignment needs a managed survivor name".into(),
                    ));
                }
                self.piece_merge_mixed(i, d_name, p_name, require_edge)
            }
        }
    }

    /// Both sides plain: congruent micro merge inside their shared micro.
    fn piece_merge_plain(
        &mut self,
        i: u32,
        a_name: u32,
        b_name: u32,
        want_name: u32,
        require_edge: bool,
    ) -> Result<Vec<(u32, u32)>> {
        let (ja, xa) = self.static_micro(i, a_name);
        let (jb, xb) = self.static_micro(i, b_name);
        if ja != jb {
            return Err(Error::NotAnEdge(a_name, b_name));
        }
        let (k, idx) = self.table_state(i, ja);
        if require_edge && !self.table.adjacent(k, idx, xa, xb).unwrap() {
            return Err(Error::NotAnEdge(a_name, b_name));
        }
        let (keep, kill, loser) = if want_name == a_name {
            (xa, xb, b_name)
        } else {
            (xb, xa, a_name)
        };
        let survivor_phys = self.pieces[i as usize].phys(want_name);
        let (ups, _) = self.micro_merge_op(i, ja, keep, kill, (survivor_phys, want_name));
        debug_assert!(ups.is_empty(), "plain merges cannot spill to F");
        self.pieces[i as usize].mini_deleted[loser as usize] = true;
        Ok(ups)
    }

    /// Exactly one side managed: the managed side must survive; the plain
    /// side lives in a single micro graph where the duplicate is located by
    /// the micro-label search.
    fn piece_merge_mixed(
        &mut self,
        i: u32,
        d_name: u32,
        p_name: u32,
        require_edge: bool,
    ) -> Result<Vec<(u32, u32)>> {
        let pd = self.pieces[i as usize].phys(d_name);
        let pp = self.pieces[i as usize].phys(p_name);
        let (j, pdup) = self.static_micro(i, pp);
        let found = self.micro_label_search(i, j, pdup, pd, false);
        let Some(ddup) = found else {
            debug_assert!(require_edge, "pre-verified merges must find the duplicate");
            return Err(Error::NotAnEdge(d_name, p_name));
        };
        // transfer the plain side's degree into the managed slot
        let (k, idx) = self.table_state(i, j);
        let pdeg = self.table.degree(k, idx, pdup).unwrap() as u64;
        {
            let pc = &mut self.pieces[i as usize];
            let slot = (d_name - pc.d_start) as usize;
            let cur = pc.deg_i.get(slot);
            pc.deg_i.set(slot, cur + pdeg);
        }
        let (ups, killed_partners) = self.micro_merge_op(i, j, ddup, pdup, (pd, d_name));
        self.pieces[i as usize].mini_deleted[pp as usize] = true;
        for px in killed_partners {
            self.dedup_partner(i, (pd, d_name), px);
        }
        Ok(ups)
    }

    /// Both sides managed: the full duplicate-set merge through the mini
    /// bookkeeping family.
    fn piece_merge_managed(
        &mut self,
        i: u32,
        a_name: u32,
        b_name: u32,
        want_name: u32,
        require_edge: bool,
    ) -> Result<Vec<(u32, u32)>> {
        let pc = &self.pieces[i as usize];
        let pa = pc.phys(a_name);
        let pb = pc.phys(b_name);
        let (dpa, dpb) = (pc.is_dp(pa), pc.is_dp(pb));
        if require_edge {
            // only reached from plain-vertex contractions, where both sides
            // are inner boundary and the edge is managed by F_i
            if !(dpa && dpb) || !pc.fi.adjacent(pa, pb).unwrap_or(false) {
                return Err(Error::NotAnEdge(a_name, b_name));
            }
        }
        let survivor = match (dpa, dpb) {
            (true, false) => pa,
            (false, true) => pb,
            _ => {
                let ca = pc.hfam.entry_count(pa).unwrap_or(0);
                let cb = pc.hfam.entry_count(pb).unwrap_or(0);
                if ca >= cb {
                    pa
                } else {
                    pb
                }
            }
        };
        let loser = if survivor == pa { pb } else { pa };
        let rep_a = pc.rep[pa as usize];
        let rep_b = pc.rep[pb as usize];
        let rep_post = rep_a || rep_b;
        let rep_upgrade = rep_post && !pc.rep[survivor as usize];
        let loser_dp = pc.is_dp(loser);
        let survivor_dp = pc.is_dp(survivor);
        let rep_loser = if survivor == pa { rep_b } else { rep_a };

        // step 0: naming, degree transfer, representative status
        let deg_sum = {
            let pc = &self.pieces[i as usize];
            pc.deg_i.get((a_name - pc.d_start) as usize)
                + pc.deg_i.get((b_name - pc.d_start) as usize)
        };
        {
            let pc = &mut self.pieces[i as usize];
            pc.intext.bind(want_name, survivor)?;
            let slot = (want_name - pc.d_start) as usize;
            pc.deg_i.set(slot, deg_sum);
            pc.rep[survivor as usize] = rep_post;
        }
        let owner = (survivor, want_name);
        let status_change = rep_upgrade || rep_loser != rep_post || loser_dp != survivor_dp;
        // micros inherited from the loser may need re-auditing; the merge
        // report cannot name them when the loser was the internally kept
        // side, so snapshot its entries now
        let loser_entries = if status_change {
            self.pieces[i as usize].hfam.iter(loser).unwrap_or_default()
        } else {
            Vec::new()
        };
        let mut ups = Vec::new();

        // step 1: mini boundary graph
        if dpa && dpb {
            let r = {
                let pc = &mut self.pieces[i as usize];
                pc.fi.merge_light(pa, pb, survivor)?
            };
            if r.removed_direct.is_some() {
                self.ev_mini_edge(i, [owner, owner], false);
            }
            let parallels: Vec<u32> = r.discarded_parallel.iter().map(|&(x, _, _)| x).collect();
            for x in parallels {
                let xn = self.pieces[i as usize].name_of(x);
                self.ev_mini_edge(i, [owner, (x, xn)], false);
            }
            for (x, _) in r
                .discarded_forbidden
                .iter()
                .chain(r.purged_forbidden.iter())
            {
                let xn = self.pieces[i as usize].name_of(*x);
                let ga = self.mini_to_global(i, want_name);
                let gb = self.mini_to_global(i, xn);
                self.ev_mini_edge(i, [owner, (*x, xn)], true);
                ups.push((ga, gb));
            }
            {
                let pc = &mut self.pieces[i as usize];
                let _ = pc.fpi.merge_light(pa, pb, survivor);
            }
            self.resync_fpi(i, survivor);
        } else if rep_upgrade && self.pieces[i as usize].is_dp(survivor) {
            let purged = {
                let pc = &mut self.pieces[i as usize];
                pc.fi.make_forbidden(survivor)?
            };
            for (x, _) in purged {
                let xn = self.pieces[i as usize].name_of(x);
                let ga = self.mini_to_global(i, want_name);
                let gb = self.mini_to_global(i, xn);
                self.ev_mini_edge(i, [owner, (x, xn)], true);
                ups.push((ga, gb));
            }
            self.resync_fpi(i, survivor);
        }

        // step 2: duplicate-set merge in the bookkeeping family
        let r = {
            let pc = &mut self.pieces[i as usize];
            pc.hfam.merge(pa, pb, survivor)?
        };
        if dpa && dpb {
            let pc = &mut self.pieces[i as usize];
            let _ = pc.hq.merge_light(pa, pb, survivor);
        }

        // step 3: micros only the absorbed side occupied are re-homed
        for &(j, dup) in &r.only_absorbed {
            let pc = &mut self.pieces[i as usize];
            let m = &mut pc.micros[j as usize];
            debug_assert!(dup as u8 >= m.c_g);
            m.dyn_inv
                .set((dup as u8 - m.c_g) as usize, r.survivor_internal as u64);
            self.hash_del_micro(i, j, r.absorbed_internal);
            self.hash_set_micro(i, j, r.survivor_internal, dup as u8);
            self.sync_micro_vertex(i, j, dup as u8);
        }

        // step 4: shared micros get congruent duplicate merges; the side
        // kept by the family merge keeps its micro label and translation
        let mut dedup_set: Vec<u32> = Vec::new();
        for &(j, pay_a, pay_b) in &r.shared {
            let (kept, killed) = if r.absorbed_was_u {
                (pay_b, pay_a)
            } else {
                (pay_a, pay_b)
            };
            {
                let pc = &mut self.pieces[i as usize];
                pc.hfam.set_entry_payload(survivor, j, kept)?;
            }
            self.hash_del_micro(i, j, r.absorbed_internal);
            self.hash_set_micro(i, j, r.survivor_internal, kept as u8);
            let (u, killed_partners) = self.micro_merge_op(i, j, kept as u8, killed as u8, owner);
            ups.extend(u);
            dedup_set.extend(killed_partners);
        }

        // step 5: when the merged sides disagreed on representative or
        // inner-boundary status, edges hanging off inherited duplicates may
        // now be misplaced; re-audit the affected micros
        if status_change {
            let entries = if rep_upgrade {
                self.pieces[i as usize].hfam.iter(survivor).unwrap_or_default()
            } else {
                loser_entries
            };
            let (u, moved) = self.sweep_rep_micros(i, survivor, &entries);
            ups.extend(u);
            dedup_set.extend(moved);
        }

        // step 6: collapse duplicate storage of merged edges across micros
        // and the mini boundary graph
        for &(j, dup) in &r.only_absorbed {
            let (k, idx) = self.table_state(i, j);
            if self.table.is_deleted(k, idx, dup as u8).unwrap() {
                continue;
            }
            let c_g = self.pieces[i as usize].micros[j as usize].c_g;
            for y in self
                .table
                .range_neighbors(k, idx, dup as u8, c_g, u8::MAX)
                .unwrap()
            {
                dedup_set.push(self.micro_to_phys(i, j, y));
            }
        }
        if dpa && dpb {
            // edges relinked inside the mini boundary graph can shadow a
            // micro copy on the kept side
            let partners: Vec<u32> = self.pieces[i as usize]
                .fi
                .neighbors(survivor)
                .map(|it| it.map(|(x, _)| x).collect())
                .unwrap_or_default();
            dedup_set.extend(partners);
        }
        dedup_set.sort_unstable();
        dedup_set.dedup();
        for px in dedup_set {
            self.dedup_partner(i, owner, px);
        }
        self.pieces[i as usize].mini_deleted[loser as usize] = true;
        Ok(ups)
    }

    // ---- global operations -------------------------------------------------

    fn f_insert_batch(&mut self, ups: Vec<(u32, u32)>) {
        for (ga, gb) in ups {
            debug_assert!(self.is_gb(ga) && self.is_gb(gb), "F edges join boundary vertices");
            let (da, db) = (self.dense(ga), self.dense(gb));
            match self.f.insert(da, db, ()) {
                Ok(InsertOutcome::Inserted) => {}
                Ok(InsertOutcome::RejectedForbidden) => unreachable!("F has no forbidden set"),
                Err(Error::EdgeExists(..)) => {
                    // duplicate storage collapsed into the existing edge
                    self.ev_f_edge(da, db);
                }
                Err(e) => panic!("F insert: {e}"),
            }
            self.counters.work += 1;
        }
    }

    /// Finds the duplicate name of boundary vertex `target` (dense id)
    /// inside piece `i`, starting from the duplicate-free side `v_name`.
    fn mini_label_search(&mut self, i: u32, v_name: u32, target: u32) -> Option<u32> {
        let pc = &self.pieces[i as usize];
        let pv = pc.phys(v_name);
        let resolve = |enc: &Self, name: u32| -> Option<u32> {
            let pc = &enc.pieces[i as usize];
            if !pc.delta_names.member(name as usize) {
                return None;
            }
            let hint = pc.phi_inv.get(name).ok()?;
            Some(enc.hglob.member_name_of_internal(hint))
        };
        if !pc.is_dp(pv) {
            let (j, vdup) = self.static_micro(i, pv);
            let (k, idx) = self.table_state(i, j);
            let m = &self.pieces[i as usize].micros[j as usize];
            if m.real == 0 {
                return None;
            }
            let (c_g, real) = (m.c_g, m.real);
            for y in self
                .table
                .range_neighbors(k, idx, vdup, c_g, real - 1)
                .unwrap()
            {
                self.counters.work += 1;
                let py = self.micro_to_phys(i, j, y);
                let ny = self.pieces[i as usize].name_of(py);
                if resolve(self, ny) == Some(target) {
                    return Some(ny);
                }
            }
            return None;
        }
        // inner-boundary side: use the duplicate-restricted subgraph and the
        // boundary-colored entry lists
        let fpi_partners: Vec<u32> = self.pieces[i as usize]
            .fpi
            .neighbors(pv)
            .map(|it| it.map(|(x, _)| x).collect())
            .unwrap_or_default();
        for x in fpi_partners {
            self.counters.work += 1;
            let nx = self.pieces[i as usize].name_of(x);
            if resolve(self, nx) == Some(target) {
                return Some(nx);
            }
        }
        let hq_entries: Vec<(u32, u32)> = self.pieces[i as usize]
            .hq
            .neighbors(pv)
            .map(|it| {
                it.map(|(node, &p)| (node - self.pieces[i as usize].n_mini, p))
                    .collect()
            })
            .unwrap_or_default();
        for (j, vdup) in hq_entries {
            let (k, idx) = self.table_state(i, j);
            let m = &self.pieces[i as usize].micros[j as usize];
            if m.real == 0 {
                continue;
            }
            let (c_g, real) = (m.c_g, m.real);
            for y in self
                .table
                .range_neighbors(k, idx, vdup as u8, c_g, real - 1)
                .unwrap()
            {
                self.counters.work += 1;
                let py = self.micro_to_phys(i, j, y);
                let ny = self.pieces[i as usize].name_of(py);
                if resolve(self, ny) == Some(target) {
                    return Some(ny);
                }
            }
        }
        None
    }

    /// Contracts the edge `{a, b}`. The surviving label is the boundary
    /// endpoint if exactly one endpoint is a boundary vertex, otherwise the
    /// endpoint the piece structure can name (the first argument unless its
    /// duplicate is plain while the other's is inner boundary).
    pub fn contract(&mut self, a: u32, b: u32) -> Result<u32> {
        self.validate_live(a)?;
        self.validate_live(b)?;
        if a == b {
            return Err(Error::SameVertex(a));
        }
        let survivor = match (self.is_gb(a), self.is_gb(b)) {
            (true, true) => self.contract_g3(a, b)?,
            (true, false) => self.contract_g2(a, b)?,
            (false, true) => self.contract_g2(b, a)?,
            (false, false) => self.contract_g1(a, b)?,
        };
        let loser = if survivor == a { b } else { a };
        if self.adj_vd.len() > 0 {
            let lv = self.adj_vd.get(loser as usize);
            if lv {
                self.adj_vd.set(survivor as usize, true);
            }
        }
        self.deleted.set(loser as usize, true);
        Ok(survivor)
    }

    fn contract_g1(&mut self, u: u32, v: u32) -> Result<u32> {
        let (iu, u_name) = self.plain_lookup(u);
        let (iv, v_name) = self.plain_lookup(v);
        if iu != iv {
            return Err(Error::NotAnEdge(u, v));
        }
        let pc = &self.pieces[iu as usize];
        let (dpu, dpv) = (pc.is_dp(pc.phys(u_name)), pc.is_dp(pc.phys(v_name)));
        let survivor = if !dpu && dpv { v } else { u };
        let want = if survivor == u { u_name } else { v_name };
        let ups = self.piece_merge(iu, u_name, v_name, want, true)?;
        debug_assert!(ups.is_empty(), "plain contractions cannot reach F");
        Ok(survivor)
    }

    fn contract_g2(&mut self, u: u32, v: u32) -> Result<u32> {
        let ud = self.dense(u);
        let (i, v_name) = self.plain_lookup(v);
        let Some(u_name) = self.mini_label_search(i, v_name, ud) else {
            return Err(Error::NotAnEdge(u, v));
        };
        // absorb v's degree into u before the events start subtracting
        let vdeg = {
            let pc = &self.pieces[i as usize];
            let pv = pc.phys(v_name);
            if pc.in_d(v_name) {
                pc.deg_i.get((v_name - pc.d_start) as usize)
            } else {
                let (j, vdup) = self.static_micro(i, pv);
                let (k, idx) = self.table_state(i, j);
                self.table.degree(k, idx, vdup).unwrap() as u64
            }
        };
        let du = self.deg.get(ud as usize);
        self.deg.set(ud as usize, du + vdeg);
        let ups = self.piece_merge(i, u_name, v_name, u_name, false)?;
        self.f_insert_batch(ups);
        // the merged duplicate's positive-degree entry may need flipping on
        let pc = &self.pieces[i as usize];
        let positive = pc.deg_i.get((u_name - pc.d_start) as usize) > 0;
        self.hglob.nonzero_update(ud, i, u_name, positive)?;
        Ok(u)
    }

    fn contract_g3(&mut self, u: u32, v: u32) -> Result<u32> {
        let ud = self.dense(u);
        let vd = self.dense(v);
        if !self.f.adjacent(ud, vd)? {
            return Err(Error::NotAnEdge(u, v));
        }
        let dv = self.deg.get(vd as usize);
        let du = self.deg.get(ud as usize);
        self.deg.set(ud as usize, du + dv);
        let rf = self.f.merge_light(ud, vd, ud)?;
        debug_assert!(rf.removed_direct.is_some());
        self.ev_f_edge(ud, ud);
        let parallels: Vec<u32> = rf.discarded_parallel.iter().map(|&(x, _, _)| x).collect();
        for x in parallels {
            self.ev_f_edge(ud, x);
        }
        self.counters.work += 1 + rf.discarded_parallel.len() as u64;

        let r = self.hglob.merge(ud, vd, ud)?;
        let mut ups = Vec::new();
        for &(i, pay_u, pay_v) in &r.shared {
            let kept = if r.absorbed_was_u { pay_v } else { pay_u };
            self.pieces[i as usize]
                .phi_inv
                .set(kept, r.survivor_internal)?;
            self.hglob.set_entry_payload(ud, i, kept)?;
            self.hash_del_dup(r.absorbed_internal, i);
            self.hash_set_dup(r.survivor_internal, i, kept);
            ups.extend(self.piece_merge(i, pay_u, pay_v, kept, false)?);
        }
        for &(i, pay) in &r.only_absorbed {
            self.pieces[i as usize]
                .phi_inv
                .set(pay, r.survivor_internal)?;
            self.hash_del_dup(r.absorbed_internal, i);
            self.hash_set_dup(r.survivor_internal, i, pay);
        }
        self.f_insert_batch(ups);
        Ok(u)
    }

    /// Deletes a vertex and all incident edges.
    pub fn delete_vertex(&mut self, g: u32) -> Result<()> {
        self.validate_live(g)?;
        if self.is_gb(g) {
            let gd = self.dense(g);
            let internal = self.hglob.internal_of_member(gd)?;
            let entries = self.hglob.iter(gd)?;
            for (i, name) in entries {
                self.piece_delete_dup(i, name);
                self.hash_del_dup(internal, i);
            }
            let f_partners: Vec<u32> = self.f.neighbors(gd)?.map(|(x, _)| x).collect();
            for x in f_partners {
                self.ev_f_edge(SKIP, x);
            }
            let _ = self.f.delete_vertex(gd)?;
            let _ = self.hglob.delete_member(gd)?;
        } else {
            let (i, name) = self.plain_lookup(g);
            self.piece_delete_dup(i, name);
        }
        self.deleted.set(g as usize, true);
        Ok(())
    }

    fn piece_delete_dup(&mut self, i: u32, name: u32) {
        let pc = &self.pieces[i as usize];
        let phys = pc.phys(name);
        if pc.in_d(name) {
            let entries = self.pieces[i as usize].hfam.iter(phys).unwrap_or_default();
            for (j, dup) in entries {
                self.micro_delete_vertex(i, j, dup as u8, (phys, SKIP));
            }
            let is_dp = self.pieces[i as usize].is_dp(phys);
            if is_dp {
                let partners: Vec<u32> = self.pieces[i as usize]
                    .fi
                    .neighbors(phys)
                    .map(|it| it.map(|(x, _)| x).collect())
                    .unwrap_or_default();
                for x in partners {
                    let xn = self.pieces[i as usize].name_of(x);
                    self.ev_mini_edge(i, [(phys, SKIP), (x, xn)], false);
                }
                let pc = &mut self.pieces[i as usize];
                let _ = pc.fi.delete_vertex(phys);
                let _ = pc.fpi.delete_vertex(phys);
            }
            let pc = &mut self.pieces[i as usize];
            let _ = pc.hfam.delete_member(phys);
            if is_dp {
                let _ = pc.hq.delete_vertex(phys);
            }
            pc.mini_deleted[phys as usize] = true;
        } else {
            let (j, dup) = self.static_micro(i, phys);
            self.micro_delete_vertex(i, j, dup, (phys, SKIP));
            self.pieces[i as usize].mini_deleted[phys as usize] = true;
        }
    }

    /// Adjacency query; hashing mode only.
    pub fn adjacent(&self, a: u32, b: u32) -> Result<bool> {
        if !self.hashing {
            return Err(Error::HashingRequired);
        }
        self.validate_live(a)?;
        self.validate_live(b)?;
        if a == b {
            return Err(Error::SameVertex(a));
        }
        match (self.is_gb(a), self.is_gb(b)) {
            (true, true) => self.f.adjacent(self.dense(a), self.dense(b)),
            (true, false) => self.adjacent_mixed(a, b),
            (false, true) => self.adjacent_mixed(b, a),
            (false, false) => {
                let (ia, a_name) = self.plain_lookup(a);
                let (ib, b_name) = self.plain_lookup(b);
                if ia != ib {
                    return Ok(false);
                }
                self.mini_adjacent(ia, a_name, b_name)
            }
        }
    }

    fn adjacent_mixed(&self, u: u32, v: u32) -> Result<bool> {
        let (i, v_name) = self.plain_lookup(v);
        let ui = self.hglob.internal_of_member(self.dense(u))?;
        let Some(&u_name) = self.dup_of.as_ref().unwrap().get(&(ui, i)) else {
            return Ok(false);
        };
        self.mini_adjacent(i, u_name, v_name)
    }

    fn mini_adjacent(&self, i: u32, a_name: u32, b_name: u32) -> Result<bool> {
        let pc = &self.pieces[i as usize];
        let pa = pc.phys(a_name);
        let pb = pc.phys(b_name);
        if pc.is_dp(pa) && pc.is_dp(pb) {
            return pc.fi.adjacent(pa, pb);
        }
        let micro_of = self.micro_of.as_ref().unwrap();
        // locate the one micro graph that can hold the edge
        let lookup = |phys: u32, j: u32| -> Option<u8> {
            if pc.in_d(pc.name_of(phys)) {
                let internal = pc.hfam.internal_of_member(phys).ok()?;
                micro_of.get(&(i, j, internal)).copied()
            } else {
                let (sj, dup) = self.static_micro(i, phys);
                (sj == j).then_some(dup)
            }
        };
        let (da, db) = (pc.in_d(a_name), pc.in_d(b_name));
        if !da || !db {
            let (plain, other) = if !da { (pa, pb) } else { (pb, pa) };
            let (j, pdup) = self.static_micro(i, plain);
            let Some(odup) = lookup(other, j) else {
                return Ok(false);
            };
            let (k, idx) = self.table_state(i, j);
            return self.table.adjacent(k, idx, pdup, odup);
        }
        // both managed, at least one outside the inner boundary: probe the
        // smaller entry set against the other's duplicates
        let ea = pc.hfam.iter(pa)?;
        let eb = pc.hfam.iter(pb)?;
        let (small, other_phys) = if ea.len() <= eb.len() {
            (ea, pb)
        } else {
            (eb, pa)
        };
        for (j, dup) in small {
            if let Some(odup) = lookup(other_phys, j) {
                let (k, idx) = self.table_state(i, j);
                if self.table.adjacent(k, idx, dup as u8, odup)? {
                    return Ok(true);
                }
            }
        }
        Ok(false)
    }

    /// Edge deletion; hashing mode only.
    pub fn delete_edge(&mut self, a: u32, b: u32) -> Result<()> {
        if !self.hashing {
            return Err(Error::HashingRequired);
        }
        self.validate_live(a)?;
        self.validate_live(b)?;
        if !self.adjacent(a, b)? {
            return Err(Error::NotAnEdge(a, b));
        }
        match (self.is_gb(a), self.is_gb(b)) {
            (true, true) => {
                let (da, db) = (self.dense(a), self.dense(b));
                self.f.delete_edge(da, db)?;
                self.ev_f_edge(da, db);
            }
            (gba, _) => {
                let (u, v) = if gba { (a, b) } else { (b, a) };
                let (i, v_name) = if self.is_gb(u) {
                    self.plain_lookup(v)
                } else {
                    // both plain: shared piece
                    self.plain_lookup(v)
                };
                let u_name = if self.is_gb(u) {
                    let ui = self.hglob.internal_of_member(self.dense(u))?;
                    *self.dup_of.as_ref().unwrap().get(&(ui, i)).unwrap()
                } else {
                    self.plain_lookup(u).1
                };
                self.delete_piece_edge(i, u_name, v_name)?;
            }
        }
        Ok(())
    }

    fn delete_piece_edge(&mut self, i: u32, a_name: u32, b_name: u32) -> Result<()> {
        let pc = &self.pieces[i as usize];
        let pa = pc.phys(a_name);
        let pb = pc.phys(b_name);
        if pc.is_dp(pa) && pc.is_dp(pb) && pc.fi.adjacent(pa, pb).unwrap_or(false) {
            {
                let pc = &mut self.pieces[i as usize];
                pc.fi.delete_edge(pa, pb)?;
                if pc.fpi.adjacent(pa, pb).unwrap_or(false) {
                    pc.fpi.delete_edge(pa, pb)?;
                }
            }
            self.ev_mini_edge(i, [(pa, a_name), (pb, b_name)], false);
            return Ok(());
        }
        // micro-managed: find the shared micro graph
        let micro_of = self.micro_of.as_ref().unwrap();
        let lookup = |phys: u32, name: u32, j: u32| -> Option<u8> {
            if pc.in_d(name) {
                let internal = pc.hfam.internal_of_member(phys).ok()?;
                micro_of.get(&(i, j, internal)).copied()
            } else {
                let (sj, dup) = self.static_micro(i, phys);
                (sj == j).then_some(dup)
            }
        };
        let (j, adup, bdup) = if !pc.in_d(a_name) {
            let (j, adup) = self.static_micro(i, pa);
            let bdup = lookup(pb, b_name, j).ok_or(Error::NotAnEdge(a_name, b_name))?;
            (j, adup, bdup)
        } else if !pc.in_d(b_name) {
            let (j, bdup) = self.static_micro(i, pb);
            let adup = lookup(pa, a_name, j).ok_or(Error::NotAnEdge(a_name, b_name))?;
            (j, adup, bdup)
        } else {
            let ea = pc.hfam.iter(pa)?;
            let mut found = None;
            for (j, adup) in ea {
                if let Some(bdup) = lookup(pb, b_name, j) {
                    let (k, idx) = self.table_state(i, j);
                    if self.table.adjacent(k, idx, adup as u8, bdup)? {
                        found = Some((j, adup as u8, bdup));
                        break;
                    }
                }
            }
            found.ok_or(Error::NotAnEdge(a_name, b_name))?
        };
        let (k, idx) = self.table_state(i, j);
        let new_idx = self.table.delete_edge(k, idx, adup, bdup)?;
        self.pieces[i as usize].micros[j as usize].idx = new_idx;
        self.ev_mini_edge(i, [(pa, a_name), (pb, b_name)], false);
        self.sync_micro_vertex(i, j, adup);
        self.sync_micro_vertex(i, j, bdup);
        Ok(())
    }

    // ---- queries ------------------------------------------------------------

    /// Current neighbors of `g`, each exactly once. Order follows the
    /// structure walk; callers sort for presentation.
    pub fn neighbors(&self, g: u32) -> Result<Vec<u32>> {
        self.validate_live(g)?;
        let mut out = Vec::new();
        if self.is_gb(g) {
            let gd = self.dense(g);
            for (x, _) in self.f.neighbors(gd)? {
                self.probe(1);
                out.push(self.gb_off() + x);
            }
            for (i, name) in self.hglob.iter_pos(gd)? {
                self.probe(1);
                self.emit_piece(i, name, &mut out);
            }
        } else {
            let (i, name) = self.plain_lookup(g);
            self.probe(1);
            self.emit_piece(i, name, &mut out);
        }
        if let Some(vd) = self.vd {
            out.retain(|&x| x != vd);
        }
        Ok(out)
    }

    fn emit_piece(&self, i: u32, name: u32, out: &mut Vec<u32>) {
        let pc = &self.pieces[i as usize];
        let phys = pc.phys(name);
        if pc.is_dp(phys) {
            for (x, _) in pc.fi.neighbors(phys).unwrap() {
                self.probe(1);
                out.push(self.mini_to_global(i, pc.name_of(x)));
            }
        }
        if pc.in_d(name) {
            for (j, dup) in pc.hfam.iter_pos(phys).unwrap() {
                self.probe(1);
                self.emit_micro(i, j, dup as u8, out);
            }
        } else {
            let (j, dup) = self.static_micro(i, phys);
            self.emit_micro(i, j, dup, out);
        }
    }

    fn emit_micro(&self, i: u32, j: u32, x: u8, out: &mut Vec<u32>) {
        let (k, idx) = self.table_state(i, j);
        let pc = &self.pieces[i as usize];
        for y in self.table.neighbors(k, idx, x).unwrap() {
            self.probe(2);
            let py = self.micro_to_phys(i, j, y);
            out.push(self.mini_to_global(i, pc.name_of(py)));
        }
    }

    /// Degree query in constant probes.
    pub fn degree(&self, g: u32) -> Result<u32> {
        self.validate_live(g)?;
        let raw = if self.is_gb(g) {
            self.deg.get(self.dense(g) as usize) as u32
        } else {
            let (i, name) = self.plain_lookup(g);
            let pc = &self.pieces[i as usize];
            let phys = pc.phys(name);
            if pc.is_dp(phys) {
                pc.deg_i.get((name - pc.d_start) as usize) as u32
            } else {
                let (j, dup) = self.static_micro(i, phys);
                let (k, idx) = self.table_state(i, j);
                self.table.degree(k, idx, dup).unwrap()
            }
        };
        let mask = if self.adj_vd.len() > 0 && self.adj_vd.get(g as usize) {
            1
        } else {
            0
        };
        Ok(raw - mask)
    }

    /// All duplicate entries of a boundary vertex, as (piece, mini name).
    pub fn phi(&self, g: u32) -> Result<Vec<(u32, u32)>> {
        self.validate_live(g)?;
        if !self.is_gb(g) {
            return Err(Error::NotBoundary(g));
        }
        self.hglob.iter(self.dense(g))
    }

    pub fn reconstruct(&self) -> LabeledGraph {
        let mut g = LabeledGraph::new();
        for v in self.live_vertices() {
            g.add_vertex(v);
            for w in self.neighbors(v).unwrap() {
                if !g.has_edge(v, w) {
                    g.add_edge(v, w).unwrap();
                }
            }
        }
        g
    }

    pub fn work(&self) -> u64 {
        let mut w = self.counters.work;
        w += self.f.relink_work();
        for pc in &self.pieces {
            w += pc.fi.relink_work() + pc.fpi.relink_work();
            w += pc.hfam.h.relink_work() + pc.hfam.hpos.relink_work() + pc.hq.relink_work();
        }
        w += self.hglob.h.relink_work() + self.hglob.hpos.relink_work();
        w
    }

    pub fn probes_taken(&self) -> u64 {
        self.counters.probes.load(Ordering::Relaxed)
    }

}

enum EdgeHome {
    Global,
    MiniBoundary,
    Micro,
}

impl DynamicEncoding {
    /// Builds the encoding. The input must use dense labels `0..n`; a
    /// disconnected input gets a dummy vertex first, which is masked from
    /// every public output. Returns the encoding and the relabeling between
    /// input labels and global labels.
    pub fn build(
        input: &LabeledGraph,
        cfg: &PartitionConfig,
        table: Arc<MicroTable>,
        hashing: bool,
    ) -> Result<(Self, Relabeling)> {
        cfg.validate()?;
        if cfg.r_prime > table.r_prime() {
            return Err(Error::InvalidConfig(format!(
                "table was built for r' = {}, need {}",
                table.r_prime(),
                cfg.r_prime
            )));
        }
        let n0 = input.vertices().max().map_or(0, |m| m + 1);
        if input.vertex_count() as u32 != n0 || n0 == 0 {
            return Err(Error::InvalidConfig("labels must be dense 0..n, n >= 1".into()));
        }
        // planarity gate: exhaustive for tiny graphs, edge bound otherwise
        if n0 <= 8 {
            if !crate::microtable::tiny_planarity(input)? {
                return Err(Error::NotPlanar("fails the tiny planarity test".into()));
            }
        } else if input.edge_count() > 3 * n0 as usize - 6 {
            return Err(Error::NotPlanar(format!(
                "{} edges exceed 3n-6 = {}",
                input.edge_count(),
                3 * n0 as usize - 6
            )));
        }
        let mut g = input.clone();
        let vd_orig = if g.is_connected() {
            None
        } else {
            Some(g.connect_components())
        };
        let n = g.vertices().max().unwrap() + 1;
        let mut work_cfg = *cfg;
        work_cfg.r_prime = cfg.r_prime.min(table.r_prime());
        let tl = build_two_level(&g, &work_cfg)?;

        // ---- global labels: plains piece by piece, boundary on top
        let x_sorted: Vec<u32> = (0..n).filter(|&v| tl.x_global[v as usize]).collect();
        let b = x_sorted.len() as u32;
        let gb_off = n - b;
        let mut to_global = vec![u32::MAX; n as usize];
        for (d, &orig) in x_sorted.iter().enumerate() {
            to_global[orig as usize] = gb_off + d as u32;
        }

        struct PiecePlan {
            local_to_mini: Vec<u32>,
            mini_to_local: Vec<u32>,
            b1_len: u32,
            b3_len: u32,
            d_start: u32,
            dp_start: u32,
            g_b1_start: u32,
            g_b3_start: u32,
            plain_off: Vec<u32>,
            micro_labels: Vec<Vec<u32>>, // per micro: locals in micro-label order
            micro_classes: Vec<(u8, u8, u8)>, // c_g, c_m, c_d
        }

        let mut plans = Vec::with_capacity(tl.pieces.len());
        let mut next_global = 0u32;
        let mut plain_intervals = Vec::new();
        for (i, pd) in tl.pieces.iter().enumerate() {
            let nv = pd.vertices.len();
            let is_x = |l: usize| tl.x_global[pd.vertices[l] as usize];
            let is_dp = |l: usize| pd.x_inner[l];
            let mut local_to_mini = vec![u32::MAX; nv];
            let mut mini = 0u32;
            // block 1: plain vertices grouped by micro graph
            let mut plain_off = vec![0u32; pd.micro_members.len()];
            for (j, members) in pd.micro_members.iter().enumerate() {
                plain_off[j] = mini;
                for &l in members {
                    if !is_x(l as usize) && !is_dp(l as usize) {
                        local_to_mini[l as usize] = mini;
                        mini += 1;
                    }
                }
            }
            let b1_len = mini;
            // block 2: duplicates outside the inner boundary
            for l in 0..nv {
                if is_x(l) && !is_dp(l) {
                    local_to_mini[l] = mini;
                    mini += 1;
                }
            }
            let dp_start = mini;
            // block 3: plain inner-boundary vertices
            for l in 0..nv {
                if !is_x(l) && is_dp(l) {
                    local_to_mini[l] = mini;
                    mini += 1;
                }
            }
            let b3_len = mini - dp_start;
            // block 4: duplicates on the inner boundary
            for l in 0..nv {
                if is_x(l) && is_dp(l) {
                    local_to_mini[l] = mini;
                    mini += 1;
                }
            }
            debug_assert_eq!(mini as usize, nv);
            let mut mini_to_local = vec![u32::MAX; nv];
            for (l, &m) in local_to_mini.iter().enumerate() {
                mini_to_local[m as usize] = l as u32;
            }
            // globals follow mini order inside each plain block
            let g_b1_start = next_global;
            for m in 0..b1_len {
                let orig = pd.vertices[mini_to_local[m as usize] as usize];
                to_global[orig as usize] = next_global;
                next_global += 1;
            }
            let g_b3_start = next_global;
            for m in dp_start..dp_start + b3_len {
                let orig = pd.vertices[mini_to_local[m as usize] as usize];
                to_global[orig as usize] = next_global;
                next_global += 1;
            }
            if b1_len > 0 {
                plain_intervals.push((g_b1_start, b1_len, i as u32, 0u32));
            }
            if b3_len > 0 {
                plain_intervals.push((g_b3_start, b3_len, i as u32, dp_start));
            }
            // micro labels ordered by color class
            let mut micro_labels = Vec::with_capacity(pd.micro_members.len());
            let mut micro_classes = Vec::with_capacity(pd.micro_members.len());
            for members in &pd.micro_members {
                let mut order = Vec::with_capacity(members.len());
                let class_of = |l: u32| -> u8 {
                    match (is_dp(l as usize), is_x(l as usize)) {
                        (false, false) => 0, // simple
                        (false, true) => 1,  // global-boundary
                        (true, false) => 2,  // mini-boundary
                        (true, true) => 3,   // double-boundary
                    }
                };
                let mut c = [0u8; 4];
                for class in 0..4u8 {
                    for &l in members {
                        if class_of(l) == class {
                            order.push(l);
                        }
                    }
                    if class < 3 {
                        c[class as usize + 1] = order.len() as u8;
                    }
                }
                micro_labels.push(order);
                micro_classes.push((c[1], c[2], c[3]));
            }
            plans.push(PiecePlan {
                local_to_mini,
                mini_to_local,
                b1_len,
                b3_len,
                d_start: b1_len,
                dp_start,
                g_b1_start,
                g_b3_start,
                plain_off,
                micro_labels,
                micro_classes,
            });
        }
        debug_assert_eq!(next_global, gb_off);
        let mut to_original = vec![u32::MAX; n as usize];
        for (o, &gl) in to_global.iter().enumerate() {
            to_original[gl as usize] = o as u32;
        }

        // ---- piece structures
        let mut pieces = Vec::with_capacity(tl.pieces.len());
        for (i, pd) in tl.pieces.iter().enumerate() {
            let plan = &plans[i];
            let nv = pd.vertices.len() as u32;
            let n_micros = pd.micro_members.len();
            let delta_list: Vec<u32> = (plan.d_start..plan.dp_start)
                .chain(plan.dp_start + plan.b3_len..nv)
                .collect();
            let managed: Vec<u32> = (plan.d_start..nv).collect();
            let intext = IntExtMap::new(nv as usize, &managed)?;
            let delta_names =
                crate::succinct::IndexableDictionary::build(nv as usize, &delta_list)?;
            let mut phi_inv = DynInverse::new(
                nv as usize,
                &delta_list,
                (b as usize + tl.pieces.len()).max(2),
            )?;
            for &name in &delta_list {
                let l = plan.mini_to_local[name as usize];
                let orig = pd.vertices[l as usize];
                let dense = to_global[orig as usize] - gb_off;
                phi_inv.set(name, dense)?;
            }
            let b4_start = plan.dp_start + plan.b3_len;
            let mut fi: ForbiddenGraph<()> =
                ForbiddenGraph::new(nv as usize, |p| p >= b4_start);
            let mut fpi: ForbiddenGraph<()> = ForbiddenGraph::new(nv as usize, |_| false);
            let mut rep = vec![false; nv as usize];
            for &name in &delta_list {
                rep[name as usize] = true;
            }
            for &(la, lb) in &pd.fi_edges {
                let (ma, mb) = (
                    plan.local_to_mini[la as usize],
                    plan.local_to_mini[lb as usize],
                );
                debug_assert!(!(rep[ma as usize] && rep[mb as usize]));
                fi.insert(ma, mb, ()).unwrap();
                if rep[ma as usize] || rep[mb as usize] {
                    fpi.insert(ma, mb, ()).unwrap();
                }
            }
            let mut hfam = HFamily::new(nv as usize, n_micros);
            let mut hq: ForbiddenGraph<u32> =
                ForbiddenGraph::new(nv as usize + n_micros, |x| x >= nv);
            let mut micros = Vec::with_capacity(n_micros);
            for (j, members_in_order) in plan.micro_labels.iter().enumerate() {
                let (c_g, c_m, c_d) = plan.micro_classes[j];
                let real = members_in_order.len() as u8;
                let k = real + 1;
                let label_of_local = |l: u32| -> u8 {
                    members_in_order.iter().position(|&x| x == l).unwrap() as u8
                };
                let mut mask = 0u32;
                for &(la, lb) in &pd.micro_edges[j] {
                    let (xa, xb) = (label_of_local(la), label_of_local(lb));
                    let (lo, hi) = if xa < xb { (xa, xb) } else { (xb, xa) };
                    mask |= 1 << ((hi as u32 * (hi as u32 - 1)) / 2 + lo as u32);
                }
                let idx = table.encode(k, mask)?;
                let width = CompactArray::width_for((nv as usize + n_micros).max(2) as u64 - 1);
                let mut dyn_inv =
                    CompactArray::new((real - c_g) as usize, width);
                for x in c_g..real {
                    let l = members_in_order[x as usize];
                    let phys = plan.local_to_mini[l as usize];
                    dyn_inv.set((x - c_g) as usize, phys as u64);
                    let d = table.degree(k, idx, x).unwrap();
                    hfam.add_entry(phys, j as u32, x as u32, d > 0)?;
                    if x >= c_m {
                        let has_bnd = !table
                            .range_neighbors(k, idx, x, c_g, real - 1)
                            .unwrap()
                            .is_empty();
                        if has_bnd {
                            hq.insert(phys, nv + j as u32, x as u32)?;
                        }
                    }
                }
                micros.push(Micro {
                    real,
                    idx,
                    c_g,
                    c_m,
                    c_d,
                    dyn_inv,
                });
            }
            // transient merge sums can briefly exceed the simple-graph cap
            let mut deg_i = CompactArray::new(
                (nv - plan.d_start) as usize,
                CompactArray::width_for(2 * nv.max(2) as u64),
            );
            for name in plan.d_start..nv {
                let mut d = 0u64;
                if name >= plan.dp_start {
                    d += fi.degree(name).unwrap() as u64;
                }
                for (j, dup) in hfam.iter(name)? {
                    let m = &micros[j as usize];
                    d += table.degree(m.k(), m.idx, dup as u8).unwrap() as u64;
                }
                deg_i.set((name - plan.d_start) as usize, d);
            }
            let mut plain_lookup = Vec::new();
            for (j, members) in plan.micro_labels.iter().enumerate() {
                let (c_g, _, _) = plan.micro_classes[j];
                if c_g > 0 {
                    plain_lookup.push((plan.plain_off[j], j as u32));
                    let _ = members;
                }
            }
            pieces.push(Piece {
                n_mini: nv,
                d_start: plan.d_start,
                dp_start: plan.dp_start,
                b1_len: plan.b1_len,
                b3_len: plan.b3_len,
                g_b1_start: plan.g_b1_start,
                g_b3_start: plan.g_b3_start,
                delta_names,
                intext,
                phi_inv,
                deg_i,
                rep,
                mini_deleted: vec![false; nv as usize],
                fi,
                fpi,
                hfam,
                hq,
                micros,
                plain_off: plan.plain_off.clone(),
                plain_lookup,
            });
        }

        // ---- global structures
        let mut f: ForbiddenGraph<()> = ForbiddenGraph::new(b as usize, |_| false);
        for &(a, c) in &tl.f_edges {
            let da = to_global[a as usize] - gb_off;
            let dc = to_global[c as usize] - gb_off;
            f.insert(da, dc, ()).unwrap();
        }
        let mut hglob = HFamily::new(b as usize, tl.pieces.len());
        for (i, pc) in pieces.iter().enumerate() {
            let delta: Vec<u32> = (pc.d_start..pc.dp_start)
                .chain(pc.dp_start + pc.b3_len..pc.n_mini)
                .collect();
            for name in delta {
                let dense = pc.phi_inv.get(name)?;
                let positive = pc.deg_i.get((name - pc.d_start) as usize) > 0;
                hglob.add_entry(dense, i as u32, name, positive)?;
            }
        }

        let vd = vd_orig.map(|o| to_global[o as usize]);
        let mut enc = DynamicEncoding {
            table,
            n,
            boundary_count: b,
            vd,
            pieces,
            plain_intervals,
            f,
            hglob,
            deg: CompactArray::new(b as usize, CompactArray::width_for(2 * n.max(2) as u64)),
            deleted: BitVector::new(n as usize),
            adj_vd: if vd.is_some() {
                BitVector::new(n as usize)
            } else {
                BitVector::new(0)
            },
            hashing,
            dup_of: hashing.then(HashMap::default),
            micro_of: hashing.then(HashMap::default),
            counters: Counters::default(),
        };
        // degree array by counting neighbors through the assembled encoding
        for d in 0..b {
            let cnt = enc.neighbors_raw(gb_off + d)?.len() as u64;
            enc.deg.set(d as usize, cnt);
        }
        if let Some(vd) = vd {
            let vdn = enc.neighbors_raw(vd)?;
            for x in vdn {
                enc.adj_vd.set(x as usize, true);
            }
        }
        if hashing {
            let mut dups = Vec::new();
            for d in 0..b {
                for (i, name) in enc.hglob.iter(d)? {
                    dups.push(((d, i), name));
                }
            }
            let map = enc.dup_of.as_mut().unwrap();
            for (k, v) in dups {
                map.insert(k, v);
            }
            let mut micros = Vec::new();
            for (i, pc) in enc.pieces.iter().enumerate() {
                for phys in pc.d_start..pc.n_mini {
                    for (j, dup) in pc.hfam.iter(phys)? {
                        micros.push(((i as u32, j, phys), dup as u8));
                    }
                }
            }
            let map = enc.micro_of.as_mut().unwrap();
            for (k, v) in micros {
                map.insert(k, v);
            }
        }
        enc.counters.probes.store(0, Ordering::Relaxed);
        Ok((
            enc,
            Relabeling {
                to_global,
                to_original,
            },
        ))
    }

    /// Neighbors including the masked dummy vertex; used at build time.
    fn neighbors_raw(&self, g: u32) -> Result<Vec<u32>> {
        if g >= self.n || self.deleted.get(g as usize) {
            return Err(Error::UnknownVertex(g));
        }
        let mut out = Vec::new();
        if self.is_gb(g) {
            let gd = self.dense(g);
            for (x, _) in self.f.neighbors(gd)? {
                out.push(self.gb_off() + x);
            }
            for (i, name) in self.hglob.iter_pos(gd)? {
                self.emit_piece(i, name, &mut out);
            }
        } else {
            let (i, name) = self.plain_lookup(g);
            self.emit_piece(i, name, &mut out);
        }
        Ok(out)
    }
}

/// Outcome of a full invariant scan.
#[derive(Debug, Default)]
pub struct InvariantReport {
    pub violations: Vec<String>,
}

impl InvariantReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl DynamicEncoding {
    /// Exhaustively verifies the four structural invariants, the degree
    /// arrays, and (when a shadow oracle is attached) reconstruction
    /// equality. Intended for test mode; never mutates.
    pub fn check_invariants(&self, oracle: Option<&LabeledGraph>) -> InvariantReport {
        let mut rpt = InvariantReport::default();
        let mut fail = |msg: String| rpt.violations.push(msg);

        // reconstruction, symmetry, degree arrays
        let recon = self.reconstruct();
        if !recon.check_simple_symmetric() {
            fail("reconstruction is not simple/symmetric".into());
        }
        for v in self.live_vertices() {
            let raw = self.neighbors(v).unwrap();
            let raw_len = raw.len();
            let nb = {
                let mut x = raw;
                x.sort_unstable();
                x.dedup();
                x
            };
            if nb.len() != raw_len {
                fail(format!("vertex {v}: a neighbor is emitted twice"));
            }
            match self.degree(v) {
                Ok(d) if d as usize == nb.len() => {}
                Ok(d) => fail(format!(
                    "vertex {v}: degree array says {d}, neighborhood has {}",
                    nb.len()
                )),
                Err(e) => fail(format!("vertex {v}: degree query failed: {e}")),
            }
        }
        if let Some(orc) = oracle {
            let mut ov: Vec<u32> = orc.vertices().collect();
            ov.sort_unstable();
            if ov != self.live_vertices() {
                fail("live vertex sets differ from the oracle".into());
            } else {
                for v in orc.vertices() {
                    let mut a = self.neighbors(v).unwrap();
                    a.sort_unstable();
                    let b: Vec<u32> = orc.neighbors(v).unwrap().collect();
                    if a != b {
                        fail(format!("vertex {v}: neighborhood differs from the oracle"));
                    }
                }
            }
        }

        // invariant: every stored edge is managed exactly once, in the right
        // structure, and together they reproduce the graph
        let mut managed: std::collections::BTreeMap<(u32, u32), u32> = Default::default();
        let mut record = |a: u32, b: u32| {
            let key = (a.min(b), a.max(b));
            *managed.entry(key).or_insert(0) += 1;
        };
        for (a, b) in self.f.edges() {
            let (ga, gb) = (self.gb_off() + a, self.gb_off() + b);
            if !self.is_gb(ga) || !self.is_gb(gb) {
                fail(format!("F edge {{{ga},{gb}}} touches a non-boundary vertex"));
            }
            record(ga, gb);
        }
        for (i, pc) in self.pieces.iter().enumerate() {
            for (pa, pb) in pc.fi.edges() {
                if !(pc.is_dp(pa) && pc.is_dp(pb)) {
                    fail(format!("piece {i}: F_i edge outside the inner boundary"));
                }
                if pc.rep[pa as usize] && pc.rep[pb as usize] {
                    fail(format!("piece {i}: F_i edge between two representatives"));
                }
                let ga = self.mini_to_global(i as u32, pc.name_of(pa));
                let gb = self.mini_to_global(i as u32, pc.name_of(pb));
                record(ga, gb);
            }
            for (j, m) in pc.micros.iter().enumerate() {
                let k = m.k();
                if !(m.c_g <= m.c_m && m.c_m <= m.c_d && m.c_d <= m.real) {
                    fail(format!("piece {i} micro {j}: color delimiters out of order"));
                }
                for xa in 0..m.real {
                    if self.table.is_deleted(k, m.idx, xa).unwrap() {
                        continue;
                    }
                    for xb in self.table.neighbors(k, m.idx, xa).unwrap() {
                        if xb <= xa {
                            continue;
                        }
                        let pa = self.micro_to_phys(i as u32, j as u32, xa);
                        let pb = self.micro_to_phys(i as u32, j as u32, xb);
                        if pc.rep[pa as usize] && pc.rep[pb as usize] {
                            fail(format!(
                                "piece {i} micro {j}: edge between two representatives"
                            ));
                        } else if pc.is_dp(pa) && pc.is_dp(pb) {
                            fail(format!(
                                "piece {i} micro {j}: edge between two inner-boundary vertices"
                            ));
                        }
                        let ga = self.mini_to_global(i as u32, pc.name_of(pa));
                        let gb = self.mini_to_global(i as u32, pc.name_of(pb));
                        record(ga, gb);
                    }
                }
            }
        }
        for ((a, b), cnt) in &managed {
            if *cnt != 1 {
                fail(format!("edge {{{a},{b}}} is managed by {cnt} structures"));
            }
        }
        let mut recon_edges: Vec<(u32, u32)> = recon.edges();
        if let Some(vd) = self.vd {
            // managed edges include the dummy's; reconstruct masks them
            recon_edges.extend(
                managed
                    .keys()
                    .filter(|(a, b)| *a == vd || *b == vd)
                    .copied(),
            );
            recon_edges.sort_unstable();
        }
        let managed_keys: Vec<(u32, u32)> = managed.keys().copied().collect();
        if managed_keys != recon_edges {
            fail("managed edge set differs from the reconstruction".into());
        }

        // non-zero-degree invariant on both levels
        for d in 0..self.boundary_count {
            if self.deleted.get((self.gb_off() + d) as usize) {
                continue;
            }
            let full = self.hglob.iter(d).unwrap_or_default();
            let pos = self.hglob.iter_pos(d).unwrap_or_default();
            for &(i, name) in &full {
                let pc = &self.pieces[i as usize];
                let val = pc.deg_i.get((name - pc.d_start) as usize);
                let in_pos = pos.iter().any(|&(pi, _)| pi == i);
                if (val > 0) != in_pos {
                    fail(format!(
                        "boundary {d}: positive-degree entry for piece {i} is {in_pos}, degree {val}"
                    ));
                }
                if self.mini_to_global(i, name) != self.gb_off() + d {
                    fail(format!("boundary {d}: duplicate name in piece {i} resolves elsewhere"));
                }
            }
        }
        for (i, pc) in self.pieces.iter().enumerate() {
            for phys in pc.d_start..pc.n_mini {
                if pc.mini_deleted[phys as usize] {
                    continue;
                }
                let name = pc.name_of(phys);
                if pc.phys(name) != phys {
                    if !pc.mini_deleted[pc.phys(name) as usize] {
                        // dead names may dangle; live ones must round-trip
                    }
                    continue;
                }
                let full = pc.hfam.iter(phys).unwrap_or_default();
                let pos = pc.hfam.iter_pos(phys).unwrap_or_default();
                let mut recomputed = 0u64;
                for &(j, dup) in &full {
                    let m = &pc.micros[j as usize];
                    let d = self.table.degree(m.k(), m.idx, dup as u8).unwrap();
                    recomputed += d as u64;
                    let in_pos = pos.iter().any(|&(pj, _)| pj == j);
                    if (d > 0) != in_pos {
                        fail(format!(
                            "piece {i} phys {phys}: positive entry for micro {j} is {in_pos}, degree {d}"
                        ));
                    }
                    if self.micro_to_phys(i as u32, j, dup as u8) != phys {
                        fail(format!(
                            "piece {i} phys {phys}: micro {j} duplicate resolves elsewhere"
                        ));
                    }
                    // boundary-colored-neighbor entries
                    if pc.is_dp(phys) {
                        let has_bnd = !self
                            .table
                            .range_neighbors(m.k(), m.idx, dup as u8, m.c_g, m.real.saturating_sub(1))
                            .unwrap()
                            .is_empty();
                        let hq_has = pc.hq.adjacent(phys, pc.hq_node(j)).unwrap_or(false);
                        if has_bnd != hq_has {
                            fail(format!(
                                "piece {i} phys {phys}: boundary-neighbor entry for micro {j} is {hq_has}, expected {has_bnd}"
                            ));
                        }
                    }
                }
                if pc.is_dp(phys) {
                    recomputed += pc.fi.degree(phys).unwrap_or(0) as u64;
                }
                let stored = pc.deg_i.get((name - pc.d_start) as usize);
                if stored != recomputed {
                    fail(format!(
                        "piece {i} name {name}: stored piece degree {stored} != recomputed {recomputed}"
                    ));
                }
            }
            // duplicate-restricted boundary subgraph matches its rule
            for (pa, pb) in pc.fpi.edges() {
                if !(pc.fi.adjacent(pa, pb).unwrap_or(false)
                    && (pc.rep[pa as usize] || pc.rep[pb as usize]))
                {
                    fail(format!("piece {i}: stray restricted-subgraph edge"));
                }
            }
            for (pa, pb) in pc.fi.edges() {
                if (pc.rep[pa as usize] || pc.rep[pb as usize])
                    && !pc.fpi.adjacent(pa, pb).unwrap_or(false)
                {
                    fail(format!("piece {i}: missing restricted-subgraph edge"));
                }
            }
        }

        // label-translation round trips for live vertices
        for v in self.live_vertices() {
            if self.is_gb(v) {
                for (i, name) in self.hglob.iter(self.dense(v)).unwrap_or_default() {
                    if self.mini_to_global(i, name) != v {
                        fail(format!("vertex {v}: translation round trip fails in piece {i}"));
                    }
                    let pc = &self.pieces[i as usize];
                    let phys = pc.phys(name);
                    if pc.name_of(phys) != name {
                        fail(format!("vertex {v}: internal/external maps disagree"));
                    }
                }
            } else {
                let (i, name) = self.plain_lookup(v);
                if self.mini_to_global(i, name) != v {
                    fail(format!("vertex {v}: static translation round trip fails"));
                }
            }
        }
        rpt
    }

    /// Debug dump of the encoding state: micro indices plus boundary-graph
    /// edge lists under a versioned header. Not a stability contract.
    pub fn debug_serialize(&self) -> String {
        use std::fmt::Write as _;
        let mut out = String::new();
        let _ = writeln!(out, "PSE1 n={} b={} pieces={}", self.n, self.boundary_count, self.pieces.len());
        let mut f_edges = self.f.edges();
        f_edges.sort_unstable();
        let _ = writeln!(out, "F {}", f_edges.len());
        for (a, b) in f_edges {
            let _ = writeln!(out, "fe {} {}", self.gb_off() + a, self.gb_off() + b);
        }
        for (i, pc) in self.pieces.iter().enumerate() {
            let _ = writeln!(out, "piece {i} minis={} micros={}", pc.n_mini, pc.micros.len());
            for (j, m) in pc.micros.iter().enumerate() {
                let _ = writeln!(out, "mi {i} {j} k={} idx={}", m.k(), m.idx);
            }
            let mut fi = pc.fi.edges();
            fi.sort_unstable();
            for (a, b) in fi {
                let _ = writeln!(out, "fie {i} {a} {b}");
            }
        }
        out
    }

    /// Test support: corrupts one degree entry so fault detection can be
    /// exercised.
    #[doc(hidden)]
    pub fn debug_corrupt_degree(&mut self) {
        if self.boundary_count > 0 {
            let v = self.deg.get(0);
            self.deg.set(0, v + 1);
            return;
        }
        for pc in &mut self.pieces {
            if pc.d_start < pc.n_mini {
                let v = pc.deg_i.get(0);
                pc.deg_i.set(0, v + 1);
                return;
            }
        }
    }

    /// Count of micro graphs per stratum vertex count.
    pub fn micro_stratum_histogram(&self) -> Vec<(u8, usize)> {
        let mut h: std::collections::BTreeMap<u8, usize> = Default::default();
        for pc in &self.pieces {
            for m in &pc.micros {
                *h.entry(m.k()).or_insert(0) += 1;
            }
        }
        h.into_iter().collect()
    }

    /// Labeled bit totals of the side structures; test support.
    pub fn space_breakdown(&self) -> Vec<(&'static str, usize)> {
        let mut intext = 0;
        let mut phi_inv = 0;
        let mut deg_arrays = self.deg.size_bits();
        let mut ids = 0;
        let mut dynarr = 0;
        let mut flags = self.deleted.size_bits() + self.adj_vd.size_bits();
        let w_name = (u32::BITS - self.n.max(2).leading_zeros()) as usize;
        let f_bits = self.f.size_bits();
        let mut fi_bits = 0usize;
        let mut hfam_bits =
            self.hglob
                .size_bits_packed(self.boundary_count as usize, self.pieces.len(), w_name);
        let mut hq_bits = 0;
        let mut misc = self.plain_intervals.len() * 96;
        for pc in &self.pieces {
            let w_mini = (u32::BITS - pc.n_mini.max(2).leading_zeros()) as usize;
            let managed = (pc.n_mini - pc.d_start) as usize;
            let dp = (pc.n_mini - pc.dp_start) as usize;
            intext += pc.intext.size_bits();
            phi_inv += pc.phi_inv.size_bits();
            deg_arrays += pc.deg_i.size_bits();
            ids += pc.delta_names.size_bits();
            for m in &pc.micros {
                dynarr += m.dyn_inv.size_bits() + 16;
            }
            flags += 2 * pc.rep.len();
            // the restricted subgraph and positive-degree variants are
            // subsets of their base structures: one presence bit per entry
            fi_bits += pc.fi.size_bits_over(dp) + pc.fi.edge_count();
            hfam_bits += pc
                .hfam
                .size_bits_packed(managed, pc.micros.len(), 3);
            hq_bits += pc.hq.edge_count();
            misc += (pc.plain_off.len() + pc.plain_lookup.len()) * w_mini;
        }
        vec![
            ("intext", intext),
            ("phi_inv", phi_inv),
            ("deg", deg_arrays),
            ("ids", ids),
            ("dyn", dynarr),
            ("flags", flags),
            ("f", f_bits),
            ("fi", fi_bits),
            ("hfam", hfam_bits),
            ("hq", hq_bits),
            ("misc", misc),
        ]
    }

    /// Measured space of the encoding, in bits.
    pub fn space_report(&self) -> SpaceReport {
        let mut micro_index_bits = 0usize;
        let mut micro_count = 0usize;
        for pc in &self.pieces {
            for m in &pc.micros {
                micro_index_bits += self.table.index_width(m.k()).unwrap_or(0);
                micro_count += 1;
            }
        }
        let side = self.space_breakdown().iter().map(|(_, v)| v).sum();
        SpaceReport {
            n: self.n,
            boundary_count: self.boundary_count,
            inner_boundary_total: self
                .pieces
                .iter()
                .map(|pc| (pc.n_mini - pc.dp_start) as usize)
                .sum(),
            piece_count: self.pieces.len(),
            micro_count,
            micro_index_bits,
            side_bits: side,
        }
    }
}

/// Bit-level accounting of one built encoding.
#[derive(Debug, Clone)]
pub struct SpaceReport {
    pub n: u32,
    pub boundary_count: u32,
    /// Sum of inner boundary sizes over all pieces.
    pub inner_boundary_total: usize,
    pub piece_count: usize,
    pub micro_count: usize,
    /// Table indices: the entropy-bearing part of the encoding.
    pub micro_index_bits: usize,
    /// Everything else: translation maps, boundary graphs, flags, degrees.
    pub side_bits: usize,
}
