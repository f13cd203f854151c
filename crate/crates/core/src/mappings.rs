//! Dynamic label-translation structures: internal/external mini-label maps,
//! dynamic inverse maps, and the bipartite bookkeeping graphs realizing the
//! duplicate mappings and their positive-degree / boundary-colored variants.

use crate::error::{Error, Result};
use crate::forbidden::{ForbiddenGraph, InsertOutcome};
use crate::succinct::{CompactArray, IndexableDictionary};

/// Internal/external label pair over a managed subset of a label universe.
/// Outside the managed set both directions are the identity.
#[derive(Debug, Clone)]
pub struct IntExtMap {
    id: IndexableDictionary,
    internal: CompactArray,
    external: CompactArray,
}

impl IntExtMap {
    /// Managed set given as a strictly increasing label list within `0..universe`.
    pub fn new(universe: usize, managed: &[u32]) -> Result<Self> {
        let id = IndexableDictionary::build(universe, managed)?;
        let width = CompactArray::width_for(universe.max(2) as u64 - 1);
        let mut internal = CompactArray::new(managed.len(), width);
        let mut external = CompactArray::new(managed.len(), width);
        for (i, &m) in managed.iter().enumerate() {
            internal.set(i, m as u64);
            external.set(i, m as u64);
        }
        Ok(IntExtMap {
            id,
            internal,
            external,
        })
    }

    pub fn is_managed(&self, label: u32) -> bool {
        self.id.member(label as usize)
    }

    /// External name -> internal label; identity outside the managed set.
    pub fn internal(&self, name: u32) -> u32 {
        if self.id.member(name as usize) {
            self.internal.get(self.id.rank(name as usize).unwrap()) as u32
        } else {
            name
        }
    }

    /// Internal label -> external name; identity outside the managed set.
    pub fn external(&self, label: u32) -> u32 {
        if self.id.member(label as usize) {
            self.external.get(self.id.rank(label as usize).unwrap()) as u32
        } else {
            label
        }
    }

    /// Binds `name` to `label` in both directions. Both must be managed.
    pub fn bind(&mut self, name: u32, label: u32) -> Result<()> {
        if !self.id.member(name as usize) {
            return Err(Error::NotManaged(name));
        }
        if !self.id.member(label as usize) {
            return Err(Error::NotManaged(label));
        }
        self.internal
            .set(self.id.rank(name as usize).unwrap(), label as u64);
        self.external
            .set(self.id.rank(label as usize).unwrap(), name as u64);
        Ok(())
    }

    pub fn size_bits(&self) -> usize {
        self.id.size_bits() + self.internal.size_bits() + self.external.size_bits()
    }
}

/// Dynamic inverse translation map over a fixed key subset; one write
/// replaces exactly one entry.
#[derive(Debug, Clone)]
pub struct DynInverse {
    id: IndexableDictionary,
    vals: CompactArray,
}

impl DynInverse {
    pub fn new(universe: usize, keys: &[u32], value_universe: usize) -> Result<Self> {
        let id = IndexableDictionary::build(universe, keys)?;
        let width = CompactArray::width_for(value_universe.max(2) as u64 - 1);
        Ok(DynInverse {
            id,
            vals: CompactArray::new(keys.len(), width),
        })
    }

    pub fn is_managed(&self, key: u32) -> bool {
        self.id.member(key as usize)
    }

    pub fn get(&self, key: u32) -> Result<u32> {
        if !self.id.member(key as usize) {
            return Err(Error::NotManaged(key));
        }
        Ok(self.vals.get(self.id.rank(key as usize).unwrap()) as u32)
    }

    pub fn set(&mut self, key: u32, value: u32) -> Result<()> {
        if !self.id.member(key as usize) {
            return Err(Error::NotManaged(key));
        }
        self.vals
            .set(self.id.rank(key as usize).unwrap(), value as u64);
        Ok(())
    }

    pub fn size_bits(&self) -> usize {
        self.id.size_bits() + self.vals.size_bits()
    }
}

/// Outcome of a duplicate-set merge: pieces shared by both sides (parallel
/// edges, with each side's duplicate payload) and pieces only the absorbed
/// side had (freshly linked to the survivor).
#[derive(Debug, Clone)]
pub struct PhiMerge {
    pub shared: Vec<(u32, u32, u32)>, // (node index, payload u side, payload v side)
    pub only_absorbed: Vec<(u32, u32)>, // (node index, payload)
    /// Which call argument was internally relinked.
    pub absorbed_was_u: bool,
    /// Internal id of the surviving member vertex in the full graph; dynamic
    /// inverse maps store these ids and externalize on read.
    pub survivor_internal: u32,
    /// Internal id of the relinked member vertex.
    pub absorbed_internal: u32,
}

/// A pair of bipartite bookkeeping graphs over member vertices and
/// piece/micro nodes: the full membership graph and its positive-degree
/// variant. Edge payloads carry the duplicate label on the other level.
#[derive(Debug)]
pub struct HFamily {
    node_base: u32,
    pub h: ForbiddenGraph<u32>,
    pub hpos: ForbiddenGraph<u32>,
}

impl HFamily {
    /// `member_count` names `0..member_count`, nodes are named
    /// `member_count..member_count+node_count` and form the forbidden set.
    pub fn new(member_count: usize, node_count: usize) -> Self {
        let total = member_count + node_count;
        let base = member_count as u32;
        HFamily {
            node_base: base,
            h: ForbiddenGraph::new(total, |x| x >= base),
            hpos: ForbiddenGraph::new(total, |x| x >= base),
        }
    }

    pub fn node_name(&self, node: u32) -> u32 {
        self.node_base + node
    }

    pub fn node_of_name(&self, name: u32) -> u32 {
        debug_assert!(name >= self.node_base);
        name - self.node_base
    }

    pub fn add_entry(&mut self, member: u32, node: u32, payload: u32, positive: bool) -> Result<()> {
        self.h.insert(member, self.node_name(node), payload)?;
        if positive {
            self.hpos.insert(member, self.node_name(node), payload)?;
        }
        Ok(())
    }

    /// All entries `(node, payload)` of a member, from the full graph.
    pub fn iter(&self, member: u32) -> Result<Vec<(u32, u32)>> {
        Ok(self
            .h
            .neighbors(member)?
            .map(|(n, &p)| (self.node_of_name(n), p))
            .collect())
    }

    /// Entries restricted to nodes where the duplicate has positive degree.
    pub fn iter_pos(&self, member: u32) -> Result<Vec<(u32, u32)>> {
        Ok(self
            .hpos
            .neighbors(member)?
            .map(|(n, &p)| (self.node_of_name(n), p))
            .collect())
    }

    pub fn entry_count(&self, member: u32) -> Result<usize> {
        self.h.degree(member)
    }

    pub fn payload(&self, member: u32, node: u32) -> Result<u32> {
        Ok(*self.h.payload(member, self.node_name(node))?)
    }

    pub fn has_entry(&self, member: u32, node: u32) -> Result<bool> {
        self.h.adjacent(member, self.node_name(node))
    }

    pub fn set_entry_payload(&mut self, member: u32, node: u32, payload: u32) -> Result<()> {
        self.h.set_payload(member, self.node_name(node), payload)?;
        if self.hpos.adjacent(member, self.node_name(node))? {
            self.hpos.set_payload(member, self.node_name(node), payload)?;
        }
        Ok(())
    }

    /// Merges v's entry set into u's; the surviving member keeps the name
    /// `survivor`. Shared nodes surface as parallel edges, absorbed-only
    /// nodes as insertions.
    pub fn merge(&mut self, u: u32, v: u32, survivor: u32) -> Result<PhiMerge> {
        let report = self.h.merge_light(u, v, survivor)?;
        let _ = self.hpos.merge_light(u, v, survivor)?;
        debug_assert!(report.discarded_forbidden.is_empty());
        debug_assert!(report.purged_forbidden.is_empty());
        debug_assert!(report.removed_direct.is_none());
        Ok(PhiMerge {
            shared: report
                .discarded_parallel
                .iter()
                .map(|&(n, pu, pv)| (self.node_of_name(n), pu, pv))
                .collect(),
            only_absorbed: report
                .relink_inserted
                .iter()
                .map(|&(n, p)| (self.node_of_name(n), p))
                .collect(),
            absorbed_was_u: report.absorbed_was_u,
            survivor_internal: report.survivor_internal,
            absorbed_internal: report.absorbed_internal,
        })
    }

    /// Idempotently inserts or removes the positive-degree entry for
    /// `(member, node)`.
    pub fn nonzero_update(&mut self, member: u32, node: u32, payload: u32, positive: bool) -> Result<()> {
        let n = self.node_name(node);
        let present = self.hpos.adjacent(member, n)?;
        match (present, positive) {
            (false, true) => {
                let r = self.hpos.insert(member, n, payload)?;
                debug_assert_eq!(r, InsertOutcome::Inserted);
            }
            (true, false) => {
                self.hpos.delete_edge(member, n)?;
            }
            (true, true) => {
                self.hpos.set_payload(member, n, payload)?;
            }
            (false, false) => {}
        }
        Ok(())
    }

    /// Drops the entry for one node from both graphs.
    pub fn remove_entry(&mut self, member: u32, node: u32) -> Result<()> {
        let n = self.node_name(node);
        if self.h.adjacent(member, n)? {
            self.h.delete_edge(member, n)?;
        }
        if self.hpos.adjacent(member, n)? {
            self.hpos.delete_edge(member, n)?;
        }
        Ok(())
    }

    /// Clears a member on deletion; returns its former full entry set.
    pub fn delete_member(&mut self, member: u32) -> Result<Vec<(u32, u32)>> {
        let removed = self.h.delete_vertex(member)?;
        let _ = self.hpos.delete_vertex(member)?;
        Ok(removed
            .into_iter()
            .map(|(n, p)| (self.node_of_name(n), p))
            .collect())
    }

    /// Resolves a stored internal id to the member's current name.
    pub fn member_name_of_internal(&self, internal: u32) -> u32 {
        self.h.name_of_internal(internal)
    }

    pub fn internal_of_member(&self, member: u32) -> Result<u32> {
        self.h.internal_id(member)
    }

    pub fn size_bits(&self) -> usize {
        self.size_bits_over(self.h.universe())
    }

    /// See [`ForbiddenGraph::size_bits_over`].
    pub fn size_bits_over(&self, managed: usize) -> usize {
        self.h.size_bits_over(managed) + self.hpos.size_bits_over(managed)
    }

    /// Packed-representation estimate: per-member entry lists store only the
    /// node id and the payload; the positive-degree subset costs one bit per
    /// entry; members need naming state.
    pub fn size_bits_packed(&self, managed: usize, node_count: usize, payload_bits: usize) -> usize {
        let node_w = (usize::BITS - node_count.max(2).leading_zeros()) as usize;
        let member_w = (usize::BITS - self.h.universe().max(2).leading_zeros()) as usize;
        let entries = self.h.edge_count();
        entries * (node_w + payload_bits + 1) + managed * (2 * member_w + 3)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn intext_identity_then_bind() {
        let m = IntExtMap::new(10, &[3, 5, 7]).unwrap();
        for x in 0..10 {
            assert_eq!(m.internal(x), x);
            assert_eq!(m.external(x), x);
        }
        let mut m = m;
        m.bind(5, 7).unwrap();
        assert_eq!(m.internal(5), 7);
        assert_eq!(m.external(7), 5);
        // identity outside the managed set survives
        assert_eq!(m.internal(2), 2);
        assert!(m.bind(2, 5).is_err());
    }

    #[test]
    fn dyninverse_read_write() {
        let mut d = DynInverse::new(8, &[2, 6], 100).unwrap();
        d.set(2, 42).unwrap();
        d.set(6, 7).unwrap();
        assert_eq!(d.get(2).unwrap(), 42);
        assert_eq!(d.get(6).unwrap(), 7);
        d.set(2, 13).unwrap();
        assert_eq!(d.get(2).unwrap(), 13);
        assert_eq!(d.get(3), Err(Error::NotManaged(3)));
    }

    #[test]
    fn phi_merge_classifies_nodes() {
        // member 0 in node 0; member 1 in nodes 0 and 1: member 0 is the
        // smaller side and is relinked, so node 0 keeps member 1's payload
        let mut f = HFamily::new(2, 2);
        f.add_entry(0, 0, 100, true).unwrap();
        f.add_entry(1, 0, 200, true).unwrap();
        f.add_entry(1, 1, 300, true).unwrap();
        let r = f.merge(0, 1, 0).unwrap();
        assert_eq!(r.shared, vec![(0, 100, 200)]);
        assert!(r.absorbed_was_u);
        assert!(r.only_absorbed.is_empty());
        let mut entries = f.iter(0).unwrap();
        entries.sort_unstable();
        assert_eq!(entries, vec![(0, 200), (1, 300)]);
        assert_eq!(f.member_name_of_internal(r.survivor_internal), 0);

        // reversed sizes: the absorbed side brings its unique node along
        let mut f = HFamily::new(2, 2);
        f.add_entry(0, 0, 100, true).unwrap();
        f.add_entry(0, 1, 150, true).unwrap();
        f.add_entry(1, 0, 200, true).unwrap();
        let r = f.merge(0, 1, 0).unwrap();
        assert!(!r.absorbed_was_u);
        assert_eq!(r.shared, vec![(0, 100, 200)]);
        assert!(r.only_absorbed.is_empty());
    }

    #[test]
    fn phi_merge_disjoint_and_identical() {
        let mut f = HFamily::new(2, 2);
        f.add_entry(0, 0, 1, true).unwrap();
        f.add_entry(1, 1, 2, true).unwrap();
        let r = f.merge(0, 1, 0).unwrap();
        assert!(r.shared.is_empty());
        assert_eq!(r.only_absorbed, vec![(1, 2)]);

        let mut f = HFamily::new(2, 1);
        f.add_entry(0, 0, 1, true).unwrap();
        f.add_entry(1, 0, 2, true).unwrap();
        let r = f.merge(0, 1, 0).unwrap();
        assert!(r.only_absorbed.is_empty());
        assert_eq!(r.shared.len(), 1);
    }

    #[test]
    fn nonzero_update_is_idempotent() {
        let mut f = HFamily::new(1, 1);
        f.add_entry(0, 0, 9, true).unwrap();
        f.nonzero_update(0, 0, 9, false).unwrap();
        assert!(f.iter_pos(0).unwrap().is_empty());
        f.nonzero_update(0, 0, 9, false).unwrap();
        assert!(f.iter_pos(0).unwrap().is_empty());
        f.nonzero_update(0, 0, 9, true).unwrap();
        assert_eq!(f.iter_pos(0).unwrap(), vec![(0, 9)]);
        f.nonzero_update(0, 0, 9, true).unwrap();
        assert_eq!(f.iter_pos(0).unwrap(), vec![(0, 9)]);
        // the full map is untouched throughout
        assert_eq!(f.iter(0).unwrap(), vec![(0, 9)]);
    }
}
