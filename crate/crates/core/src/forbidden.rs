//! Forbidden-vertex dynamic graph: a simple graph with a vertex set B such
//! that no edge between two B-vertices may exist. Supports insertion,
//! deletion and free-assignment merges with full merge-event reporting, and
//! carries one auxiliary payload per edge.
//!
//! Merges relink the smaller adjacency set into the larger one; the caller
//! names the survivor freely through an internal/external label pair.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// What happened to one insertion attempt.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InsertOutcome {
    Inserted,
    /// Both endpoints are forbidden; the edge was silently dropped.
    RejectedForbidden,
}

/// Edge-level outcome report of one merge, in terms of external labels.
/// `discarded_parallel` entries carry the payloads of both sides keyed by
/// the merge call arguments, so callers can decide which payload survives.
#[derive(Debug, Clone, Default)]
pub struct MergeReport<P> {
    /// Edges of the second argument `v` that the merge newly attached to the
    /// survivor. Filled by [`ForbiddenGraph::merge`]; left empty by the light
    /// variant when `v` happened to be the internally kept side.
    pub inserted_new: Vec<(u32, P)>,
    /// Edges the internally relinked side alone contributed, whichever call
    /// argument that was. Always filled, cost proportional to that side.
    pub relink_inserted: Vec<(u32, P)>,
    /// Partner, payload on the `u` side, payload on the `v` side.
    pub discarded_parallel: Vec<(u32, P, P)>,
    /// Relinked edges dropped because both endpoints are forbidden.
    pub discarded_forbidden: Vec<(u32, P)>,
    /// Pre-existing survivor edges dropped because the survivor inherited
    /// forbidden status during the merge.
    pub purged_forbidden: Vec<(u32, P)>,
    /// Payload of the direct `{u, v}` edge, if it existed.
    pub removed_direct: Option<P>,
    /// Whether the internally relinked (absorbed) side was the first
    /// argument `u`.
    pub absorbed_was_u: bool,
    /// Internal id of the surviving vertex.
    pub survivor_internal: u32,
    /// Internal id of the relinked vertex.
    pub absorbed_internal: u32,
}

/// Dynamic simple graph over a fixed label universe `0..n` with forbidden
/// set B. Vertex identity is internal; naming is external and reassignable
/// on merges (free-assignment layer).
#[derive(Debug, Clone)]
pub struct ForbiddenGraph<P = ()> {
    adj: Vec<BTreeMap<u32, P>>,
    internal_of: Vec<u32>,
    external_of: Vec<u32>,
    forbidden: Vec<bool>,
    gone: Vec<bool>,    // merged away (internal)
    deleted: Vec<bool>, // explicitly deleted (internal)
    relink_work: u64,
}

impl<P: Clone> ForbiddenGraph<P> {
    pub fn new(n: usize, forbidden: impl Fn(u32) -> bool) -> Self {
        ForbiddenGraph {
            adj: vec![BTreeMap::new(); n],
            internal_of: (0..n as u32).collect(),
            external_of: (0..n as u32).collect(),
            forbidden: (0..n as u32).map(forbidden).collect(),
            gone: vec![false; n],
            deleted: vec![false; n],
            relink_work: 0,
        }
    }

    pub fn universe(&self) -> usize {
        self.adj.len()
    }

    fn resolve(&self, name: u32) -> Result<u32> {
        let i = *self
            .internal_of
            .get(name as usize)
            .ok_or(Error::UnknownVertex(name))?;
        if self.gone[i as usize] || self.external_of[i as usize] != name {
            return Err(Error::UnknownVertex(name));
        }
        Ok(i)
    }

    fn resolve_live(&self, name: u32) -> Result<u32> {
        let i = self.resolve(name)?;
        if self.deleted[i as usize] {
            return Err(Error::Deleted(name));
        }
        Ok(i)
    }

    pub fn is_live(&self, name: u32) -> bool {
        self.resolve_live(name).is_ok()
    }

    pub fn is_deleted_name(&self, name: u32) -> bool {
        matches!(self.resolve(name), Ok(i) if self.deleted[i as usize])
    }

    pub fn is_forbidden(&self, name: u32) -> Result<bool> {
        Ok(self.forbidden[self.resolve(name)? as usize])
    }

    /// Stable internal id of a live name. Ids survive renames; names move.
    pub fn internal_id(&self, name: u32) -> Result<u32> {
        self.resolve(name)
    }

    /// Current name of an internal id. The id must not have been merged away.
    pub fn name_of_internal(&self, id: u32) -> u32 {
        debug_assert!(!self.gone[id as usize], "resolving a merged-away id");
        self.external_of[id as usize]
    }

    /// Marks a vertex forbidden after the fact, purging any of its edges
    /// whose partner is also forbidden. Returns the purged edges.
    pub fn make_forbidden(&mut self, name: u32) -> Result<Vec<(u32, P)>> {
        let i = self.resolve_live(name)?;
        let mut purged = Vec::new();
        if !self.forbidden[i as usize] {
            self.forbidden[i as usize] = true;
            let bad: Vec<u32> = self.adj[i as usize]
                .keys()
                .copied()
                .filter(|&x| self.forbidden[x as usize])
                .collect();
            for x in bad {
                let p = self.adj[i as usize].remove(&x).unwrap();
                self.adj[x as usize].remove(&i);
                purged.push((self.external_of[x as usize], p));
            }
        }
        Ok(purged)
    }

    pub fn insert(&mut self, u: u32, v: u32, payload: P) -> Result<InsertOutcome> {
        if u == v {
            return Err(Error::SameVertex(u));
        }
        let iu = self.resolve_live(u)?;
        let iv = self.resolve_live(v)?;
        if self.forbidden[iu as usize] && self.forbidden[iv as usize] {
            return Ok(InsertOutcome::RejectedForbidden);
        }
        if self.adj[iu as usize].contains_key(&iv) {
            return Err(Error::EdgeExists(u, v));
        }
        self.adj[iu as usize].insert(iv, payload.clone());
        self.adj[iv as usize].insert(iu, payload);
        Ok(InsertOutcome::Inserted)
    }

    pub fn delete_edge(&mut self, u: u32, v: u32) -> Result<P> {
        let iu = self.resolve_live(u)?;
        let iv = self.resolve_live(v)?;
        let p = self.adj[iu as usize]
            .remove(&iv)
            .ok_or(Error::NotAnEdge(u, v))?;
        self.adj[iv as usize].remove(&iu);
        Ok(p)
    }

    /// Removes all incident edges and flags the vertex deleted. Returns the
    /// removed edges as (partner external label, payload).
    pub fn delete_vertex(&mut self, u: u32) -> Result<Vec<(u32, P)>> {
        let iu = self.resolve_live(u)?;
        let partners = std::mem::take(&mut self.adj[iu as usize]);
        let mut out = Vec::with_capacity(partners.len());
        for (x, p) in partners {
            self.adj[x as usize].remove(&iu);
            out.push((self.external_of[x as usize], p));
        }
        self.deleted[iu as usize] = true;
        Ok(out)
    }

    pub fn adjacent(&self, u: u32, v: u32) -> Result<bool> {
        let iu = self.resolve_live(u)?;
        let iv = self.resolve_live(v)?;
        Ok(self.adj[iu as usize].contains_key(&iv))
    }

    pub fn degree(&self, u: u32) -> Result<usize> {
        let iu = self.resolve_live(u)?;
        Ok(self.adj[iu as usize].len())
    }

    pub fn neighbors(&self, u: u32) -> Result<impl Iterator<Item = (u32, &P)> + '_> {
        let iu = self.resolve_live(u)?;
        Ok(self.adj[iu as usize]
            .iter()
            .map(|(&x, p)| (self.external_of[x as usize], p)))
    }

    pub fn payload(&self, u: u32, v: u32) -> Result<&P> {
        let iu = self.resolve_live(u)?;
        let iv = self.resolve_live(v)?;
        self.adj[iu as usize].get(&iv).ok_or(Error::NotAnEdge(u, v))
    }

    /// Rewrites the payload of an existing edge (both directions).
    pub fn set_payload(&mut self, u: u32, v: u32, payload: P) -> Result<()> {
        let iu = self.resolve_live(u)?;
        let iv = self.resolve_live(v)?;
        if !self.adj[iu as usize].contains_key(&iv) {
            return Err(Error::NotAnEdge(u, v));
        }
        self.adj[iu as usize].insert(iv, payload.clone());
        self.adj[iv as usize].insert(iu, payload);
        Ok(())
    }

    /// Merges u and v; the remaining vertex is externally named
    /// `survivor_name`, which must be one of the two. Internally the
    /// smaller-degree vertex is relinked into the larger-degree one; the
    /// merged vertex inherits forbidden status from either side, and edges
    /// that would connect two forbidden vertices are discarded and reported.
    pub fn merge(&mut self, u: u32, v: u32, survivor_name: u32) -> Result<MergeReport<P>> {
        self.merge_impl(u, v, survivor_name, true)
    }

    /// Like [`ForbiddenGraph::merge`] but never enumerates the kept side:
    /// `inserted_new` stays empty when `v` was internally kept. Used where
    /// the absorbed-side `relink_inserted` view is what matters.
    pub fn merge_light(&mut self, u: u32, v: u32, survivor_name: u32) -> Result<MergeReport<P>> {
        self.merge_impl(u, v, survivor_name, false)
    }

    fn merge_impl(
        &mut self,
        u: u32,
        v: u32,
        survivor_name: u32,
        full: bool,
    ) -> Result<MergeReport<P>> {
        if u == v {
            return Err(Error::SameVertex(u));
        }
        if survivor_name != u && survivor_name != v {
            return Err(Error::InvalidConfig(format!(
                "survivor {survivor_name} is neither {u} nor {v}"
            )));
        }
        let iu = self.resolve_live(u)?;
        let iv = self.resolve_live(v)?;
        let (big, small) = if self.adj[iu as usize].len() >= self.adj[iv as usize].len() {
            (iu, iv)
        } else {
            (iv, iu)
        };
        let mut report = MergeReport {
            inserted_new: Vec::new(),
            relink_inserted: Vec::new(),
            discarded_parallel: Vec::new(),
            discarded_forbidden: Vec::new(),
            purged_forbidden: Vec::new(),
            removed_direct: None,
            absorbed_was_u: small == iu,
            survivor_internal: big,
            absorbed_internal: small,
        };
        let was_forbidden = self.forbidden[big as usize];
        let inherit = was_forbidden || self.forbidden[small as usize];
        let mut parallel_ids = Vec::new();
        let mut relink_ids = Vec::new();
        let small_adj = std::mem::take(&mut self.adj[small as usize]);
        for (x, p) in small_adj {
            self.relink_work += 1;
            self.adj[x as usize].remove(&small);
            if x == big {
                report.removed_direct = Some(p);
                continue;
            }
            let xname = self.external_of[x as usize];
            if let Some(existing) = self.adj[big as usize].get(&x) {
                // payload of the internally kept side stays on the edge
                let (pu, pv) = if big == iu {
                    (existing.clone(), p)
                } else {
                    (p, existing.clone())
                };
                parallel_ids.push(x);
                report.discarded_parallel.push((xname, pu, pv));
            } else if inherit && self.forbidden[x as usize] {
                report.discarded_forbidden.push((xname, p));
            } else {
                self.adj[big as usize].insert(x, p.clone());
                self.adj[x as usize].insert(big, p.clone());
                relink_ids.push(x);
                report.relink_inserted.push((xname, p));
            }
        }
        self.forbidden[big as usize] = inherit;
        if inherit && !was_forbidden {
            // survivor turned forbidden: purge its own edges into B
            let bad: Vec<u32> = self.adj[big as usize]
                .keys()
                .copied()
                .filter(|&x| self.forbidden[x as usize])
                .collect();
            for x in bad {
                let p = self.adj[big as usize].remove(&x).unwrap();
                self.adj[x as usize].remove(&big);
                report
                    .purged_forbidden
                    .push((self.external_of[x as usize], p));
            }
        }
        if small == iv {
            report.inserted_new = report.relink_inserted.clone();
        } else if full {
            // v was internally kept: its unique edges are the survivor's
            // current partners minus parallels and relinked u-edges
            for (&x, p) in &self.adj[big as usize] {
                if !parallel_ids.contains(&x) && !relink_ids.contains(&x) {
                    report
                        .inserted_new
                        .push((self.external_of[x as usize], p.clone()));
                }
            }
        }
        self.gone[small as usize] = true;
        let dead_name = if survivor_name == u { v } else { u };
        self.internal_of[survivor_name as usize] = big;
        self.external_of[big as usize] = survivor_name;
        // the dead name keeps pointing at the absorbed vertex, which is gone
        self.internal_of[dead_name as usize] = small;
        self.external_of[small as usize] = dead_name;
        Ok(report)
    }

    /// Total relink steps over all merges so far.
    pub fn relink_work(&self) -> u64 {
        self.relink_work
    }

    /// Live edges as external label pairs.
    pub fn edges(&self) -> Vec<(u32, u32)> {
        let mut out = Vec::new();
        for i in 0..self.adj.len() {
            if self.gone[i] {
                continue;
            }
            for (&x, _) in &self.adj[i] {
                if (i as u32) < x {
                    out.push((self.external_of[i], self.external_of[x as usize]));
                }
            }
        }
        out
    }

    pub fn live_names(&self) -> Vec<u32> {
        (0..self.adj.len())
            .filter(|&i| !self.gone[i] && !self.deleted[i])
            .map(|i| self.external_of[i])
            .collect()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(|m| m.len()).sum::<usize>() / 2
    }

    /// Information-content estimate in bits for a packed realization:
    /// edge endpoint pairs, plus naming and flag state for the first
    /// `managed` labels of the universe (the rest never leave identity).
    pub fn size_bits_over(&self, managed: usize) -> usize {
        let label = (usize::BITS - self.adj.len().max(2).leading_zeros()) as usize;
        self.edge_count() * 2 * label + managed * (2 * label + 3)
    }

    /// Information-content estimate over the whole universe.
    pub fn size_bits(&self) -> usize {
        self.size_bits_over(self.adj.len())
    }
}
