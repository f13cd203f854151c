//! Property tests for the structural invariants of the building blocks.

use proptest::prelude::*;

use planarsucc_core::forbidden::ForbiddenGraph;
use planarsucc_core::graph::LabeledGraph;
use planarsucc_core::succinct::{CompactArray, IndexableDictionary};

proptest! {
    /// rank/select/member agree with a linear-scan oracle, and the two are
    /// mutually inverse on members.
    #[test]
    fn id_matches_linear_oracle(universe in 1usize..400, bits in prop::collection::vec(any::<bool>(), 0..400)) {
        let members: Vec<u32> = (0..universe as u32)
            .filter(|&x| bits.get(x as usize).copied().unwrap_or(false))
            .collect();
        let d = IndexableDictionary::build(universe, &members).unwrap();
        prop_assert_eq!(d.len(), members.len());
        for x in 0..=universe {
            let want = members.iter().filter(|&&m| (m as usize) < x).count();
            prop_assert_eq!(d.rank(x).unwrap(), want);
        }
        for (i, &m) in members.iter().enumerate() {
            prop_assert_eq!(d.select(i).unwrap(), m as usize);
            prop_assert_eq!(d.rank(m as usize).unwrap(), i);
            prop_assert!(d.member(m as usize));
        }
    }

    /// get(set(i, v), i) = v under arbitrary write sequences.
    #[test]
    fn compact_array_is_an_array(width in 1usize..17, writes in prop::collection::vec((0usize..128, 0u64..65536), 1..200)) {
        let mut a = CompactArray::new(128, width);
        let mut model = vec![0u64; 128];
        let mask = (1u64 << width) - 1;
        for (i, v) in writes {
            let v = v & mask;
            a.set(i, v);
            model[i] = v;
        }
        for i in 0..128 {
            prop_assert_eq!(a.get(i), model[i]);
        }
    }

    /// The oracle contraction produces exactly the union neighborhood and
    /// keeps the graph simple and symmetric.
    #[test]
    fn oracle_contract_union(edges in prop::collection::vec((0u32..12, 0u32..12), 1..40)) {
        let mut g = LabeledGraph::with_vertices(12);
        for (a, b) in edges {
            if a != b && !g.has_edge(a, b) {
                g.add_edge(a, b).unwrap();
            }
        }
        let all = g.edges();
        prop_assume!(!all.is_empty());
        let (u, v) = all[0];
        let nu: Vec<u32> = g.neighbors(u).unwrap().collect();
        let nv: Vec<u32> = g.neighbors(v).unwrap().collect();
        let mut want: Vec<u32> = nu.into_iter().chain(nv).filter(|&x| x != u && x != v).collect();
        want.sort_unstable();
        want.dedup();
        g.contract(u, v).unwrap();
        let got: Vec<u32> = g.neighbors(u).unwrap().collect();
        prop_assert_eq!(got, want);
        prop_assert!(g.check_simple_symmetric());
        prop_assert!(!g.has_vertex(v));
    }

    /// Merge reports partition the absorbed side's neighbor changes: with no
    /// forbidden vertices involved, |old N(v) \ {u}| = |parallel| + |new|.
    #[test]
    fn merge_report_partitions(edges in prop::collection::vec((0u32..10, 0u32..10), 1..30), forbid in prop::collection::vec(any::<bool>(), 10)) {
        let mut fg: ForbiddenGraph<u32> = ForbiddenGraph::new(10, |x| forbid[x as usize]);
        let mut payload = 0u32;
        for (a, b) in edges {
            if a != b && !(forbid[a as usize] && forbid[b as usize]) && !fg.adjacent(a, b).unwrap_or(true) {
                payload += 1;
                fg.insert(a, b, payload).unwrap();
            }
        }
        let live: Vec<u32> = fg.live_names();
        prop_assume!(live.len() >= 2);
        let (u, v) = (live[0], live[1]);
        let old_nv: Vec<u32> = fg.neighbors(v).unwrap().map(|(x, _)| x).filter(|&x| x != u).collect();
        let r = fg.merge(u, v, u).unwrap();
        let v_side_forbidden = if r.absorbed_was_u {
            r.purged_forbidden.len()
        } else {
            r.discarded_forbidden.len()
        };
        prop_assert_eq!(
            old_nv.len(),
            r.discarded_parallel.len() + r.inserted_new.len() + v_side_forbidden
        );
        // free assignment: the surviving external label is as requested
        prop_assert!(fg.is_live(u));
        prop_assert!(!fg.is_live(v));
    }
}
