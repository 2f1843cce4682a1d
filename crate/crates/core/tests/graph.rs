use exroute_core::expander::gen_random_regular_digraph;
use exroute_core::{Digraph, EdgeId, EdgeSubset, VertexId};
use proptest::prelude::*;

fn scan_within(d: &Digraph, set: &[VertexId]) -> usize {
    d.edges().iter().filter(|(t, h)| set.contains(t) && set.contains(h)).count()
}

fn scan_boundary(d: &Digraph, s1: &[VertexId], s2: &[VertexId]) -> (usize, usize) {
    let fwd = d.edges().iter().filter(|(t, h)| s1.contains(t) && s2.contains(h)).count();
    let back = d.edges().iter().filter(|(t, h)| s2.contains(t) && s1.contains(h)).count();
    (fwd, back)
}

fn random_set(n: usize, mask: u64, salt: u64) -> Vec<VertexId> {
    (0..n).filter(|&i| (mask.rotate_left(salt as u32) >> (i % 64)) & 1 == 1).map(VertexId).collect()
}

#[test]
fn reverse_of_random_digraph_swaps_degree_sequences() {
    let d = gen_random_regular_digraph(20, 3, 4).unwrap();
    let r = d.reverse();
    for v in d.vertices() {
        assert_eq!(r.in_degree(v), d.out_degree(v));
        assert_eq!(r.out_degree(v), d.in_degree(v));
    }
}

#[test]
fn empty_set_has_no_inner_edges() {
    let d = gen_random_regular_digraph(30, 4, 1).unwrap();
    assert_eq!(d.edges_within(&[]), 0);
}

#[test]
fn whole_vertex_set_boundary_is_every_edge() {
    let d = gen_random_regular_digraph(30, 4, 2).unwrap();
    let all: Vec<_> = d.vertices().collect();
    assert_eq!(d.boundary_counts(&all, &all), (120, 120));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn regular_digraph_recount(n in 5usize..40, k in 1usize..5, seed in 0u64..1000) {
        prop_assume!(k < n);
        let d = gen_random_regular_digraph(n, k, seed).unwrap();
        let mut out = vec![0; n];
        let mut inn = vec![0; n];
        for &(t, h) in d.edges() {
            out[t.0] += 1;
            inn[h.0] += 1;
        }
        prop_assert!(out.iter().chain(&inn).all(|&x| x == k));
        prop_assert_eq!(d.regular_degree(), Some(k));
    }

    #[test]
    fn reverse_is_an_involution(n in 2usize..30, k in 1usize..4, seed in 0u64..1000) {
        prop_assume!(k < n);
        let d = gen_random_regular_digraph(n, k, seed).unwrap();
        let r = d.reverse();
        for i in 0..d.edge_count() {
            let (t, h) = d.endpoints(EdgeId(i));
            prop_assert_eq!(r.endpoints(EdgeId(i)), (h, t));
        }
        prop_assert_eq!(r.reverse(), d);
    }

    #[test]
    fn subset_counters_match_recount(
        seed in 0u64..1000,
        ops in proptest::collection::vec((any::<bool>(), 0usize..120), 0..300),
    ) {
        let d = gen_random_regular_digraph(30, 4, seed).unwrap();
        let mut s = EdgeSubset::new(&d);
        let mut member = vec![false; d.edge_count()];
        for (insert, e) in ops {
            let changed = if insert { s.insert(&d, EdgeId(e)) } else { s.erase(&d, EdgeId(e)) };
            prop_assert_eq!(changed, member[e] != insert);
            member[e] = insert;
        }
        prop_assert!(s.recount(&d).is_empty());
        prop_assert_eq!(s.len(), member.iter().filter(|&&m| m).count());
        for v in d.vertices() {
            let out = d.out_edges(v).iter().filter(|e| member[e.0]).count();
            let inn = d.in_edges(v).iter().filter(|e| member[e.0]).count();
            prop_assert_eq!(s.out_degree(v), out);
            prop_assert_eq!(s.in_degree(v), inn);
        }
    }

    #[test]
    fn set_queries_match_edge_scan(seed in 0u64..1000, m1 in any::<u64>(), m2 in any::<u64>()) {
        let d = gen_random_regular_digraph(30, 4, seed).unwrap();
        let s1 = random_set(30, m1, 0);
        let s2 = random_set(30, m2, 7);
        prop_assert_eq!(d.edges_within(&s1), scan_within(&d, &s1));
        prop_assert_eq!(d.boundary_counts(&s1, &s2), scan_boundary(&d, &s1, &s2));
    }
}
