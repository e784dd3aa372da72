mod common;

use common::*;
use magcrit::experiments::random_3regular;
use magcrit::fixtures;
use magcrit::graph::{
    enumerate_admissible_supports, enumerate_supports_3regular, induced_subgraph, is_admissible_support,
    partition_for_support, spanning_tree_count, Graph, GraphJson, VertexSet,
};
use proptest::prelude::*;

/// Independent admissibility test by direct counting and a flood fill.
fn admissible_by_hand(g: &Graph, set: &[usize]) -> bool {
    let n = g.n();
    let inside = |v: usize| set.contains(&v);
    for v in (0..n).filter(|&v| !inside(v)) {
        let c = g.edges().iter().filter(|&&(r, s)| (r == v && inside(s)) || (s == v && inside(r))).count();
        if c == 1 || c == 2 {
            return false;
        }
    }
    let mut reached = vec![set[0]];
    let mut grew = true;
    while grew {
        grew = false;
        for &(r, s) in g.edges() {
            for (a, b) in [(r, s), (s, r)] {
                if reached.contains(&a) && inside(b) && !reached.contains(&b) {
                    reached.push(b);
                    grew = true;
                }
            }
        }
    }
    reached.len() == set.len()
}

fn brute_force_supports(g: &Graph) -> Vec<Vec<usize>> {
    let n = g.n();
    let mut out: Vec<Vec<usize>> = (1u32..1 << n)
        .map(|m| (0..n).filter(|&v| m >> v & 1 == 1).collect::<Vec<_>>())
        .filter(|s| admissible_by_hand(g, s))
        .collect();
    out.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
    out
}

/// Number of `(n-1)`-edge subsets without a cycle.
fn brute_force_tree_count(g: &Graph) -> u128 {
    let (n, edges) = (g.n(), g.edges());
    let mut count = 0;
    for mask in 0u32..1 << edges.len() {
        if mask.count_ones() as usize != n - 1 {
            continue;
        }
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], v: usize) -> usize {
            if p[v] == v {
                v
            } else {
                let r = find(p, p[v]);
                p[v] = r;
                r
            }
        }
        let mut acyclic = true;
        for (i, &(r, s)) in edges.iter().enumerate() {
            if mask >> i & 1 == 1 {
                let (a, b) = (find(&mut parent, r), find(&mut parent, s));
                if a == b {
                    acyclic = false;
                    break;
                }
                parent[a] = b;
            }
        }
        count += acyclic as u128;
    }
    count
}

fn small_graph() -> impl Strategy<Value = Graph> {
    (any::<u64>(), 1usize..9, 0usize..5).prop_map(|(seed, n, beta)| {
        let max_beta = (n * (n - 1) / 2).saturating_sub(n - 1);
        random_connected_graph(&mut rng(seed), n, beta.min(max_beta))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn support_enumeration_matches_brute_force(g in small_graph()) {
        let got: Vec<Vec<usize>> = enumerate_admissible_supports(&g).iter().map(|s| s.as_slice().to_vec()).collect();
        prop_assert_eq!(&got, &brute_force_supports(&g));
        let again: Vec<Vec<usize>> = enumerate_admissible_supports(&g).iter().map(|s| s.as_slice().to_vec()).collect();
        prop_assert_eq!(got, again);
    }

    #[test]
    fn partitions_satisfy_class_invariants(g in small_graph()) {
        for v_n in enumerate_admissible_supports(&g) {
            prop_assert!(is_admissible_support(&g, &v_n).unwrap());
            let p = partition_for_support(&g, &v_n).unwrap();
            for &r in p.v_zn.as_slice() {
                let inside = g.neighbors(r).iter().filter(|&&s| v_n.contains(s)).count();
                prop_assert!(inside >= 3);
            }
            for &r in p.v_zz.as_slice() {
                prop_assert!(g.neighbors(r).iter().all(|&s| !v_n.contains(s)));
            }
            prop_assert_eq!(p.v_n.len() + p.v_zn.len() + p.v_zz.len(), g.n());
            prop_assert_eq!(p.e_nn.len() + p.e_zn.len() + p.e_zz.len(), g.num_edges());
            prop_assert_eq!(p.tree_edges().len(), g.n() - 1);
            prop_assert_eq!(p.free_nn.len() + p.v_n.len(), p.e_nn.len() + 1);
            prop_assert_eq!(p.free_zn.len() + p.v_zn.len(), p.e_zn.len());
            prop_assert_eq!(p.free_zz.len() + p.v_zz.len(), p.e_zz.len());
            prop_assert_eq!(p.free_edges().len(), g.betti());
            prop_assert_eq!(p.zn_tree_edge.len(), p.v_zn.len());
            let nn_tree = p.e_nn.iter().filter(|&&e| p.tree.contains(e)).count();
            prop_assert_eq!(nn_tree + 1, p.v_n.len());
        }
    }

    #[test]
    fn spanning_trees_match_subset_count(g in small_graph()) {
        prop_assume!(g.num_edges() <= 16);
        prop_assert_eq!(spanning_tree_count(&g), brute_force_tree_count(&g));
    }

    #[test]
    fn cubic_enumerators_agree(seed in any::<u64>(), half in 2usize..7) {
        let g = random_3regular(2 * half, seed).unwrap();
        prop_assert_eq!(g.betti(), half + 1);
        prop_assert_eq!(enumerate_admissible_supports(&g), enumerate_supports_3regular(&g).unwrap());
    }
}

#[test]
fn betti_examples() {
    assert_eq!(fixtures::cycle(3).betti(), 1);
    assert_eq!(fixtures::path(6).betti(), 0);
    assert_eq!(fixtures::complete(4).betti(), 3);
}

#[test]
fn admissibility_examples() {
    let p = fixtures::path(3);
    assert!(!is_admissible_support(&p, &VertexSet::from_one_based(&[1, 3])).unwrap());
    assert!(is_admissible_support(&p, &p.vertices()).unwrap());
    assert!(is_admissible_support(&p, &VertexSet::new(vec![])).is_err());
    let k4 = fixtures::complete(4);
    let supports = enumerate_admissible_supports(&k4);
    assert_eq!(supports.len(), 5);
    assert_eq!(supports[0], k4.vertices());
    assert!(supports[1..].iter().all(|s| s.len() == 3));
}

#[test]
fn trees_and_disjoint_cycles_admit_only_the_whole_set() {
    for g in [fixtures::path(7), fixtures::flower(3, 4), fixtures::cycle_chain(3, 4), fixtures::cycle(6)] {
        assert_eq!(enumerate_admissible_supports(&g), vec![g.vertices()]);
    }
}

#[test]
fn k4_partition_sizes() {
    let k4 = fixtures::complete(4);
    let p = partition_for_support(&k4, &VertexSet::from_one_based(&[1, 2, 3])).unwrap();
    assert_eq!((p.e_zn.len(), p.free_zn.len(), p.e_zz.len()), (3, 2, 0));
    let whole = partition_for_support(&k4, &k4.vertices()).unwrap();
    assert_eq!(whole.free_nn.len(), 3);
    assert!(whole.v_zn.is_empty() && whole.v_zz.is_empty());
}

#[test]
fn spanning_tree_examples() {
    assert_eq!(spanning_tree_count(&fixtures::cycle(3)), 3);
    assert_eq!(spanning_tree_count(&fixtures::path(5)), 1);
    assert_eq!(spanning_tree_count(&fixtures::complete(4)), 16);
    assert_eq!(spanning_tree_count(&fixtures::complete(7)), 7u128.pow(5));
}

#[test]
fn induced_subgraph_edge_cases() {
    let g = fixtures::complete(4);
    let full = induced_subgraph(&g, &g.vertices());
    assert_eq!(full.original_edges(), g.edges());
    let one = induced_subgraph(&g, &VertexSet::new(vec![2]));
    assert_eq!((one.n(), one.edges.len()), (1, 0));
    let none = induced_subgraph(&g, &VertexSet::new(vec![]));
    assert_eq!((none.n(), none.edges.len()), (0, 0));
}

#[test]
fn graph_json_is_validated() {
    let bad = [
        r#"{"n": 3, "edges": [[1, 1], [1, 2], [2, 3]]}"#,
        r#"{"n": 3, "edges": [[1, 2], [2, 1], [2, 3]]}"#,
        r#"{"n": 4, "edges": [[1, 2], [3, 4]]}"#,
        r#"{"n": 3, "edges": [[1, 2], [2, 4]]}"#,
    ];
    for s in bad {
        let j: GraphJson = serde_json::from_str(s).unwrap();
        assert!(j.to_graph().is_err(), "{s}");
    }
    let j: GraphJson = serde_json::from_str(r#"{"n": 3, "edges": [[1, 2], [1, 3], [2, 3]]}"#).unwrap();
    let g = j.to_graph().unwrap();
    assert_eq!(g.to_json().edges, j.edges);
}
