use super::*;

fn run(a: &NodeGraph, b: &NodeGraph) -> SymmetricMatching {
    match_graphs(a, b, &MatchingParams::default()).unwrap().matching
}

/// Path 0-1-2-3-4-5 with a pendant node 6 on node 2: branches of lengths
/// 1, 2 and 3 leave no nontrivial automorphism.
fn path_with_pendant() -> NodeGraph {
    NodeGraph::new(7, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (2, 6)])
}

/// Head 0 on chest 1, chest 1 on hip 2, arms (3,4) and (5,6) on the chest,
/// legs (7,8,9) and (10,11,12) on the hip.
fn figure() -> NodeGraph {
    NodeGraph::new(
        13,
        &[
            (0, 1),
            (1, 2),
            (1, 3),
            (3, 4),
            (1, 5),
            (5, 6),
            (2, 7),
            (7, 8),
            (8, 9),
            (2, 10),
            (10, 11),
            (11, 12),
        ],
    )
}

#[test]
fn p3_matches_ends_symmetrically() {
    let p3 = NodeGraph::path(3);
    let m = run(&p3, &p3);
    assert_eq!(m.sets_a(), vec![vec![0, 2], vec![1], vec![0, 2]]);
    assert_eq!(m.sets_b(), m.sets_a());
}

#[test]
fn star_leaves_form_one_group() {
    let s = NodeGraph::star(4);
    let m = run(&s, &s);
    assert_eq!(m.matches_of_a(0), vec![0]);
    for leaf in 1..=4 {
        assert_eq!(m.matches_of_a(leaf), vec![1, 2, 3, 4]);
    }
}

#[test]
fn asymmetric_tree_matches_itself_by_identity() {
    let g = path_with_pendant();
    let m = run(&g, &g);
    assert!(m.is_one_to_one());
    for a in 0..g.len() {
        assert_eq!(m.matches_of_a(a), vec![a]);
    }
}

#[test]
fn limbs_share_match_sets() {
    let g = figure();
    let m = run(&g, &g);
    let sets = m.sets_a();
    for v in 0..3 {
        assert_eq!(sets[v], vec![v]);
    }
    assert_eq!(sets[3], vec![3, 5]);
    assert_eq!(sets[5], vec![3, 5]);
    assert_eq!(sets[4], vec![4, 6]);
    assert_eq!(sets[7], vec![7, 10]);
    assert_eq!(sets[8], vec![8, 11]);
    assert_eq!(sets[12], vec![9, 12]);
}

#[test]
fn relabeling_permutes_the_matching() {
    let a = figure();
    let b = figure();
    let perm: Vec<usize> = (0..13).map(|v| (v * 5 + 3) % 13).collect();
    let base = run(&a, &b);
    let moved = run(&a, &b.relabel(&perm));
    let expected: Vec<Vec<usize>> = base
        .sets_a()
        .into_iter()
        .map(|s| {
            let mut t: Vec<usize> = s.into_iter().map(|v| perm[v]).collect();
            t.sort_unstable();
            t
        })
        .collect();
    assert_eq!(moved.sets_a(), expected);

    let moved_a = run(&a.relabel(&perm), &b);
    for v in 0..13 {
        assert_eq!(moved_a.matches_of_a(perm[v]), base.matches_of_a(v));
    }
}

#[test]
fn swapping_graphs_transposes() {
    let a = figure();
    let b = NodeGraph::new(
        12,
        &[(0, 1), (1, 2), (0, 3), (1, 4), (4, 5), (1, 6), (6, 7), (2, 8), (8, 9), (2, 10), (10, 11)],
    );
    let ab = run(&a, &b);
    let ba = run(&b, &a);
    assert_eq!(ab.sets_a(), ba.sets_b());
    assert_eq!(ab.sets_b(), ba.sets_a());
}

#[test]
fn weaker_second_order_keeps_unary_optima() {
    let default_scale = {
        let p3 = NodeGraph::path(3);
        assemble_affinity(&p3, &p3, &MatchingParams::default()).unwrap().scale
    };
    for g in [NodeGraph::path(3), NodeGraph::star(4)] {
        let base = run(&g, &g);
        for f in [1.0, 0.5, 0.1, 1e-3] {
            let params = MatchingParams {
                second_order_scale: SecondOrderScale::Factor(f * default_scale),
                ..MatchingParams::default()
            };
            let m = match_graphs(&g, &g, &params).unwrap().matching;
            assert_eq!(m.sets_a(), base.sets_a(), "factor {f}");
        }
    }
}

#[test]
fn matching_is_deterministic() {
    let g = figure();
    let a = match_graphs(&g, &g, &MatchingParams::default()).unwrap();
    let b = match_graphs(&g, &g, &MatchingParams::default()).unwrap();
    assert_eq!(a.matching, b.matching);
    assert_eq!(a.likelihoods, b.likelihoods);
}

#[test]
fn likelihoods_are_nonnegative_with_unit_peak() {
    let g = figure();
    let r = match_graphs(&g, &g, &MatchingParams::default()).unwrap();
    assert!(r.likelihoods.iter().all(|&x| x >= 0.0));
    assert_eq!(r.likelihoods.iter().copied().fold(0.0, f64::max), 1.0);
    assert!(r.residual < 1e-8);
}

#[test]
fn params_are_validated() {
    let g = NodeGraph::path(2);
    for p in [
        MatchingParams { sigma: 0.0, ..Default::default() },
        MatchingParams { gap_ratio: 1.0, ..Default::default() },
        MatchingParams { max_symmetry_order: 0, ..Default::default() },
    ] {
        assert!(match_graphs(&g, &g, &p).is_err());
    }
}

#[test]
fn dump_lists_pairs_and_unmatched() {
    let p3 = NodeGraph::path(3);
    let m = run(&p3, &p3);
    let v: serde_json::Value = serde_json::from_str(&matching_json(&m, &MatchingParams::default())).unwrap();
    assert_eq!(v["pairs"].as_array().unwrap().len(), 5);
    assert_eq!(v["unmatched_a"].as_array().unwrap().len(), 0);
    assert_eq!(v["params"]["sigma"], 0.5);
}
