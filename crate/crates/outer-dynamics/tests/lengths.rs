//! Frozen-value and invariant tests for the length and splitting module.

use num::rational::Ratio;
use outer_dynamics::corpus;
use outer_dynamics::formats::{EdgeDecl, MapDocument};
use outer_dynamics::lengths::{
    bcc_constant, constants, exponential_decomposition, goodness_lower, image_splitting,
    is_splitting, iterate_until_split, lengths, parse_splitting, relative_lengths,
    split_annotated, SplitCheck, SplitSearch, SplittingUnit,
};
use outer_dynamics::nielsen::Analysis;
use outer_dynamics::GraphMap;
use std::collections::BTreeMap;
use std::collections::BTreeSet;

fn analysis(map: GraphMap) -> Analysis {
    Analysis::new(map).expect("corpus analysis succeeds")
}

fn no_subgraph() -> BTreeSet<u32> {
    BTreeSet::new()
}

const RHO: [i32; 4] = [-1, -2, 1, 2];

#[test]
fn exponential_length_samples() {
    let a = analysis(corpus::fib());
    let f = no_subgraph();
    assert_eq!(lengths(&a, &[1], false, &f).unwrap().ell_exp, 1);
    assert_eq!(lengths(&a, &RHO, false, &f).unwrap().ell_exp, 0);
    let commutator = a.map().graph().circuit_of_word(&[1, 2, -1, -2]).unwrap();
    assert_eq!(
        lengths(&a, commutator.edges(), true, &f).unwrap().ell_exp,
        0
    );
    let b_rho = [2, -1, -2, 1, 2];
    assert_eq!(lengths(&a, &b_rho, false, &f).unwrap().ell_exp, 1);

    let ac = analysis(corpus::fibc());
    assert_eq!(lengths(&ac, &[3], false, &f).unwrap().ell_exp, 0);
}

#[test]
fn empty_subgraph_relative_length_is_the_plain_length() {
    let f = no_subgraph();
    for (_, map) in corpus::all_maps() {
        let a = analysis(map);
        for w in [vec![1], vec![1, 2], vec![2, -1], RHO.to_vec()] {
            let l = lengths(&a, &w, false, &f).unwrap();
            assert_eq!(l.ell_f, l.len);
            assert!(l.ell_exp <= l.ell_f);
        }
    }
}

#[test]
fn full_subgraph_relative_length_is_the_exponential_length() {
    for (_, map) in corpus::all_maps() {
        let all: BTreeSet<u32> = (1..=map.graph().n_edges() as u32).collect();
        let a = analysis(map);
        for w in [vec![1], vec![1, 2], vec![2, -1], RHO.to_vec()] {
            let l = lengths(&a, &w, false, &all).unwrap();
            assert_eq!(l.ell_f, l.ell_exp);
        }
    }
}

#[test]
fn decomposition_blocks_alternate_and_cover() {
    let ac = analysis(corpus::fibc());
    // c·ρ: one polynomial-edge stretch, then one family block.
    let word = [3, -1, -2, 1, 2];
    let dec = exponential_decomposition(&ac, &word, false).unwrap();
    assert_eq!(dec.blocks, vec![(0, 1, false), (1, 4, true)]);
    assert_eq!(dec.npg_max.len(), 1);
    assert_eq!(dec.npg_max[0].start, 1);
    assert_eq!(dec.counted(), 0);

    let a = analysis(corpus::fib());
    let dec = exponential_decomposition(&a, &[1], false).unwrap();
    assert!(dec.npg_max.is_empty());
    let dec = exponential_decomposition(&a, &RHO, false).unwrap();
    assert_eq!(dec.npg_max.len(), 1);
}

#[test]
fn constants_match_the_frozen_oracle() {
    for name in ["fib", "fibc", "fibs", "fib_inv"] {
        let map = corpus::all_maps()
            .into_iter()
            .find(|(n, _)| *n == name)
            .unwrap()
            .1;
        let t = constants(&analysis(map)).unwrap();
        assert_eq!(
            (t.k, t.cf_empirical, t.c_f, t.c, t.n3k),
            (4, 1, 2, 4, 6),
            "{name}"
        );
    }
    let t = constants(&analysis(corpus::identity2())).unwrap();
    assert_eq!((t.k, t.cf_empirical, t.c_f, t.n3k), (1, 0, 0, 0));
    let t = constants(&analysis(corpus::pg1())).unwrap();
    assert_eq!(t.n3k, 0);
}

#[test]
fn expanding_power_is_minimal_and_sufficient() {
    for (name, map) in corpus::all_maps() {
        let a = analysis(map);
        let t = constants(&a).unwrap();
        assert_eq!(t.c, t.k.max(t.c_f), "{name}");
        let gpg_prime = a.pg().gpg_prime();
        let outside: Vec<i32> = (1..=a.map().graph().n_edges() as i32)
            .filter(|e| !gpg_prime.contains(&(*e as u32)))
            .collect();
        if t.n3k == 0 {
            assert!(outside.is_empty(), "{name}");
            continue;
        }
        let f = no_subgraph();
        for &e in &outside {
            let w = a.map().iterate_word(&[e], t.n3k, None).unwrap();
            assert!(lengths(&a, &w, false, &f).unwrap().ell_exp >= 3 * t.k, "{name}");
        }
        if t.n3k > 1 {
            let some_short = outside.iter().any(|&e| {
                let w = a.map().iterate_word(&[e], t.n3k - 1, None).unwrap();
                lengths(&a, &w, false, &f).unwrap().ell_exp < 3 * t.k
            });
            assert!(some_short, "{name}: the expanding power is not minimal");
        }
    }
}

#[test]
fn bounded_cancellation_samples() {
    assert_eq!(bcc_constant(&corpus::identity2(), 4), (0, 0));
    assert_eq!(bcc_constant(&corpus::fib(), 4), (1, 2));
    assert_eq!(bcc_constant(&corpus::fibc(), 4), (1, 2));
}

#[test]
fn relative_length_of_the_whole_path_is_the_exponential_length() {
    let f = no_subgraph();
    for (_, map) in corpus::all_maps() {
        let a = analysis(map);
        for w in [vec![1], vec![1, 2], RHO.to_vec(), vec![2, -1, -2, 1, 2]] {
            let whole = relative_lengths(&a, &w, false, (0, w.len()), &f).unwrap();
            let l = lengths(&a, &w, false, &f).unwrap();
            assert_eq!(whole.ell_exp, l.ell_exp);
            assert_eq!(whole.ell_f, l.ell_f);
        }
    }
}

#[test]
fn relative_length_inside_a_family_block_is_zero() {
    let a = analysis(corpus::fib());
    let f = no_subgraph();
    let r = relative_lengths(&a, &RHO, false, (0, 1), &f).unwrap();
    assert_eq!(r.ell_exp, 0);
}

#[test]
fn relative_length_is_additive_and_sandwiched() {
    let f = no_subgraph();
    let a = analysis(corpus::fib());
    let t = constants(&a).unwrap();
    let mut words = vec![RHO.to_vec(), vec![2, -1, -2, 1, 2]];
    // Some genuine iterates.
    for n in 1..=6 {
        words.push(a.map().iterate_word(&[1], n, None).unwrap());
        words.push(a.map().iterate_word(&[2, -1], n, None).unwrap());
    }
    for w in words {
        let le = lengths(&a, &w, false, &f).unwrap().ell_exp;
        for cut in 0..=w.len() {
            let left = relative_lengths(&a, &w, false, (0, cut), &f).unwrap();
            let right = relative_lengths(&a, &w, false, (cut, w.len()), &f).unwrap();
            assert_eq!(left.ell_exp + right.ell_exp, le, "additivity at {cut}");
            // Sandwich against the standalone subpath length.
            let standalone = lengths(&a, &w[0..cut], false, &f).unwrap().ell_exp;
            assert!(left.ell_exp <= standalone);
            assert!(standalone <= left.ell_exp + 2 * t.c);
        }
    }
}

#[test]
fn splitting_checks() {
    let a = analysis(corpus::fib());
    // `f(a)=ab` splits after the first edge.
    assert_eq!(
        is_splitting(&a, &[1, 2], &[1], 64).unwrap(),
        SplitCheck::Verified
    );
    // The fixed family path refutes at its illegal turn immediately.
    match is_splitting(&a, &RHO, &[2], 64).unwrap() {
        SplitCheck::Refuted(k) => assert!(k <= 2),
        other => panic!("expected refutation, got {other:?}"),
    }
    let id = analysis(corpus::identity2());
    assert_eq!(
        is_splitting(&id, &[1, 2, -1], &[1, 2], 64).unwrap(),
        SplitCheck::Verified
    );
}

#[test]
fn iterate_until_split_examples() {
    let a = analysis(corpus::fib());
    match iterate_until_split(&a, &[1], 10).unwrap() {
        SplitSearch::Split { ap, k } => {
            assert_eq!(k, 0);
            assert_eq!(ap.units, vec![SplittingUnit::Edge(1)]);
        }
        other => panic!("single edge must split: {other:?}"),
    }
    match iterate_until_split(&a, &[1, -2], 10).unwrap() {
        SplitSearch::Split { k, .. } => assert!(k <= 10),
        other => panic!("expected a split: {other:?}"),
    }
    let id = analysis(corpus::identity2());
    match iterate_until_split(&id, &[1, 2, -1, 2], 10).unwrap() {
        SplitSearch::Split { k, .. } => assert_eq!(k, 0),
        other => panic!("identity paths split immediately: {other:?}"),
    }
}

#[test]
fn unit_count_equals_exponential_length_on_split_paths() {
    let f = no_subgraph();
    for (name, map) in corpus::all_maps() {
        let a = analysis(map);
        let gpg_prime = a.pg().gpg_prime();
        let mut words = vec![vec![1], vec![1, 2]];
        for n in 1..=5 {
            if let Ok(w) = a.map().iterate_word(&[1], n, Some(100_000)) {
                words.push(w);
            }
        }
        for w in words {
            let Some(ap) = split_annotated(&a, &w, true).unwrap() else {
                continue;
            };
            let edges_outside = ap
                .units
                .iter()
                .filter(|u| {
                    matches!(u, SplittingUnit::Edge(e) if !gpg_prime.contains(&e.unsigned_abs()))
                })
                .count();
            let le = lengths(&a, &w, false, &f).unwrap().ell_exp;
            assert_eq!(edges_outside, le, "{name}: {w:?}");
        }
    }
}

#[test]
fn split_paths_expand_under_the_expanding_power() {
    let f = no_subgraph();
    let a = analysis(corpus::fib());
    let t = constants(&a).unwrap();
    for seed in [vec![1], vec![2], vec![1, 2], vec![2, -1]] {
        let Some(_) = split_annotated(&a, &seed, true).unwrap() else {
            continue;
        };
        let le = lengths(&a, &seed, false, &f).unwrap().ell_exp;
        if le == 0 {
            continue;
        }
        let img = a.map().iterate_word(&seed, t.n3k, None).unwrap();
        let le_img = lengths(&a, &img, false, &f).unwrap().ell_exp;
        assert!(le_img >= 3 * le, "{seed:?}: {le_img} < 3*{le}");
    }
}

#[test]
fn image_splitting_rewrites_units() {
    let a = analysis(corpus::fib());
    // A single-edge decomposition maps to the parsed image.
    let ap = split_annotated(&a, &[1], false).unwrap().unwrap();
    let img = image_splitting(&a, &ap).unwrap();
    assert_eq!(img.path, vec![1, 2]);
    assert_eq!(
        img.units,
        vec![SplittingUnit::Edge(1), SplittingUnit::Edge(2)]
    );
    // The fixed family path is inert (up to orientation bookkeeping).
    let rec = &a.inps().eg_inps[0];
    let ap = split_annotated(&a, &rec.path.edges.clone(), false)
        .unwrap()
        .unwrap();
    assert_eq!(ap.units.len(), 1);
    let img = image_splitting(&a, &ap).unwrap();
    assert_eq!(img.units.len(), 1);
    assert!(matches!(img.units[0], SplittingUnit::EgInp { .. }));
}

/// A rose map document with the given images.
fn rose(ids: &[&str], images: &[&str]) -> MapDocument {
    MapDocument {
        vertices: vec!["v0".into()],
        edges: ids
            .iter()
            .map(|&id| EdgeDecl {
                id: id.into(),
                from: "v0".into(),
                to: "v0".into(),
            })
            .collect(),
        images: ids
            .iter()
            .zip(images)
            .map(|(&i, &w)| (i.to_string(), w.to_string()))
            .collect::<BTreeMap<_, _>>(),
        marking: ids.iter().map(|&s| s.to_string()).collect(),
        strata: None,
        f_subgraph: None,
        annotations: None,
    }
}

#[test]
fn closed_fixed_paths_over_linear_edges_parse_symbolically() {
    // fibc extended by a linear edge d ↦ dc.
    let doc = rose(&["a", "b", "c", "d"], &["ab", "a", "c", "dc"]);
    let a = analysis(doc.to_graph_map().unwrap());
    let units = parse_splitting(&a, &[4, 3, -4], false).unwrap();
    assert_eq!(
        units,
        vec![SplittingUnit::NegInp {
            edge: 4,
            word: vec![3],
            exponent: 1
        }]
    );
    // The closed fixed path is inert under the map.
    let ap = split_annotated(&a, &[4, 3, -4], false).unwrap().unwrap();
    let img = image_splitting(&a, &ap).unwrap();
    assert_eq!(img.path, vec![4, 3, -4]);
    assert_eq!(img.units, ap.units);
}

#[test]
fn exceptional_paths_track_their_width() {
    // Two linear edges over the same root: d ↦ dc, e ↦ ecc.
    let doc = rose(&["a", "b", "c", "d", "e"], &["ab", "a", "c", "dc", "ecc"]);
    let a = analysis(doc.to_graph_map().unwrap());
    let units = parse_splitting(&a, &[4, 3, 3, -5], false).unwrap();
    assert_eq!(
        units,
        vec![SplittingUnit::Exceptional {
            front: 4,
            back: 5,
            word: vec![3],
            width: 2
        }]
    );
    let ap = split_annotated(&a, &[4, 3, 3, -5], false).unwrap().unwrap();
    // Width changes by d₁−d₂ = 1−2 each step.
    let img = image_splitting(&a, &ap).unwrap();
    assert_eq!(img.path, a.map().apply_to_word(&[4, 3, 3, -5]));
    assert_eq!(
        img.units,
        vec![SplittingUnit::Exceptional {
            front: 4,
            back: 5,
            word: vec![3],
            width: 1
        }]
    );
    // Two more steps cross zero width and invert the root.
    let img2 = image_splitting(&a, &img).unwrap();
    assert_eq!(img2.path, vec![4, -5]);
    assert_eq!(
        img2.units,
        vec![SplittingUnit::Exceptional {
            front: 4,
            back: 5,
            word: vec![3],
            width: 0
        }]
    );
    let img3 = image_splitting(&a, &img2).unwrap();
    assert_eq!(img3.path, vec![4, -3, -5]);
    assert_eq!(
        img3.units,
        vec![SplittingUnit::Exceptional {
            front: 4,
            back: 5,
            word: vec![-3],
            width: 1
        }]
    );
}

#[test]
fn goodness_lower_bound_samples() {
    let a = analysis(corpus::fib());
    let g = a.map().graph();
    // Zero exponential length ⇒ zero.
    let commutator = g.circuit_of_word(&[1, 2, -1, -2]).unwrap();
    assert_eq!(
        goodness_lower(&a, &commutator).unwrap(),
        Ratio::new(0u64, 1u64)
    );
    // A single-edge circuit is completely split.
    let ca = g.circuit_of_word(&[1]).unwrap();
    assert_eq!(goodness_lower(&a, &ca).unwrap(), Ratio::new(1u64, 1u64));
    // Iterates of a legal circuit stay fully good.
    let mut w = vec![1];
    for _ in 0..6 {
        w = a.map().apply_to_word(&w);
    }
    let c = g.circuit_of_word(&w).unwrap();
    assert_eq!(goodness_lower(&a, &c).unwrap(), Ratio::new(1u64, 1u64));
    // Both junctures of [a·b⁻¹] sit at the illegal turn on one side, so no
    // factor can be cut out.
    let cab = g.circuit_of_word(&[1, -2]).unwrap();
    assert_eq!(goodness_lower(&a, &cab).unwrap(), Ratio::new(0u64, 1u64));
    // Bounds hold on arbitrary small circuits.
    for word in [vec![1, 1, 2], vec![1, -2], vec![2, 2, -1], vec![1, 2, 1, -2]] {
        let c = g.circuit_of_word(&word).unwrap();
        let g_hat = goodness_lower(&a, &c).unwrap();
        assert!(g_hat >= Ratio::new(0, 1) && g_hat <= Ratio::new(1, 1));
    }
}

#[test]
fn family_concatenations_have_zero_length_forever() {
    // A polynomial concatenation keeps zero exponential length under
    // iteration.
    let f = no_subgraph();
    let ac = analysis(corpus::fibc());
    let mut w: Vec<i32> = vec![3, -1, -2, 1, 2];
    for _ in 0..8 {
        assert_eq!(lengths(&ac, &w, false, &f).unwrap().ell_exp, 0);
        w = ac.map().apply_to_word(&w);
    }
}
