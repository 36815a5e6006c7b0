//! Tests for graph self-maps: derivatives, turn legality, the derived
//! filtration, transition matrices and the structural validator.

use outer_dynamics::corpus;
use outer_dynamics::matrix::{big, big_mul, pf_data};
use outer_dynamics::nielsen::Analysis;
use outer_dynamics::{GraphMap, MarkedGraph, StratumKind, Turn, TurnLegality};

#[test]
fn derivative_samples() {
    let fib = corpus::fib();
    assert_eq!(fib.derivative(1), 1);
    assert_eq!(fib.derivative(-1), -2);
    assert_eq!(fib.derivative(2), 1);
    let id = corpus::identity2();
    for d in [1, -1, 2, -2] {
        assert_eq!(id.derivative(d), d);
    }
}

#[test]
fn turn_legality_samples() {
    let fib = corpus::fib();
    assert_eq!(
        fib.turn_legality(Turn::new(1, 2)).unwrap(),
        TurnLegality::Illegal { k: 1 }
    );
    assert_eq!(
        fib.turn_legality(Turn::new(-1, 2)).unwrap(),
        TurnLegality::Legal
    );
    assert!(fib.turn_legality(Turn::new(1, 1)).is_err());
    let id = corpus::identity2();
    for (a, b) in [(1, 2), (1, -2), (-1, 2), (1, -1)] {
        assert_eq!(id.turn_legality(Turn::new(a, b)).unwrap(), TurnLegality::Legal);
    }
}

#[test]
fn turn_legality_matches_brute_force() {
    for (name, map) in corpus::all_maps() {
        let g = map.graph();
        let dirs: Vec<i32> = g.oriented_edges().collect();
        let cap = dirs.len() * dirs.len();
        for &a in &dirs {
            for &b in &dirs {
                if a == b || g.origin(a) != g.origin(b) {
                    continue;
                }
                let mut x = a;
                let mut y = b;
                let mut brute = TurnLegality::Legal;
                for k in 1..=cap {
                    x = map.derivative(x);
                    y = map.derivative(y);
                    if x == y {
                        brute = TurnLegality::Illegal { k };
                        break;
                    }
                }
                assert_eq!(
                    map.turn_legality(Turn::new(a, b)).unwrap(),
                    brute,
                    "{name}: turn ({a},{b})"
                );
            }
        }
    }
}

#[test]
fn corpus_strata_are_as_expected() {
    let fib = corpus::fib();
    assert_eq!(fib.strata().len(), 1);
    let s = &fib.strata()[0];
    assert_eq!(s.kind, StratumKind::Eg);
    assert_eq!(s.matrix, vec![vec![1, 1], vec![1, 0]]);
    let lambda = s.pf.as_ref().unwrap().lambda;
    assert!((lambda - 1.618033988749895).abs() < 1e-10);

    let fibc = corpus::fibc();
    assert_eq!(fibc.strata().len(), 2);
    assert_eq!(fibc.strata()[0].edges, vec![1, 2]);
    assert_eq!(fibc.strata()[0].kind, StratumKind::Eg);
    assert_eq!(fibc.strata()[1].edges, vec![3]);
    assert_eq!(fibc.strata()[1].kind, StratumKind::Neg);
    assert_eq!(fibc.strata()[1].matrix, vec![vec![1]]);

    let fibs = corpus::fibs();
    assert_eq!(fibs.strata().len(), 2);
    assert_eq!(fibs.strata()[0].edges, vec![1, 2]);
    assert_eq!(fibs.strata()[1].edges, vec![3]);
    assert_eq!(fibs.strata()[1].kind, StratumKind::Neg);

    let id = corpus::identity2();
    assert_eq!(id.strata().len(), 2);
    assert!(id.strata().iter().all(|s| s.kind == StratumKind::Neg));

    let pg1 = corpus::pg1();
    assert_eq!(pg1.strata().len(), 2);
    assert_eq!(pg1.strata()[0].edges, vec![1]);
    assert!(pg1.strata().iter().all(|s| s.kind == StratumKind::Neg));
}

#[test]
fn transition_matrices_are_functorial() {
    for (name, map) in corpus::all_maps() {
        let edges: Vec<u32> = (1..=map.graph().n_edges() as u32).collect();
        let m = big(&map.occurrence_matrix(&edges, &edges));
        let mut mn = m.clone();
        for n in 1..=5usize {
            // Column convention: entry (a, b) counts `a` in the image of `b`.
            for (j, &e) in edges.iter().enumerate() {
                let image = map.iterate_word(&[e as i32], n, None).unwrap();
                for (i, &f) in edges.iter().enumerate() {
                    let count = image
                        .iter()
                        .filter(|x| x.unsigned_abs() == f)
                        .count();
                    assert_eq!(
                        mn[i][j],
                        count.into(),
                        "{name}: M^{n}[{f}][{e}]"
                    );
                }
            }
            mn = big_mul(&mn, &m);
        }
    }
}

#[test]
fn stratum_classification_agrees_with_the_eigenvalue() {
    for (name, map) in corpus::all_maps() {
        for s in map.strata() {
            if s.kind == StratumKind::Zero {
                continue;
            }
            let lambda = pf_data(&s.matrix).unwrap().lambda;
            assert_eq!(
                s.kind == StratumKind::Eg,
                lambda > 1.0 + 1e-9,
                "{name}: stratum {:?} lambda {lambda}",
                s.edges
            );
        }
    }
}

#[test]
fn iterates_respect_the_length_cap() {
    let fib = corpus::fib();
    assert!(fib.iterate_word(&[1], 40, Some(1000)).is_err());
    assert_eq!(fib.iterate_word(&[1], 3, Some(1000)).unwrap(), vec![1, 2, 1, 1, 2]);
}

#[test]
fn validator_passes_the_corpus_and_flags_a_bad_linear_edge() {
    for map in [corpus::fib(), corpus::identity2()] {
        let a = Analysis::new(map).unwrap();
        let report = a.validate_structure();
        assert!(report.all_passed(), "{:?}", report.checks);
    }
    // A linear edge with its suffix on the wrong side.
    let g = MarkedGraph::rose(2);
    let bad = GraphMap::new(g, vec![0], vec![vec![1], vec![1, 2]], None).unwrap();
    let a = Analysis::new(bad).unwrap();
    let report = a.validate_structure();
    assert!(!report.all_passed());
}
