mod common;

use std::collections::BTreeSet;

use common::*;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;
use vinelasso::rvine::{regressor_sets, PartialMatrix};
use vinelasso::{IndependencePattern, RVineMatrix};

#[test]
fn example_one_edges() {
    let m = example_one();
    let tree1: BTreeSet<(usize, usize)> = m
        .edges_of_tree(1)
        .unwrap()
        .iter()
        .map(|e| (e.conditioned.0.min(e.conditioned.1), e.conditioned.0.max(e.conditioned.1)))
        .collect();
    assert_eq!(tree1, BTreeSet::from([(1, 2), (2, 6), (3, 6), (2, 5), (4, 5)]));
    let t5 = m.edge(5, 1);
    assert_eq!(t5.conditioned, (4, 1));
    let cond: BTreeSet<usize> = t5.conditioning.iter().copied().collect();
    assert_eq!(cond, BTreeSet::from([2, 3, 5, 6]));
    assert_eq!(m.eta(), vec![1, 2, 6, 3, 5, 4]);
    assert!(is_regular_vine(&m).is_ok());
}

#[test]
fn example_one_regressor_sets() {
    let pattern = IndependencePattern::from_rows(vec![
        vec![],
        vec![false],
        vec![true, true],
        vec![false, false, true],
        vec![true, false, false, true],
        vec![true, true, true, true, true],
    ])
    .unwrap();
    let sets = regressor_sets(&example_one(), &pattern).unwrap();
    let got: Vec<(usize, Vec<usize>, Vec<usize>)> = sets
        .into_iter()
        .map(|s| {
            let mut a = s.active;
            let mut u = s.unused;
            a.sort_unstable();
            u.sort_unstable();
            (s.variable, a, u)
        })
        .collect();
    assert_eq!(
        got,
        vec![
            (1, vec![], vec![]),
            (2, vec![1], vec![]),
            (6, vec![1, 2], vec![]),
            (3, vec![1, 6], vec![2]),
            (5, vec![1, 2], vec![3, 6]),
            (4, vec![2, 3, 5], vec![1, 6]),
        ]
    );
}

#[test]
fn example_five_allowed_entries() {
    let p = PartialMatrix::from_rows(vec![
        vec![3],
        vec![0, 2],
        vec![0, 0, 1],
        vec![0, 0, 0, 4],
        vec![0, 0, 0, 6, 6],
        vec![2, 5, 4, 5, 5, 5],
    ])
    .unwrap();
    assert_eq!(p.allowed_entries(5, 1).unwrap(), vec![5]);
    let mut black = p.blacklist(5, 1).unwrap();
    black.sort_unstable();
    assert_eq!(black, vec![1, 4, 6]);
}

#[test]
fn rejects_broken_matrices() {
    // column 1 repeats a label
    assert!(RVineMatrix::from_rows(vec![vec![3], vec![2, 2], vec![2, 1, 1]]).is_err());
    // tree 1 is the path 4-3-2-1, so (4,1|3) joins no pair of tree-1 edges
    let bad = vec![vec![4], vec![2, 1], vec![1, 3, 3], vec![3, 2, 2, 2]];
    let unchecked = RVineMatrix::from_rows_unchecked(bad.clone()).unwrap();
    assert!(is_regular_vine(&unchecked).is_err());
    assert!(RVineMatrix::from_rows(bad).is_err());
}

/// Completes a random diagonal by choosing uniformly among the allowed
/// entries, bottom row first.
fn random_completion(rng: &mut rand_chacha::ChaCha8Rng, d: usize) -> RVineMatrix {
    let mut diag: Vec<usize> = (1..=d).collect();
    diag.shuffle(rng);
    let mut p = PartialMatrix::with_diagonal(&diag).unwrap();
    for i in (2..=d).rev() {
        for j in 1..i {
            let allowed = p.allowed_entries(i, j).unwrap();
            assert!(!allowed.is_empty(), "no allowed entry at ({i}, {j})");
            let v = allowed[rng.random_range(0..allowed.len())];
            p.set(i, j, v);
        }
    }
    p.finish().unwrap()
}

#[test]
fn random_completions_are_valid() {
    let mut r = rng(2024);
    for _ in 0..500 {
        let d = r.random_range(4..=8);
        let m = random_completion(&mut r, d);
        let report = m.validate_all().unwrap();
        assert!(report.ok, "{:?}\n{:?}", m.rows(), report.violations);
        if let Err(e) = is_regular_vine(&m) {
            panic!("{:?}: {e}", m.rows());
        }
    }
}

proptest! {
    #[test]
    fn relabelling_preserves_validity(seed in 0u64..100_000, d in 3usize..9) {
        let mut r = rng(seed);
        let m = random_completion(&mut r, d);
        let mut map: Vec<usize> = (1..=d).collect();
        map.shuffle(&mut r);
        let relabelled = m.relabel(&map);
        prop_assert!(relabelled.validate_all().unwrap().ok);
        prop_assert!(is_regular_vine(&relabelled).is_ok());
    }

    #[test]
    fn eta_reverses_the_diagonal(seed in 0u64..100_000, d in 2usize..9) {
        let m = random_completion(&mut rng(seed), d);
        let mut diag = m.diagonal();
        diag.reverse();
        prop_assert_eq!(m.eta(), diag);
    }

    #[test]
    fn regressor_sets_partition_predecessors(seed in 0u64..100_000, d in 2usize..8, bits in proptest::collection::vec(any::<bool>(), 28)) {
        let m = random_completion(&mut rng(seed), d);
        let mut rows = vec![Vec::new()];
        let mut k = 0;
        for i in 2..=d {
            rows.push((0..i - 1).map(|_| { k += 1; bits[k - 1] }).collect());
        }
        let pattern = IndependencePattern::from_rows(rows).unwrap();
        let eta = m.eta();
        for (j, s) in regressor_sets(&m, &pattern).unwrap().into_iter().enumerate() {
            prop_assert_eq!(s.variable, eta[j]);
            let mut both: Vec<usize> = s.active.iter().chain(&s.unused).copied().collect();
            both.sort_unstable();
            let mut before = eta[..j].to_vec();
            before.sort_unstable();
            prop_assert_eq!(both, before);
        }
    }
}
