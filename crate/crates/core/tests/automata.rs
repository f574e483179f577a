use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::Rng;
use treedet_core::automata::{accepts_lasso, enumerate_lassos, sample_lassos, Acceptance, Lasso};
use treedet_core::determinize::{det_buchi, det_parity};
use treedet_core::testkit::{random_nba, random_parity, rng, TestRng};
use treedet_core::StreamAutomaton;

/// States seen infinitely often by the run of a deterministic automaton.
fn inf_states(aut: &StreamAutomaton, w: &Lasso) -> BTreeSet<usize> {
    let mut q = aut.initial();
    for &y in &w.stem {
        q = aut.successors(q, y)[0];
    }
    let mut starts = vec![q];
    let mut visited: Vec<Vec<usize>> = Vec::new();
    loop {
        let mut seen = Vec::new();
        for &y in &w.cycle {
            seen.push(q);
            q = aut.successors(q, y)[0];
        }
        visited.push(seen);
        if let Some(i) = starts.iter().position(|&s| s == q) {
            return visited[i..].iter().flatten().copied().collect();
        }
        starts.push(q);
    }
}

fn oracle(aut: &StreamAutomaton, w: &Lasso) -> bool {
    let inf = inf_states(aut, w);
    match aut.acceptance() {
        Acceptance::Buchi(f) => !inf.is_disjoint(f),
        Acceptance::Parity(p) => inf.iter().map(|&q| p[q]).min().unwrap() % 2 == 0,
        Acceptance::Rabin(pairs) => pairs
            .iter()
            .any(|r| !inf.is_disjoint(&r.good) && inf.is_disjoint(&r.bad)),
    }
}

fn random_dpa(r: &mut TestRng) -> StreamAutomaton {
    let n = r.gen_range(1..=5);
    let edges: Vec<_> = (0..n)
        .flat_map(|q| (0..2).map(move |y| (q, y)))
        .map(|(q, y)| (q, y, r.gen_range(0..n)))
        .collect();
    let pri = (0..n).map(|_| r.gen_range(0..4)).collect();
    let names = |p: &str, k: usize| (0..k).map(|i| format!("{p}{i}")).collect();
    StreamAutomaton::new(names("q", n), names("a", 2), 0, edges, Acceptance::Parity(pri), true).unwrap()
}

#[test]
fn deterministic_runs_match_simulation() {
    let mut r = rng(7);
    let lassos = enumerate_lassos(2, 2, 3);
    for _ in 0..100 {
        let a = random_dpa(&mut r);
        for w in &lassos {
            assert_eq!(accepts_lasso(&a, w).unwrap(), oracle(&a, w));
        }
    }
}

#[test]
fn rabin_outputs_match_simulation() {
    let mut r = rng(8);
    let lassos = enumerate_lassos(2, 2, 3);
    for _ in 0..40 {
        let b = det_buchi(&random_nba(&mut r, 3, 2, 2)).unwrap().automaton;
        let p = det_parity(&random_parity(&mut r, 3, 2, 2, 3)).unwrap().automaton;
        for a in [&b, &p] {
            for w in lassos.iter().filter(|w| w.stem.iter().chain(&w.cycle).all(|&y| y < a.num_letters())) {
                assert_eq!(accepts_lasso(a, w).unwrap(), oracle(a, w));
            }
        }
    }
}

fn lasso() -> impl Strategy<Value = Lasso> {
    (
        prop::collection::vec(0usize..2, 0..4),
        prop::collection::vec(0usize..2, 1..4),
    )
        .prop_map(|(stem, cycle)| Lasso::new(stem, cycle).unwrap())
}

proptest! {
    #[test]
    fn unrolling_does_not_change_verdicts(seed in any::<u64>(), w in lasso(), turn in 0usize..3) {
        let mut r = rng(seed);
        let nba = random_nba(&mut r, 4, 2, 3);
        let par = random_parity(&mut r, 4, 2, 3, 3);
        for a in [&nba, &par] {
            if w.stem.iter().chain(&w.cycle).any(|&y| y >= a.num_letters()) {
                continue;
            }
            let base = accepts_lasso(a, &w).unwrap();
            let mut stem = w.stem.clone();
            stem.extend(&w.cycle);
            prop_assert_eq!(accepts_lasso(a, &Lasso::new(stem, w.cycle.clone()).unwrap()).unwrap(), base);
            let doubled = [w.cycle.clone(), w.cycle.clone()].concat();
            prop_assert_eq!(accepts_lasso(a, &Lasso::new(w.stem.clone(), doubled).unwrap()).unwrap(), base);
            let k = turn % w.cycle.len();
            let mut stem = w.stem.clone();
            stem.extend(&w.cycle[..k]);
            let mut cycle = w.cycle.clone();
            cycle.rotate_left(k);
            prop_assert_eq!(accepts_lasso(a, &Lasso::new(stem, cycle).unwrap()).unwrap(), base);
            prop_assert_eq!(accepts_lasso(a, &w.canonical()).unwrap(), base);
        }
    }
}

#[test]
fn sampling_is_reproducible() {
    let a = sample_lassos(2, 3, 4, 50, 1, 0);
    assert_eq!(a, sample_lassos(2, 3, 4, 50, 1, 0));
    assert_ne!(a, sample_lassos(2, 3, 4, 50, 1, 1));
    assert!(a.iter().all(|w| w.stem.len() <= 3 && !w.cycle.is_empty() && w.cycle.len() <= 4));
}
