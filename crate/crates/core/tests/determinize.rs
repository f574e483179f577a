use rand::Rng;
use treedet_core::automata::{compare_on, enumerate_lassos, Acceptance};
use treedet_core::bitstring::width;
use treedet_core::determinize::{
    det_buchi, det_buchi_step, det_buchi_step_with, det_parity, det_parity_step, det_parity_step_with,
    parity_to_buchi,
};
use treedet_core::testkit::{random_nba, random_parity, rng};
use treedet_core::{BitString, Colour, StreamAutomaton};

fn lassos_for(a: &StreamAutomaton) -> Vec<treedet_core::Lasso> {
    enumerate_lassos(a.num_letters(), 3, 4)
}

#[test]
fn buchi_determinization_preserves_language() {
    let mut r = rng(21);
    for _ in 0..60 {
        let a = random_nba(&mut r, 4, 2, 3);
        let d = det_buchi(&a).unwrap();
        let rep = compare_on(&a, &d.automaton, &lassos_for(&a)).unwrap();
        assert!(rep.agrees(), "{rep:?}");
        let n = a.num_states();
        assert!(d.pairs.len() <= 1 << (n + 1));
        for m in &d.macrostates {
            assert_ne!(m.colour(&BitString::empty()), Some(Colour::Red));
            assert!(m.f.values().all(|s| s.len() <= n));
            assert_eq!(m.colours.keys().cloned().collect::<std::collections::BTreeSet<_>>(), m.tree());
        }
    }
}

#[test]
fn parity_determinization_preserves_language() {
    let mut r = rng(22);
    for _ in 0..60 {
        let a = random_parity(&mut r, 4, 2, 3, 3);
        let d = det_parity(&a).unwrap();
        let lassos = lassos_for(&a);
        assert!(compare_on(&a, &d.automaton, &lassos).unwrap().agrees());
        assert!(compare_on(&a, &parity_to_buchi(&a).unwrap(), &lassos).unwrap().agrees());
        let n = a.num_states();
        let w = width(a.max_even_priority());
        assert!(d.pairs.len() <= w.max(1) << (n + 1));
        for m in &d.macrostates {
            for (i, c) in m.colours.iter().enumerate() {
                assert_ne!(c.get(&BitString::empty()), Some(&Colour::Red));
                assert_eq!(c.keys().cloned().collect::<std::collections::BTreeSet<_>>(), m.tree(2 * i as u32));
            }
            assert!(m.f.values().all(|s| s.components().iter().all(|c| c.len() <= n)));
        }
    }
}

#[test]
fn buchi_as_parity_has_the_same_language() {
    let mut r = rng(23);
    for _ in 0..40 {
        let a = random_nba(&mut r, 4, 2, 3);
        let Acceptance::Buchi(f) = a.acceptance() else { unreachable!() };
        let pri = (0..a.num_states()).map(|q| if f.contains(&q) { 0 } else { 1 }).collect();
        let p = StreamAutomaton::new(
            a.state_names().to_vec(),
            a.letter_names().to_vec(),
            a.initial(),
            a.transitions(),
            Acceptance::Parity(pri),
            false,
        )
        .unwrap();
        let lassos = lassos_for(&a);
        let db = det_buchi(&a).unwrap().automaton;
        let dp = det_parity(&p).unwrap().automaton;
        assert!(compare_on(&db, &dp, &lassos).unwrap().agrees());
    }
}

#[test]
fn witness_order_does_not_matter() {
    let mut r = rng(24);
    let mut cases = 0;
    while cases < 60 {
        let a = random_nba(&mut r, 4, 2, 3);
        let d = det_buchi(&a).unwrap();
        let m = &d.macrostates[r.gen_range(0..d.macrostates.len())];
        let y = r.gen_range(0..a.num_letters());
        let want = det_buchi_step(m, y, &a).unwrap();
        for _ in 0..10 {
            let got = det_buchi_step_with(m, y, &a, &mut |n| r.gen_range(0..n)).unwrap();
            assert_eq!(got, want);
        }
        let p = random_parity(&mut r, 4, 2, 3, 3);
        let d = det_parity(&p).unwrap();
        let m = &d.macrostates[r.gen_range(0..d.macrostates.len())];
        let y = r.gen_range(0..p.num_letters());
        let want = det_parity_step(m, y, &p).unwrap();
        for _ in 0..10 {
            let got = det_parity_step_with(m, y, &p, &mut |n| r.gen_range(0..n)).unwrap();
            assert_eq!(got, want);
        }
        cases += 1;
    }
}
