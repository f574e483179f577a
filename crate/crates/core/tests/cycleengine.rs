use std::collections::BTreeSet;

use treedet_core::cycleengine::{all_scs_good, brute_scs_good, Verdict};
use treedet_core::testkit::{random_condition_graph, rng};

#[test]
fn engine_matches_enumeration() {
    let mut r = rng(31);
    let mut bad = 0;
    for _ in 0..500 {
        let g = random_condition_graph(&mut r, 12, 4);
        let fast = all_scs_good(&g);
        assert_eq!(fast.is_good(), brute_scs_good(&g).unwrap().is_good(), "{g:?}");
        match fast {
            Verdict::Bad { witness } => {
                bad += 1;
                assert!(g.is_scs(&witness));
                assert!(g.uncovered(&witness));
            }
            Verdict::Good { certificate } => {
                for (comp, i) in certificate {
                    let set: BTreeSet<usize> = comp.into_iter().collect();
                    assert!(!g.uncovered(&set));
                    assert!(comp_ok(&g, &set, i));
                }
            }
        }
    }
    assert!(bad > 50 && bad < 450, "{bad}");
}

fn comp_ok(g: &treedet_core::cycleengine::ConditionGraph, set: &BTreeSet<usize>, i: usize) -> bool {
    let p = &g.pairs[i];
    set.iter().all(|&v| p.inplay[v] && !p.bad[v]) && set.iter().any(|&v| p.good[v])
}
