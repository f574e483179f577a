use std::cmp::Ordering;
use std::collections::BTreeSet;

use proptest::prelude::*;
use treedet_core::bitstring::{is_binary_tree, lex_less, patched_closure, prefix_closure, tseq_less};
use treedet_core::{BitString, TSeq};

fn all_up_to(n: usize) -> Vec<BitString> {
    let mut out = vec![BitString::empty()];
    let mut layer = vec![BitString::empty()];
    for _ in 0..n {
        layer = layer.iter().flat_map(|s| [s.child(false), s.child(true)]).collect();
        out.extend(layer.iter().cloned());
    }
    out
}

// proper prefixes first, otherwise the first differing bit decides
fn oracle(s: &BitString, t: &BitString) -> Ordering {
    for (a, b) in s.bits().iter().zip(t.bits()) {
        if a != b {
            return if *a { Ordering::Greater } else { Ordering::Less };
        }
    }
    s.len().cmp(&t.len())
}

#[test]
fn lex_order_is_total_up_to_six() {
    let all = all_up_to(6);
    assert_eq!(all.len(), 127);
    for s in &all {
        assert!(!lex_less(s, s));
        for t in &all {
            assert_eq!(lex_less(s, t), oracle(s, t) == Ordering::Less, "{s} {t}");
            if s != t {
                assert!(lex_less(s, t) ^ lex_less(t, s));
            }
        }
    }
    let mut sorted = all.clone();
    sorted.sort();
    for w in sorted.windows(2) {
        assert!(lex_less(&w[0], &w[1]));
    }
}

fn bits() -> impl Strategy<Value = BitString> {
    prop::collection::vec(any::<bool>(), 0..8).prop_map(BitString::from_bits)
}

proptest! {
    #[test]
    fn substitute_identity(s in bits(), cut in 0usize..8) {
        let t = BitString::from_bits(s.bits()[..cut.min(s.len())].iter().copied());
        prop_assert_eq!(s.substitute(&t, &t).unwrap(), s.clone());
        let r = BitString::from_bits([true, false]);
        let moved = s.substitute(&t, &r).unwrap();
        prop_assert_eq!(moved.substitute(&r, &t).unwrap(), s);
    }

    #[test]
    fn closures(strings in prop::collection::vec(bits(), 1..6)) {
        let c = prefix_closure(&strings);
        for s in &strings {
            prop_assert!(c.contains(s));
        }
        for s in &c {
            if let Some(p) = s.parent() {
                prop_assert!(c.contains(&p));
            }
        }
        let p = patched_closure(&strings);
        prop_assert!(c.is_subset(&p));
        for s in p.difference(&c) {
            prop_assert!(s.is_all_zeros());
        }
        // filling in every missing sibling yields a binary tree
        let full: BTreeSet<BitString> = c
            .iter()
            .flat_map(|s| {
                let sib = s.parent().map(|q| q.child(!s.last().unwrap()));
                std::iter::once(s.clone()).chain(sib)
            })
            .collect();
        prop_assert!(is_binary_tree(&full));
    }

    #[test]
    fn tseq_order_is_blockwise(a in bits(), b in bits(), c in bits(), d in bits()) {
        let x = TSeq::from_components(vec![a.clone(), b.clone()]);
        let y = TSeq::from_components(vec![c.clone(), d.clone()]);
        let want = if a != c { lex_less(&a, &c) } else { lex_less(&b, &d) };
        prop_assert_eq!(tseq_less(&x, &y).unwrap(), want);
    }
}

#[test]
fn tseq_width_mismatch() {
    let x = TSeq::from_components(vec![BitString::empty()]);
    let y = TSeq::from_components(vec![]);
    assert!(tseq_less(&x, &y).is_err());
}
