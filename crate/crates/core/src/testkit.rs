//! Seeded random instances and a small corpus of derivations for property
//! tests and benchmarks.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::automata::{Acceptance, StreamAutomaton};
use crate::bitstring::BitString;
use crate::btproof::{Annotated, AnnotatedSequent, BtDerivation, BtRule};
use crate::derivation::{materialize, Derivation, Draft, Label};
use crate::cycleengine::{ConditionGraph, ConditionPair};
use crate::mucalc::{parse_formula, Sequent};
use crate::nwproof::{build_derivation, canonical_choice, NwDerivation};

pub use rand::SeedableRng;
pub type TestRng = ChaCha8Rng;

pub fn rng(seed: u64) -> TestRng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn names(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i}")).collect()
}

fn random_edges(rng: &mut TestRng, states: usize, letters: usize, max_succ: usize) -> Vec<(usize, usize, usize)> {
    let mut edges = Vec::new();
    for q in 0..states {
        for y in 0..letters {
            let k = rng.gen_range(0..=max_succ.min(states));
            let mut targets: Vec<usize> = (0..states).collect();
            for i in 0..k {
                let j = rng.gen_range(i..states);
                targets.swap(i, j);
                edges.push((q, y, targets[i]));
            }
        }
    }
    edges
}

/// Up to `max_states` states and `max_letters` letters; each state and letter
/// get between zero and `max_succ` successors.
pub fn random_nba(rng: &mut TestRng, max_states: usize, max_letters: usize, max_succ: usize) -> StreamAutomaton {
    let n = rng.gen_range(1..=max_states);
    let l = rng.gen_range(1..=max_letters);
    let edges = random_edges(rng, n, l, max_succ);
    let f: BTreeSet<usize> = (0..n).filter(|_| rng.gen_bool(0.5)).collect();
    StreamAutomaton::new(names("q", n), names("a", l), 0, edges, Acceptance::Buchi(f), false)
        .expect("generated automaton is well formed")
}

/// As [`random_nba`] with priorities in `0..=max_priority`.
pub fn random_parity(
    rng: &mut TestRng,
    max_states: usize,
    max_letters: usize,
    max_succ: usize,
    max_priority: u32,
) -> StreamAutomaton {
    let n = rng.gen_range(1..=max_states);
    let l = rng.gen_range(1..=max_letters);
    let edges = random_edges(rng, n, l, max_succ);
    let pri = (0..n).map(|_| rng.gen_range(0..=max_priority)).collect();
    StreamAutomaton::new(names("q", n), names("a", l), 0, edges, Acceptance::Parity(pri), false)
        .expect("generated automaton is well formed")
}

pub fn random_condition_graph(rng: &mut TestRng, max_nodes: usize, max_pairs: usize) -> ConditionGraph {
    let n = rng.gen_range(1..=max_nodes);
    let density = rng.gen_range(0.1..0.5);
    let succ = (0..n)
        .map(|_| (0..n).filter(|_| rng.gen_bool(density)).collect())
        .collect();
    let pairs = (0..rng.gen_range(0..=max_pairs))
        .map(|index| ConditionPair {
            index,
            inplay: (0..n).map(|_| rng.gen_bool(0.8)).collect(),
            good: (0..n).map(|_| rng.gen_bool(0.3)).collect(),
            bad: (0..n).map(|_| rng.gen_bool(0.15)).collect(),
        })
        .collect();
    ConditionGraph { succ, pairs }
}

/// Root sequents of the derivation corpus, one formula list per entry.
pub const CORPUS: &[&[&str]] = &[
    &["nu x. [] x"],
    &["mu x. [] x"],
    &["nu x. [] [] x"],
    &["nu x. (p | [] x)"],
    &["mu x. <> x | nu y. [] y"],
    &["nu y. mu x. (<> x | [] y)"],
    &["mu y. nu x. ([] x | <> y)"],
    &["nu x. ([] x & [] [] x)"],
    &["p | ~p"],
    &["mu x. <> x", "nu y. [] y"],
    &["nu x. [] x & mu y. [] y"],
    &["mu x. ([] x | p)"],
    &["nu x. mu y. ([] x & [] y)"],
];

pub fn corpus_sequent(items: &[&str]) -> Sequent {
    items
        .iter()
        .map(|s| parse_formula(s).expect("corpus formulas parse"))
        .collect()
}

/// The canonical derivation of every corpus entry.
pub fn corpus() -> Vec<(String, NwDerivation)> {
    CORPUS
        .iter()
        .map(|items| {
            let root = corpus_sequent(items);
            let d = build_derivation(&root, &mut |s| canonical_choice(s, 0), 1000)
                .expect("corpus entries unfold to derivations");
            (items.join(", "), d)
        })
        .collect()
}

/// Drafts for every node of `d`; discharge nodes are folded into the node
/// below them. Returns the drafts and the root draft.
pub fn to_drafts<S: Clone, R: Clone, P: Clone>(d: &Derivation<S, R, P>) -> (Vec<Draft<S, R, P>>, usize) {
    let rep = |mut v: usize| {
        while let Label::Discharge(_) = d.node(v).label {
            v = d.node(v).children[0];
        }
        v
    };
    let drafts = d
        .nodes()
        .iter()
        .enumerate()
        .map(|(v, n)| Draft {
            sequent: n.sequent.clone(),
            rule: match &n.label {
                Label::Rule(r) => Some(r.clone()),
                _ => None,
            },
            principal: n.principal.clone(),
            children: n.children.iter().map(|&c| rep(c)).collect(),
            back: d.companion(v).map(rep),
        })
        .collect();
    (drafts, rep(0))
}

fn reachable<S, R, P>(drafts: &[Draft<S, R, P>], root: usize) -> Vec<usize> {
    let mut out = vec![root];
    let mut i = 0;
    while i < out.len() {
        out.extend(drafts[out[i]].children.iter().copied());
        i += 1;
    }
    out
}

/// Every way of sending one back-edge to a different interior node. `None`
/// marks a mutant that is not even a well-formed derivation.
pub fn retarget_mutants<S: Clone + PartialEq, R: Clone, P: Clone>(
    d: &Derivation<S, R, P>,
) -> Vec<Option<Derivation<S, R, P>>> {
    let (drafts, root) = to_drafts(d);
    let nodes = reachable(&drafts, root);
    let mut out = Vec::new();
    for &leaf in &nodes {
        let Some(old) = drafts[leaf].back else { continue };
        for &t in &nodes {
            if t == old || drafts[t].rule.is_none() {
                continue;
            }
            let mut m = drafts.clone();
            m[leaf].back = Some(t);
            out.push(materialize(&m, root).ok());
        }
    }
    out
}

type BtDraft = Draft<AnnotatedSequent, BtRule, Annotated>;

fn map_annotation(a: &Annotated, k: u32, f: &dyn Fn(&BitString) -> BitString) -> Annotated {
    let mut sigma = a.1.clone();
    let s = f(sigma.at(k));
    *sigma.at_mut(k) = s;
    (a.0.clone(), sigma)
}

/// Rewrites component `k` of every annotation in the subtree of `v`.
fn map_subtree(drafts: &mut [BtDraft], v: usize, k: u32, f: &dyn Fn(&BitString) -> BitString) {
    for u in reachable(drafts, v) {
        let g = &mut drafts[u];
        g.sequent = g.sequent.iter().map(|a| map_annotation(a, k, f)).collect();
        g.principal = g.principal.as_ref().map(|a| map_annotation(a, k, f));
    }
}

/// Removes each Compress node in turn and undoes its renaming below it.
pub fn delete_compress_mutants(d: &BtDerivation) -> Vec<Option<BtDerivation>> {
    let (drafts, root) = to_drafts(d);
    let mut out = Vec::new();
    for v in reachable(&drafts, root) {
        let Some(BtRule::Compress { k, pattern }) = drafts[v].rule.clone() else { continue };
        let s = pattern.parent().expect("compress patterns are nonempty");
        let c = drafts[v].children[0];
        let mut m = drafts.clone();
        for g in m.iter_mut() {
            for x in g.children.iter_mut().filter(|x| **x == v) {
                *x = c;
            }
            if g.back == Some(v) {
                g.back = Some(c);
            }
        }
        let undo = |t: &BitString| {
            if s.is_prefix_of(t) {
                let mut bits = pattern.bits().to_vec();
                bits.extend_from_slice(&t.bits()[s.len()..]);
                BitString::from_bits(bits)
            } else {
                t.clone()
            }
        };
        map_subtree(&mut m, c, k, &undo);
        out.push(materialize(&m, if v == root { c } else { root }).ok());
    }
    out
}

fn flip(s: &BitString, i: usize) -> BitString {
    BitString::from_bits(s.bits().iter().enumerate().map(|(j, &b)| b ^ (j == i)))
}

/// Flips one annotation bit at one node, or one bit of a Compress pattern.
pub fn flip_mutants(d: &BtDerivation) -> Vec<Option<BtDerivation>> {
    flips(d, false)
}

/// Flips one annotation bit consistently in the whole subtree below a node.
/// Such a renaming often yields another correct proof.
pub fn subtree_flip_mutants(d: &BtDerivation) -> Vec<Option<BtDerivation>> {
    flips(d, true)
}

fn flips(d: &BtDerivation, subtree: bool) -> Vec<Option<BtDerivation>> {
    let (drafts, root) = to_drafts(d);
    let mut out = Vec::new();
    for v in reachable(&drafts, root) {
        if let (false, Some(BtRule::Compress { k, pattern })) = (subtree, &drafts[v].rule) {
            for i in 0..pattern.len() {
                let mut m = drafts.clone();
                m[v].rule = Some(BtRule::Compress {
                    k: *k,
                    pattern: flip(pattern, i),
                });
                out.push(materialize(&m, root).ok());
            }
        }
        for (f, sigma) in drafts[v].sequent.clone() {
            for (k, s) in sigma.components().iter().enumerate() {
                let k = 2 * k as u32;
                for i in 0..s.len() {
                    let mut m = drafts.clone();
                    if subtree {
                        let stem = BitString::from_bits(s.bits()[..=i].iter().copied());
                        map_subtree(&mut m, v, k, &|t| if stem.is_prefix_of(t) { flip(t, i) } else { t.clone() });
                    } else {
                        let target = (f.clone(), sigma.clone());
                        let local = |a: &Annotated| {
                            if *a == target {
                                map_annotation(a, k, &|t| flip(t, i))
                            } else {
                                a.clone()
                            }
                        };
                        m[v].sequent = m[v].sequent.iter().map(local).collect();
                        m[v].principal = m[v].principal.as_ref().map(local);
                    }
                    out.push(materialize(&m, root).ok());
                }
            }
        }
    }
    out
}
