//! Binary-tree determinization of Büchi and parity automata into
//! deterministic Rabin automata.
//!
//! The step functions are generic over [`BuchiSource`] / [`ParitySource`] so
//! the same code drives both explicit automata and automata whose transitions
//! are computed on demand.

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Debug;

use crate::automata::{Acceptance, RabinPair, StreamAutomaton};
use crate::bitstring::{self, min_leaf_of, patched_closure, prefix_closure, BitString, Colour, TSeq};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DetError {
    #[error("letter {0} is not in the alphabet")]
    UnknownLetter(usize),
    #[error("expected an automaton with {0} acceptance")]
    WrongAcceptance(&'static str),
}

pub trait OmegaSource {
    type State: Ord + Clone + Debug;
    type Letter: ?Sized;

    fn initial(&self) -> Self::State;
    fn successors(&self, q: &Self::State, y: &Self::Letter) -> Vec<Self::State>;
}

pub trait BuchiSource: OmegaSource {
    fn is_final(&self, q: &Self::State) -> bool;
}

pub trait ParitySource: OmegaSource {
    fn priority(&self, q: &Self::State) -> u32;
    fn max_even(&self) -> Option<u32>;
}

impl OmegaSource for StreamAutomaton {
    type State = usize;
    type Letter = usize;

    fn initial(&self) -> usize {
        StreamAutomaton::initial(self)
    }

    fn successors(&self, q: &usize, y: &usize) -> Vec<usize> {
        StreamAutomaton::successors(self, *q, *y).to_vec()
    }
}

impl BuchiSource for StreamAutomaton {
    fn is_final(&self, q: &usize) -> bool {
        matches!(self.acceptance(), Acceptance::Buchi(f) if f.contains(q))
    }
}

impl ParitySource for StreamAutomaton {
    fn priority(&self, q: &usize) -> u32 {
        match self.acceptance() {
            Acceptance::Parity(p) => p[*q],
            _ => 0,
        }
    }

    fn max_even(&self) -> Option<u32> {
        self.max_even_priority()
    }
}

/// A state of the determinized Büchi automaton.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Macrostate<Q> {
    pub f: BTreeMap<Q, BitString>,
    /// Defined exactly on the tree spanned by the range of `f`.
    pub colours: BTreeMap<BitString, Colour>,
}

impl<Q: Ord + Clone> Macrostate<Q> {
    pub fn initial(q: Q) -> Self {
        Macrostate {
            f: [(q, BitString::empty())].into_iter().collect(),
            colours: [(BitString::empty(), Colour::White)].into_iter().collect(),
        }
    }

    pub fn tree(&self) -> BTreeSet<BitString> {
        prefix_closure(self.f.values())
    }

    pub fn colour(&self, s: &BitString) -> Option<Colour> {
        self.colours.get(s).copied()
    }
}

/// A state of the determinized parity automaton.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ParityMacrostate<Q> {
    pub f: BTreeMap<Q, TSeq>,
    /// `colours[i]` colours the tree at position `2i`.
    pub colours: Vec<BTreeMap<BitString, Colour>>,
}

impl<Q: Ord + Clone> ParityMacrostate<Q> {
    pub fn initial(q: Q, m: Option<u32>) -> Self {
        let w = bitstring::width(m);
        ParityMacrostate {
            f: [(q, TSeq::epsilons(m))].into_iter().collect(),
            colours: (0..w)
                .map(|_| [(BitString::empty(), Colour::White)].into_iter().collect())
                .collect(),
        }
    }

    /// `T_k`, including the patched all-zeros leaf.
    pub fn tree(&self, k: u32) -> BTreeSet<BitString> {
        patched_closure(self.f.values().map(|s| s.at(k)))
    }

    pub fn colour(&self, k: u32, s: &BitString) -> Option<Colour> {
        self.colours.get((k / 2) as usize)?.get(s).copied()
    }
}

/// Chooses which of `n` witnesses (sorted by node) to process next.
pub type WitnessPicker<'a> = dyn FnMut(usize) -> usize + 'a;

/// Always the least witness.
pub fn first_witness(_: usize) -> usize {
    0
}

fn working_tree(strings: &[BitString], patched: bool) -> BTreeSet<BitString> {
    if patched {
        patched_closure(strings)
    } else {
        prefix_closure(strings)
    }
}

/// Compress/colour on one tree. Rewrites `strings` in place and returns the
/// colouring of the final tree.
fn compress_colour(
    strings: &mut [BitString],
    patched: bool,
    pick: &mut WitnessPicker<'_>,
) -> BTreeMap<BitString, Colour> {
    let mut marks: BTreeMap<BitString, Colour> = BTreeMap::new();
    loop {
        let tree = working_tree(strings, patched);
        let witnesses: Vec<(BitString, bool)> = tree
            .iter()
            .filter_map(|t| {
                let zero = tree.contains(&t.child(false));
                let one = tree.contains(&t.child(true));
                match (zero, one) {
                    (true, false) => Some((t.clone(), false)),
                    (false, true) if !(patched && t.is_all_zeros()) => Some((t.clone(), true)),
                    _ => None,
                }
            })
            .collect();
        if witnesses.is_empty() {
            break;
        }
        let (t, case_b) = witnesses[pick(witnesses.len()) % witnesses.len()].clone();
        let from = t.child(case_b);
        for s in strings.iter_mut() {
            if from.is_prefix_of(s) {
                *s = s.substitute(&from, &t).unwrap();
            }
        }
        if case_b {
            let mut s = t.clone();
            loop {
                let c = marks.entry(s.clone()).or_insert(Colour::Green);
                if *c != Colour::Red {
                    *c = Colour::Green;
                }
                match s.last() {
                    Some(false) => s = s.parent().unwrap(),
                    _ => break,
                }
            }
        }
        for s in working_tree(strings, patched) {
            if t.is_strict_prefix_of(&s) {
                marks.insert(s, Colour::Red);
            }
        }
    }
    working_tree(strings, patched)
        .into_iter()
        .map(|s| {
            let c = marks.get(&s).copied().unwrap_or_default();
            (s, c)
        })
        .collect()
}

pub fn buchi_step<S: BuchiSource>(
    src: &S,
    m: &Macrostate<S::State>,
    y: &S::Letter,
    pick: &mut WitnessPicker<'_>,
) -> Macrostate<S::State> {
    let mut next: BTreeMap<S::State, BitString> = BTreeMap::new();
    for (a, s) in &m.f {
        for b in src.successors(a, y) {
            let t = s.child(src.is_final(&b));
            match next.get(&b) {
                Some(old) if *old >= t => {}
                _ => {
                    next.insert(b, t);
                }
            }
        }
    }
    let (keys, mut strings): (Vec<_>, Vec<_>) = next.into_iter().unzip();
    let colours = compress_colour(&mut strings, false, pick);
    Macrostate {
        f: keys.into_iter().zip(strings).collect(),
        colours,
    }
}

pub fn parity_step<S: ParitySource>(
    src: &S,
    m: &ParityMacrostate<S::State>,
    y: &S::Letter,
    pick: &mut WitnessPicker<'_>,
) -> ParityMacrostate<S::State> {
    let top = src.max_even();
    let min_leaves: Vec<Option<BitString>> = bitstring::positions(top)
        .map(|k| min_leaf_of(&m.tree(k)))
        .collect();
    let mut next: BTreeMap<S::State, TSeq> = BTreeMap::new();
    for (a, sigma) in &m.f {
        for b in src.successors(a, y) {
            let pb = src.priority(&b);
            let mut tau = sigma.clone();
            for k in bitstring::positions(top) {
                if k > pb {
                    if let Some(l) = &min_leaves[(k / 2) as usize] {
                        *tau.at_mut(k) = l.clone();
                    }
                }
                tau.at_mut(k).push(pb % 2 == 0 && k == pb);
            }
            match next.get(&b) {
                Some(old) if *old >= tau => {}
                _ => {
                    next.insert(b, tau);
                }
            }
        }
    }
    let (keys, mut sigmas): (Vec<_>, Vec<_>) = next.into_iter().unzip();
    let mut colours = Vec::new();
    for k in bitstring::positions(top) {
        let mut strings: Vec<BitString> = sigmas.iter().map(|s| s.at(k).clone()).collect();
        colours.push(compress_colour(&mut strings, true, pick));
        for (sigma, s) in sigmas.iter_mut().zip(strings) {
            *sigma.at_mut(k) = s;
        }
    }
    ParityMacrostate {
        f: keys.into_iter().zip(sigmas).collect(),
        colours,
    }
}

fn check_letter(src: &StreamAutomaton, y: usize) -> Result<(), DetError> {
    if y >= src.num_letters() {
        return Err(DetError::UnknownLetter(y));
    }
    Ok(())
}

pub fn det_buchi_step(
    s: &Macrostate<usize>,
    y: usize,
    src: &StreamAutomaton,
) -> Result<Macrostate<usize>, DetError> {
    det_buchi_step_with(s, y, src, &mut first_witness)
}

pub fn det_buchi_step_with(
    s: &Macrostate<usize>,
    y: usize,
    src: &StreamAutomaton,
    pick: &mut WitnessPicker<'_>,
) -> Result<Macrostate<usize>, DetError> {
    if !matches!(src.acceptance(), Acceptance::Buchi(_)) {
        return Err(DetError::WrongAcceptance("Büchi"));
    }
    check_letter(src, y)?;
    Ok(buchi_step(src, s, &y, pick))
}

pub fn det_parity_step(
    s: &ParityMacrostate<usize>,
    y: usize,
    src: &StreamAutomaton,
) -> Result<ParityMacrostate<usize>, DetError> {
    det_parity_step_with(s, y, src, &mut first_witness)
}

pub fn det_parity_step_with(
    s: &ParityMacrostate<usize>,
    y: usize,
    src: &StreamAutomaton,
    pick: &mut WitnessPicker<'_>,
) -> Result<ParityMacrostate<usize>, DetError> {
    if !matches!(src.acceptance(), Acceptance::Parity(_)) {
        return Err(DetError::WrongAcceptance("parity"));
    }
    check_letter(src, y)?;
    Ok(parity_step(src, s, &y, pick))
}

/// A deterministic Rabin automaton together with the macrostate behind each
/// state and the label of each Rabin pair.
#[derive(Debug, Clone)]
pub struct Determinized<M, P> {
    pub automaton: StreamAutomaton,
    pub macrostates: Vec<M>,
    pub pairs: Vec<P>,
}

fn explore<M: Ord + Clone>(
    src: &StreamAutomaton,
    init: M,
    mut step: impl FnMut(&M, usize) -> M,
) -> (Vec<M>, Vec<(usize, usize, usize)>) {
    let mut ids: BTreeMap<M, usize> = BTreeMap::new();
    let mut states = alloc::vec![init.clone()];
    ids.insert(init, 0);
    let mut queue = VecDeque::from([0usize]);
    let mut edges = Vec::new();
    while let Some(i) = queue.pop_front() {
        for y in 0..src.num_letters() {
            let next = step(&states[i], y);
            let j = match ids.get(&next) {
                Some(&j) => j,
                None => {
                    let j = states.len();
                    ids.insert(next.clone(), j);
                    states.push(next);
                    queue.push_back(j);
                    j
                }
            };
            edges.push((i, y, j));
        }
    }
    (states, edges)
}

fn rabin_automaton(
    src: &StreamAutomaton,
    n: usize,
    edges: Vec<(usize, usize, usize)>,
    pairs: Vec<RabinPair>,
) -> StreamAutomaton {
    let names = (0..n).map(|i| format!("m{i}")).collect();
    StreamAutomaton::new(
        names,
        src.letter_names().to_vec(),
        0,
        edges,
        Acceptance::Rabin(pairs),
        true,
    )
    .expect("exploration yields a total deterministic automaton")
}

pub fn det_buchi(src: &StreamAutomaton) -> Result<Determinized<Macrostate<usize>, BitString>, DetError> {
    if !matches!(src.acceptance(), Acceptance::Buchi(_)) {
        return Err(DetError::WrongAcceptance("Büchi"));
    }
    let (states, edges) = explore(src, Macrostate::initial(src.initial()), |m, y| {
        buchi_step(src, m, &y, &mut first_witness)
    });
    let labels: BTreeSet<BitString> = states.iter().flat_map(|m| m.colours.keys().cloned()).collect();
    let pairs = labels
        .iter()
        .map(|s| {
            let mut pair = RabinPair::default();
            for (i, m) in states.iter().enumerate() {
                match m.colour(s) {
                    Some(Colour::Green) => {
                        pair.good.insert(i);
                    }
                    None | Some(Colour::Red) => {
                        pair.bad.insert(i);
                    }
                    Some(Colour::White) => {}
                }
            }
            pair
        })
        .collect();
    let automaton = rabin_automaton(src, states.len(), edges, pairs);
    Ok(Determinized {
        automaton,
        macrostates: states,
        pairs: labels.into_iter().collect(),
    })
}

pub fn det_parity(
    src: &StreamAutomaton,
) -> Result<Determinized<ParityMacrostate<usize>, (u32, BitString)>, DetError> {
    if !matches!(src.acceptance(), Acceptance::Parity(_)) {
        return Err(DetError::WrongAcceptance("parity"));
    }
    let top = src.max_even_priority();
    let (states, edges) = explore(src, ParityMacrostate::initial(src.initial(), top), |m, y| {
        parity_step(src, m, &y, &mut first_witness)
    });
    let labels: BTreeSet<(u32, BitString)> = states
        .iter()
        .flat_map(|m| {
            m.colours
                .iter()
                .enumerate()
                .flat_map(|(i, c)| c.keys().map(move |s| (2 * i as u32, s.clone())))
        })
        .collect();
    let pairs = labels
        .iter()
        .map(|(k, s)| rabin_pair(&states, *k, s))
        .collect();
    let automaton = rabin_automaton(src, states.len(), edges, pairs);
    Ok(Determinized {
        automaton,
        macrostates: states,
        pairs: labels.into_iter().collect(),
    })
}

fn rabin_pair<Q: Ord + Clone>(states: &[ParityMacrostate<Q>], k: u32, s: &BitString) -> RabinPair {
    let mut pair = RabinPair::default();
    for (i, m) in states.iter().enumerate() {
        match m.colour(k, s) {
            Some(Colour::Green) => {
                pair.good.insert(i);
            }
            None | Some(Colour::Red) => {
                pair.bad.insert(i);
            }
            Some(Colour::White) => {}
        }
    }
    pair
}

/// The union of the source with one copy per even priority `k`, restricted to
/// states of priority at least `k`, whose accepting states are the copies of
/// priority exactly `k`.
pub fn parity_to_buchi(src: &StreamAutomaton) -> Result<StreamAutomaton, DetError> {
    let Acceptance::Parity(pri) = src.acceptance() else {
        return Err(DetError::WrongAcceptance("parity"));
    };
    let mut names: Vec<String> = src.state_names().to_vec();
    let mut copy: BTreeMap<(u32, usize), usize> = BTreeMap::new();
    let mut accepting = BTreeSet::new();
    for k in bitstring::positions(src.max_even_priority()) {
        for (a, &pa) in pri.iter().enumerate() {
            if pa >= k {
                let id = names.len();
                names.push(format!("{}_{k}", src.state_names()[a]));
                copy.insert((k, a), id);
                if pa == k {
                    accepting.insert(id);
                }
            }
        }
    }
    let mut edges = Vec::new();
    for (a, y, b) in src.transitions() {
        edges.push((a, y, b));
        for k in bitstring::positions(src.max_even_priority()) {
            if let Some(&bk) = copy.get(&(k, b)) {
                edges.push((a, y, bk));
                if let Some(&ak) = copy.get(&(k, a)) {
                    edges.push((ak, y, bk));
                }
            }
        }
    }
    Ok(StreamAutomaton::new(
        names,
        src.letter_names().to_vec(),
        src.initial(),
        edges,
        Acceptance::Buchi(accepting),
        false,
    )
    .expect("copies reference existing states"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::{accepts_lasso, run_prefix, Lasso};
    use alloc::string::ToString;
    use alloc::vec;

    fn b(s: &str) -> BitString {
        s.parse().unwrap()
    }

    fn fig1() -> StreamAutomaton {
        StreamAutomaton::new(
            vec!["q0".into(), "q1".into(), "q2".into()],
            vec!["a".into()],
            0,
            [(0, 0, 1), (1, 0, 1), (1, 0, 2), (2, 0, 1)],
            Acceptance::Buchi([1].into_iter().collect()),
            false,
        )
        .unwrap()
    }

    fn one_state(priority: u32) -> StreamAutomaton {
        StreamAutomaton::new(
            vec!["a".into()],
            vec!["a".into()],
            0,
            [(0, 0, 0)],
            Acceptance::Parity(vec![priority]),
            false,
        )
        .unwrap()
    }

    fn colours(items: &[(&str, Colour)]) -> BTreeMap<BitString, Colour> {
        items.iter().map(|(s, c)| (b(s), *c)).collect()
    }

    #[test]
    fn three_state_steps() {
        let src = fig1();
        let m0 = Macrostate::initial(0);
        let m1 = det_buchi_step(&m0, 0, &src).unwrap();
        assert_eq!(m1.f, [(1, b(""))].into_iter().collect());
        assert_eq!(m1.colours, colours(&[("", Colour::Green)]));
        let m2 = det_buchi_step(&m1, 0, &src).unwrap();
        assert_eq!(m2.f, [(1, b("1")), (2, b("0"))].into_iter().collect());
        assert!(m2.colours.values().all(|&c| c == Colour::White));
        let m3 = det_buchi_step(&m2, 0, &src).unwrap();
        assert_eq!(m3.f, m2.f);
        assert_eq!(
            m3.colours,
            colours(&[("", Colour::Green), ("0", Colour::Red), ("1", Colour::Red)])
        );
        assert_eq!(det_buchi_step(&m3, 0, &src).unwrap(), m3);
        assert_eq!(det_buchi_step(&m3, 1, &src), Err(DetError::UnknownLetter(1)));
    }

    #[test]
    fn three_state_automaton() {
        let d = det_buchi(&fig1()).unwrap();
        assert_eq!(d.macrostates.len(), 4);
        let a = Lasso::new(vec![], vec![0]).unwrap();
        assert_eq!(run_prefix(&d.automaton, &a, 4).unwrap(), vec![0, 1, 2, 3, 3]);
        assert!(accepts_lasso(&d.automaton, &a).unwrap());
    }

    #[test]
    fn non_accepting_loop() {
        let src = StreamAutomaton::new(
            vec!["q".into()],
            vec!["a".into()],
            0,
            [(0, 0, 0)],
            Acceptance::Buchi(BTreeSet::new()),
            false,
        )
        .unwrap();
        let d = det_buchi(&src).unwrap();
        assert_eq!(d.macrostates.len(), 1);
        assert!(d.macrostates[0].colours.values().all(|&c| c != Colour::Green));
        assert!(!accepts_lasso(&d.automaton, &Lasso::new(vec![], vec![0]).unwrap()).unwrap());
    }

    #[test]
    fn parity_steps() {
        let src = one_state(0);
        let s0 = ParityMacrostate::initial(0, Some(0));
        let s1 = det_parity_step(&s0, 0, &src).unwrap();
        assert_eq!(s1.f[&0], TSeq::from_components(vec![b("1")]));
        assert_eq!(
            s1.colours,
            vec![colours(&[("", Colour::White), ("0", Colour::White), ("1", Colour::White)])]
        );
        let s2 = det_parity_step(&s1, 0, &src).unwrap();
        assert_eq!(s2.f, s1.f);
        assert_eq!(s2.colour(0, &b("1")), Some(Colour::Green));
        assert_eq!(s2.colour(0, &b("")), Some(Colour::White));

        let d = det_parity(&src).unwrap();
        let a = Lasso::new(vec![], vec![0]).unwrap();
        assert!(accepts_lasso(&d.automaton, &a).unwrap());
        let i = d.pairs.iter().position(|p| *p == (0, b("1"))).unwrap();
        let Acceptance::Rabin(pairs) = d.automaton.acceptance() else { panic!() };
        assert!(!pairs[i].good.is_empty());

        let d = det_parity(&one_state(1)).unwrap();
        assert!(!accepts_lasso(&d.automaton, &a).unwrap());
        assert!(d.pairs.is_empty());
    }

    #[test]
    fn odd_priority_appends_zero() {
        let src = StreamAutomaton::new(
            vec!["a".into(), "b".into()],
            vec!["a".into()],
            0,
            [(0, 0, 1), (1, 0, 1)],
            Acceptance::Parity(vec![2, 3]),
            false,
        )
        .unwrap();
        // (ε,ε) becomes (0,0) and both positions compress back at ε
        let s0 = ParityMacrostate::initial(0, Some(2));
        let s1 = det_parity_step(&s0, 0, &src).unwrap();
        assert_eq!(s1.f[&1].components(), &[b(""), b("")]);
        assert!(s1.colours.iter().all(|c| *c == colours(&[("", Colour::White)])));
        assert_eq!(s1.colours.len(), 2);
    }

    #[test]
    fn union_automaton() {
        let b0 = parity_to_buchi(&one_state(0)).unwrap();
        assert_eq!(b0.state_names(), &["a".to_string(), "a_0".to_string()]);
        assert_eq!(b0.acceptance(), &Acceptance::Buchi([1].into_iter().collect()));
        assert_eq!(b0.successors(0, 0), &[0, 1]);
        assert_eq!(b0.successors(1, 0), &[1]);
        let b1 = parity_to_buchi(&one_state(1)).unwrap();
        assert_eq!(b1.num_states(), 1);
        assert_eq!(b1.acceptance(), &Acceptance::Buchi(BTreeSet::new()));
        assert!(parity_to_buchi(&fig1()).is_err());
    }
}
