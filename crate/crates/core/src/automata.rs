//! Stream automata over finite alphabets with Büchi, parity or Rabin
//! acceptance, and membership tests for ultimately periodic words.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AutomatonError {
    #[error("letter {0} is not in the alphabet")]
    UnknownLetter(usize),
    #[error("state {0} does not exist")]
    UnknownState(usize),
    #[error("Rabin acceptance is only supported for deterministic automata")]
    NondeterministicRabin,
    #[error("automaton is not deterministic")]
    NotDeterministic,
    #[error("state {state} has {count} successors on letter {letter}")]
    DeterminismViolated {
        state: usize,
        letter: usize,
        count: usize,
    },
    #[error("parity map has {got} entries for {want} states")]
    ParityArity { got: usize, want: usize },
    #[error("alphabets differ")]
    AlphabetMismatch,
    #[error("the loop of a lasso must be nonempty")]
    EmptyLoop,
    #[error("automaton needs at least one state")]
    NoStates,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct RabinPair {
    pub good: BTreeSet<usize>,
    pub bad: BTreeSet<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Acceptance {
    Buchi(BTreeSet<usize>),
    Parity(Vec<u32>),
    Rabin(Vec<RabinPair>),
}

/// States and letters are dense indices; names are kept for rendering.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StreamAutomaton {
    states: Vec<String>,
    letters: Vec<String>,
    delta: Vec<Vec<Vec<usize>>>,
    initial: usize,
    acceptance: Acceptance,
    deterministic: bool,
}

impl StreamAutomaton {
    pub fn new(
        states: Vec<String>,
        letters: Vec<String>,
        initial: usize,
        transitions: impl IntoIterator<Item = (usize, usize, usize)>,
        acceptance: Acceptance,
        deterministic: bool,
    ) -> Result<Self, AutomatonError> {
        let n = states.len();
        if n == 0 {
            return Err(AutomatonError::NoStates);
        }
        if initial >= n {
            return Err(AutomatonError::UnknownState(initial));
        }
        let mut delta = vec![vec![Vec::new(); letters.len()]; n];
        for (src, y, dst) in transitions {
            if src >= n {
                return Err(AutomatonError::UnknownState(src));
            }
            if dst >= n {
                return Err(AutomatonError::UnknownState(dst));
            }
            if y >= letters.len() {
                return Err(AutomatonError::UnknownLetter(y));
            }
            delta[src][y].push(dst);
        }
        for row in &mut delta {
            for succ in row.iter_mut() {
                succ.sort_unstable();
                succ.dedup();
            }
        }
        match &acceptance {
            Acceptance::Buchi(f) => {
                if let Some(&q) = f.iter().find(|&&q| q >= n) {
                    return Err(AutomatonError::UnknownState(q));
                }
            }
            Acceptance::Parity(p) if p.len() != n => {
                return Err(AutomatonError::ParityArity {
                    got: p.len(),
                    want: n,
                })
            }
            Acceptance::Parity(_) => {}
            Acceptance::Rabin(pairs) => {
                for pair in pairs {
                    if let Some(&q) = pair.good.iter().chain(&pair.bad).find(|&&q| q >= n) {
                        return Err(AutomatonError::UnknownState(q));
                    }
                }
            }
        }
        if deterministic {
            for (state, row) in delta.iter().enumerate() {
                for (letter, succ) in row.iter().enumerate() {
                    if succ.len() != 1 {
                        return Err(AutomatonError::DeterminismViolated {
                            state,
                            letter,
                            count: succ.len(),
                        });
                    }
                }
            }
        }
        Ok(StreamAutomaton {
            states,
            letters,
            delta,
            initial,
            acceptance,
            deterministic,
        })
    }

    pub fn state_names(&self) -> &[String] {
        &self.states
    }

    pub fn letter_names(&self) -> &[String] {
        &self.letters
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn num_letters(&self) -> usize {
        self.letters.len()
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn acceptance(&self) -> &Acceptance {
        &self.acceptance
    }

    pub fn is_deterministic(&self) -> bool {
        self.deterministic
    }

    pub fn successors(&self, q: usize, y: usize) -> &[usize] {
        &self.delta[q][y]
    }

    pub fn state_index(&self, name: &str) -> Option<usize> {
        self.states.iter().position(|s| s == name)
    }

    pub fn letter_index(&self, name: &str) -> Option<usize> {
        self.letters.iter().position(|s| s == name)
    }

    /// All transitions `(src, letter, dst)` in index order.
    pub fn transitions(&self) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        self.delta.iter().enumerate().flat_map(|(q, row)| {
            row.iter()
                .enumerate()
                .flat_map(move |(y, succ)| succ.iter().map(move |&d| (q, y, d)))
        })
    }

    /// Maximal even priority of a parity automaton.
    pub fn max_even_priority(&self) -> Option<u32> {
        match &self.acceptance {
            Acceptance::Parity(p) => p.iter().copied().filter(|k| k % 2 == 0).max(),
            _ => None,
        }
    }
}

/// The ultimately periodic word `stem · cycle^ω`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Lasso {
    pub stem: Vec<usize>,
    pub cycle: Vec<usize>,
}

impl Lasso {
    pub fn new(stem: Vec<usize>, cycle: Vec<usize>) -> Result<Self, AutomatonError> {
        if cycle.is_empty() {
            return Err(AutomatonError::EmptyLoop);
        }
        Ok(Lasso { stem, cycle })
    }

    /// Letter at position `i` of the infinite word.
    pub fn letter(&self, i: usize) -> usize {
        if i < self.stem.len() {
            self.stem[i]
        } else {
            self.cycle[(i - self.stem.len()) % self.cycle.len()]
        }
    }

    fn positions(&self) -> usize {
        self.stem.len() + self.cycle.len()
    }

    fn next_position(&self, p: usize) -> usize {
        if p + 1 < self.positions() {
            p + 1
        } else {
            self.stem.len()
        }
    }

    /// A representative of the same word used for de-duplication: the loop is
    /// reduced to its primitive root and the stem is shortened while its last
    /// letter can be absorbed by rotating the loop.
    pub fn canonical(&self) -> Lasso {
        let v = &self.cycle;
        let n = v.len();
        let root = (1..=n)
            .find(|&d| n.is_multiple_of(d) && (d..n).all(|i| v[i] == v[i - d]))
            .unwrap_or(n);
        let mut cycle = v[..root].to_vec();
        let mut stem = self.stem.clone();
        while stem.last().is_some() && stem.last() == cycle.last() {
            stem.pop();
            cycle.rotate_right(1);
        }
        Lasso { stem, cycle }
    }
}

fn check_letters(aut: &StreamAutomaton, w: &Lasso) -> Result<(), AutomatonError> {
    match w.stem.iter().chain(&w.cycle).find(|&&y| y >= aut.num_letters()) {
        Some(&y) => Err(AutomatonError::UnknownLetter(y)),
        None => Ok(()),
    }
}

/// Reachable part of the product of `aut` with the positions of `w`.
/// Node `q * P + p` stands for state `q` about to read position `p`.
fn product(aut: &StreamAutomaton, w: &Lasso) -> (Vec<Vec<usize>>, Vec<bool>) {
    let p_count = w.positions();
    let node = |q: usize, p: usize| q * p_count + p;
    let mut adj = vec![Vec::new(); aut.num_states() * p_count];
    for q in 0..aut.num_states() {
        for p in 0..p_count {
            let y = w.letter(p);
            let np = w.next_position(p);
            adj[node(q, p)] = aut.successors(q, y).iter().map(|&d| node(d, np)).collect();
        }
    }
    let alive = graph::reachable(&adj, node(aut.initial, 0));
    (adj, alive)
}

/// Does `aut` accept `stem · cycle^ω`?
pub fn accepts_lasso(aut: &StreamAutomaton, w: &Lasso) -> Result<bool, AutomatonError> {
    check_letters(aut, w)?;
    let p_count = w.positions();
    match &aut.acceptance {
        Acceptance::Buchi(f) => {
            let (adj, alive) = product(aut, w);
            Ok(graph::sccs_within(&adj, &alive).iter().any(|c| {
                graph::is_cyclic(&adj, c) && c.iter().any(|v| f.contains(&(v / p_count)))
            }))
        }
        Acceptance::Parity(pri) => {
            let (adj, reach) = product(aut, w);
            let evens: BTreeSet<u32> = pri.iter().copied().filter(|k| k % 2 == 0).collect();
            for d in evens {
                let alive: Vec<bool> = reach
                    .iter()
                    .enumerate()
                    .map(|(v, &r)| r && pri[v / p_count] >= d)
                    .collect();
                let hit = graph::sccs_within(&adj, &alive).iter().any(|c| {
                    graph::is_cyclic(&adj, c) && c.iter().any(|v| pri[v / p_count] == d)
                });
                if hit {
                    return Ok(true);
                }
            }
            Ok(false)
        }
        Acceptance::Rabin(pairs) => {
            if !aut.deterministic {
                return Err(AutomatonError::NondeterministicRabin);
            }
            let mut seen = BTreeMap::new();
            let mut trace = Vec::new();
            let (mut q, mut p) = (aut.initial, 0);
            let start = loop {
                if let Some(&i) = seen.get(&(q, p)) {
                    break i;
                }
                seen.insert((q, p), trace.len());
                trace.push(q);
                q = aut.delta[q][w.letter(p)][0];
                p = w.next_position(p);
            };
            let inf: BTreeSet<usize> = trace[start..].iter().copied().collect();
            Ok(pairs
                .iter()
                .any(|r| !r.good.is_disjoint(&inf) && r.bad.is_disjoint(&inf)))
        }
    }
}

/// The first `n + 1` states of the unique run of a deterministic automaton.
pub fn run_prefix(aut: &StreamAutomaton, w: &Lasso, n: usize) -> Result<Vec<usize>, AutomatonError> {
    if !aut.deterministic {
        return Err(AutomatonError::NotDeterministic);
    }
    check_letters(aut, w)?;
    let mut out = Vec::with_capacity(n + 1);
    let mut q = aut.initial;
    out.push(q);
    for i in 0..n {
        q = aut.delta[q][w.letter(i)][0];
        out.push(q);
    }
    Ok(out)
}

fn words(n_letters: usize, len: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|w| {
                (0..n_letters).map(move |y| {
                    let mut w = w.clone();
                    w.push(y);
                    w
                })
            })
            .collect();
    }
    out
}

/// All lassos with `|stem| ≤ max_stem` and `1 ≤ |cycle| ≤ max_loop`, one per
/// canonical representative, in enumeration order.
pub fn enumerate_lassos(n_letters: usize, max_stem: usize, max_loop: usize) -> Vec<Lasso> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for su in 0..=max_stem {
        for u in words(n_letters, su) {
            for sv in 1..=max_loop {
                for v in words(n_letters, sv) {
                    let c = Lasso { stem: u.clone(), cycle: v }.canonical();
                    if seen.insert(c.clone()) {
                        out.push(c);
                    }
                }
            }
        }
    }
    out
}

/// `count` random lassos from the RNG stream `batch` of `seed`, canonicalized.
pub fn sample_lassos(
    n_letters: usize,
    max_stem: usize,
    max_loop: usize,
    count: usize,
    seed: u64,
    batch: u64,
) -> Vec<Lasso> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(batch);
    let max_loop = max_loop.max(1);
    (0..count)
        .map(|_| {
            let su = rng.gen_range(0..=max_stem);
            let sv = rng.gen_range(1..=max_loop);
            let stem = (0..su).map(|_| rng.gen_range(0..n_letters)).collect();
            let cycle = (0..sv).map(|_| rng.gen_range(0..n_letters)).collect();
            Lasso { stem, cycle }.canonical()
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CompareReport {
    Agree { tested: usize },
    Disagree {
        lasso: Lasso,
        left: bool,
        right: bool,
        tested: usize,
    },
}

impl CompareReport {
    pub fn agrees(&self) -> bool {
        matches!(self, CompareReport::Agree { .. })
    }
}

pub fn check_same_alphabet(a: &StreamAutomaton, b: &StreamAutomaton) -> Result<(), AutomatonError> {
    if a.letters != b.letters {
        return Err(AutomatonError::AlphabetMismatch);
    }
    Ok(())
}

/// Compares verdicts on the given lassos, stopping at the first disagreement.
pub fn compare_on(
    a: &StreamAutomaton,
    b: &StreamAutomaton,
    lassos: &[Lasso],
) -> Result<CompareReport, AutomatonError> {
    check_same_alphabet(a, b)?;
    for (i, w) in lassos.iter().enumerate() {
        let (left, right) = (accepts_lasso(a, w)?, accepts_lasso(b, w)?);
        if left != right {
            return Ok(CompareReport::Disagree {
                lasso: w.clone(),
                left,
                right,
                tested: i + 1,
            });
        }
    }
    Ok(CompareReport::Agree {
        tested: lassos.len(),
    })
}

/// Exhaustive comparison, or seeded sampling when `sampling = (count, seed)`.
pub fn compare_on_lassos(
    a: &StreamAutomaton,
    b: &StreamAutomaton,
    max_stem: usize,
    max_loop: usize,
    sampling: Option<(usize, u64)>,
) -> Result<CompareReport, AutomatonError> {
    check_same_alphabet(a, b)?;
    let lassos = match sampling {
        None => enumerate_lassos(a.num_letters(), max_stem, max_loop),
        Some((count, seed)) => {
            let mut seen = BTreeSet::new();
            sample_lassos(a.num_letters(), max_stem, max_loop, count, seed, 0)
                .into_iter()
                .filter(|w| seen.insert(w.clone()))
                .collect()
        }
    };
    compare_on(a, b, &lassos)
}
