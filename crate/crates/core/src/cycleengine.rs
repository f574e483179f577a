//! Decides whether every strongly connected subgraph of a finite graph is
//! covered by some pair that stays in play, is never bad and is good
//! somewhere on it.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

use crate::graph;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EngineError {
    #[error("graph has {0} nodes, the exhaustive check handles at most 15")]
    TooLarge(usize),
}

/// Node predicates of one pair, each of length `|nodes|`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConditionPair {
    pub index: usize,
    pub inplay: Vec<bool>,
    pub good: Vec<bool>,
    pub bad: Vec<bool>,
}

impl ConditionPair {
    fn clean_on(&self, set: &[usize]) -> bool {
        set.iter().all(|&v| self.inplay[v] && !self.bad[v])
    }

    fn progresses_on(&self, set: &[usize]) -> bool {
        set.iter().any(|&v| self.good[v])
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ConditionGraph {
    pub succ: Vec<Vec<usize>>,
    pub pairs: Vec<ConditionPair>,
}

impl ConditionGraph {
    pub fn num_nodes(&self) -> usize {
        self.succ.len()
    }

    /// Does the induced subgraph on `set` admit a closed walk through all of it?
    pub fn is_scs(&self, set: &BTreeSet<usize>) -> bool {
        let Some(&first) = set.iter().next() else {
            return false;
        };
        if set.len() == 1 {
            return self.succ[first].contains(&first);
        }
        let forward = self.reach_within(first, set, false);
        let backward = self.reach_within(first, set, true);
        forward == *set && backward == *set
    }

    fn reach_within(&self, start: usize, set: &BTreeSet<usize>, reverse: bool) -> BTreeSet<usize> {
        let mut seen = BTreeSet::from([start]);
        let mut work = vec![start];
        while let Some(v) = work.pop() {
            let next: Vec<usize> = if reverse {
                set.iter().copied().filter(|&u| self.succ[u].contains(&v)).collect()
            } else {
                self.succ[v].iter().copied().filter(|u| set.contains(u)).collect()
            };
            for u in next {
                if seen.insert(u) {
                    work.push(u);
                }
            }
        }
        seen
    }

    /// True when no pair is both clean and progressing on `set`.
    pub fn uncovered(&self, set: &BTreeSet<usize>) -> bool {
        let nodes: Vec<usize> = set.iter().copied().collect();
        !self
            .pairs
            .iter()
            .any(|p| p.clean_on(&nodes) && p.progresses_on(&nodes))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    /// Each examined cyclic component with the index of a pair covering it.
    Good { certificate: Vec<(Vec<usize>, usize)> },
    Bad { witness: BTreeSet<usize> },
}

impl Verdict {
    pub fn is_good(&self) -> bool {
        matches!(self, Verdict::Good { .. })
    }
}

/// Recursive SCC decomposition: inside a cyclic component, the good nodes of
/// every clean and progressing pair cannot lie on an uncovered subgraph, so
/// they are removed and the rest is decomposed again.
pub fn all_scs_good(g: &ConditionGraph) -> Verdict {
    let n = g.num_nodes();
    let mut certificate = Vec::new();
    let mut work = vec![vec![true; n]];
    while let Some(alive) = work.pop() {
        for comp in graph::sccs_within(&g.succ, &alive) {
            if !graph::is_cyclic(&g.succ, &comp) {
                continue;
            }
            let covering: Vec<&ConditionPair> = g
                .pairs
                .iter()
                .filter(|p| p.clean_on(&comp) && p.progresses_on(&comp))
                .collect();
            let Some(first) = covering.first() else {
                return Verdict::Bad {
                    witness: comp.into_iter().collect(),
                };
            };
            certificate.push((comp.clone(), first.index));
            let mut rest = vec![false; n];
            let mut any = false;
            for &v in &comp {
                if !covering.iter().any(|p| p.good[v]) {
                    rest[v] = true;
                    any = true;
                }
            }
            if any {
                work.push(rest);
            }
        }
    }
    Verdict::Good { certificate }
}

/// Enumerates every node subset.
pub fn brute_scs_good(g: &ConditionGraph) -> Result<Verdict, EngineError> {
    let n = g.num_nodes();
    if n > 15 {
        return Err(EngineError::TooLarge(n));
    }
    for mask in 1u32..(1 << n) {
        let set: BTreeSet<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        if g.is_scs(&set) && g.uncovered(&set) {
            return Ok(Verdict::Bad { witness: set });
        }
    }
    Ok(Verdict::Good {
        certificate: Vec::new(),
    })
}
