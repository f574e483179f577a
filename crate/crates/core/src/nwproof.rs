//! Plain cyclic derivations for the modal μ-calculus: rules, trail
//! relations, the tracking automaton and the proof checker.

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::automata::{Acceptance, Lasso, StreamAutomaton};
use crate::cycleengine::{self, ConditionGraph, ConditionPair, Verdict};
use crate::derivation::{self, Branch, Derivation, DerivationError, Draft, Label};
use crate::determinize::{self, OmegaSource, ParityMacrostate, ParitySource};
use crate::graph;
use crate::mucalc::{closure, ClosureTable, FixKind, Formula, Sequent};
use crate::bitstring::{BitString, Colour};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum NwError {
    #[error("rule not applicable: {0}")]
    NotApplicable(String),
    #[error("not a rule instance: {0}")]
    NotARuleInstance(String),
    #[error("node {node}: {reason}")]
    Structural { node: usize, reason: String },
    #[error(transparent)]
    Derivation(#[from] DerivationError),
    #[error("branch is not a lasso through the derivation")]
    NotALasso,
    #[error("derivation exceeds {0} nodes")]
    TooLarge(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum NwRule {
    Ax1,
    Ax2,
    Or,
    And,
    Box,
    Mu,
    Nu,
}

impl NwRule {
    pub const ALL: [NwRule; 7] = [
        NwRule::Ax1,
        NwRule::Ax2,
        NwRule::Or,
        NwRule::And,
        NwRule::Box,
        NwRule::Mu,
        NwRule::Nu,
    ];

    pub fn name(self) -> &'static str {
        match self {
            NwRule::Ax1 => "ax1",
            NwRule::Ax2 => "ax2",
            NwRule::Or => "or",
            NwRule::And => "and",
            NwRule::Box => "box",
            NwRule::Mu => "mu",
            NwRule::Nu => "nu",
        }
    }

    pub fn is_axiom(self) -> bool {
        matches!(self, NwRule::Ax1 | NwRule::Ax2)
    }
}

impl fmt::Display for NwRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for NwRule {
    type Err = NwError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        NwRule::ALL
            .into_iter()
            .find(|r| r.name() == s)
            .ok_or_else(|| NwError::NotApplicable(format!("unknown rule {s}")))
    }
}

pub type NwDerivation = Derivation<Sequent, NwRule, Formula>;

pub fn fmt_sequent(s: &Sequent) -> String {
    let parts: Vec<String> = s.iter().map(|f| f.to_string()).collect();
    parts.join(", ")
}

fn has_complementary(s: &Sequent) -> bool {
    s.iter()
        .any(|f| matches!(f, Formula::Prop(p) if s.contains(&Formula::NegProp(p.clone()))))
}

/// An axiom closing the sequent, preferring `Ax2`.
pub fn axiom_for(s: &Sequent) -> Option<NwRule> {
    if s.contains(&Formula::Top) {
        Some(NwRule::Ax2)
    } else if has_complementary(s) {
        Some(NwRule::Ax1)
    } else {
        None
    }
}

fn without(s: &Sequent, f: &Formula) -> Sequent {
    let mut out = s.clone();
    out.remove(f);
    out
}

fn with(mut s: Sequent, items: impl IntoIterator<Item = Formula>) -> Sequent {
    s.extend(items);
    s
}

/// The diamond bodies `Λ` of a sequent `□φ, ◇Λ, Δ`.
pub fn diamond_bodies(s: &Sequent) -> impl Iterator<Item = &Formula> + '_ {
    s.iter().filter_map(|f| match f {
        Formula::Diamond(a) => Some(&**a),
        _ => None,
    })
}

/// The premises of a rule instance, in order.
pub fn apply_nw_rule(
    rule: NwRule,
    principal: Option<&Formula>,
    s: &Sequent,
) -> Result<Vec<Sequent>, NwError> {
    let na = |why: &str| Err(NwError::NotApplicable(format!("{rule}: {why}")));
    if rule.is_axiom() {
        let closes = match rule {
            NwRule::Ax1 => has_complementary(s),
            _ => s.contains(&Formula::Top),
        };
        if closes {
            return Ok(Vec::new());
        }
        return na("no matching literals");
    }
    let Some(xi) = principal else {
        return na("a principal formula is required");
    };
    if !s.contains(xi) {
        return na("principal formula is not in the sequent");
    }
    let rest = without(s, xi);
    match (rule, xi) {
        (NwRule::Or, Formula::Or(a, b)) => Ok(vec![with(rest, [(**a).clone(), (**b).clone()])]),
        (NwRule::And, Formula::And(a, b)) => Ok(vec![
            with(rest.clone(), [(**a).clone()]),
            with(rest, [(**b).clone()]),
        ]),
        (NwRule::Box, Formula::Box(a)) => {
            let bodies: Vec<Formula> = diamond_bodies(s).cloned().collect();
            Ok(vec![with(Sequent::new(), core::iter::once((**a).clone()).chain(bodies))])
        }
        (NwRule::Mu, Formula::Fix(FixKind::Mu, ..)) | (NwRule::Nu, Formula::Fix(FixKind::Nu, ..)) => {
            Ok(vec![with(rest, [xi.unfold().unwrap()])])
        }
        _ => na("principal formula has the wrong shape"),
    }
}

/// A letter of the tracking automaton: conclusion, principal formula and
/// premise of one edge of a derivation.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RuleLetter {
    pub conclusion: Sequent,
    pub principal: Option<Formula>,
    pub premise: Sequent,
}

impl fmt::Display for RuleLetter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = self.principal.as_ref().map_or("-".to_string(), |p| p.to_string());
        write!(
            f,
            "({} | {} | {})",
            fmt_sequent(&self.conclusion),
            p,
            fmt_sequent(&self.premise)
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TrailStep {
    pub active: BTreeSet<(Formula, Formula)>,
    pub passive: BTreeSet<(Formula, Formula)>,
}

impl TrailStep {
    pub fn pairs(&self) -> impl Iterator<Item = &(Formula, Formula)> + '_ {
        self.active.iter().chain(&self.passive)
    }

    pub fn successors_of<'a>(&'a self, f: &'a Formula) -> impl Iterator<Item = &'a Formula> + 'a {
        self.pairs().filter(move |(a, _)| a == f).map(|(_, b)| b)
    }
}

fn identity(s: &Sequent) -> TrailStep {
    TrailStep {
        active: BTreeSet::new(),
        passive: s.iter().map(|f| (f.clone(), f.clone())).collect(),
    }
}

/// Active and passive trail pairs of a rule instance. Without a principal
/// formula the conclusion must equal the premise and the trail is the identity.
pub fn trail_relation(
    conclusion: &Sequent,
    principal: Option<&Formula>,
    premise: &Sequent,
) -> Result<TrailStep, NwError> {
    let bad = || {
        Err(NwError::NotARuleInstance(format!(
            "{} / {} / {}",
            fmt_sequent(conclusion),
            principal.map_or("-".to_string(), |p| p.to_string()),
            fmt_sequent(premise)
        )))
    };
    let Some(xi) = principal else {
        return if conclusion == premise {
            Ok(identity(conclusion))
        } else {
            bad()
        };
    };
    if !conclusion.contains(xi) {
        return bad();
    }
    let rest = without(conclusion, xi);
    let side = |rest: &Sequent| -> BTreeSet<(Formula, Formula)> {
        rest.iter().map(|f| (f.clone(), f.clone())).collect()
    };
    match xi {
        Formula::Box(a) => {
            let expected = with(
                Sequent::new(),
                core::iter::once((**a).clone()).chain(diamond_bodies(conclusion).cloned()),
            );
            if *premise != expected {
                return bad();
            }
            let mut active: BTreeSet<_> = [(xi.clone(), (**a).clone())].into_iter().collect();
            for f in conclusion {
                if let Formula::Diamond(b) = f {
                    active.insert((f.clone(), (**b).clone()));
                }
            }
            Ok(TrailStep {
                active,
                passive: BTreeSet::new(),
            })
        }
        Formula::Or(a, b) => {
            if *premise != with(rest.clone(), [(**a).clone(), (**b).clone()]) {
                return bad();
            }
            Ok(TrailStep {
                active: [(xi.clone(), (**a).clone()), (xi.clone(), (**b).clone())]
                    .into_iter()
                    .collect(),
                passive: side(&rest),
            })
        }
        Formula::And(a, b) => {
            let mut active = BTreeSet::new();
            for c in [a, b] {
                if *premise == with(rest.clone(), [(**c).clone()]) {
                    active.insert((xi.clone(), (**c).clone()));
                }
            }
            if active.is_empty() {
                return bad();
            }
            Ok(TrailStep {
                active,
                passive: side(&rest),
            })
        }
        Formula::Fix(..) => {
            let u = xi.unfold().unwrap();
            if *premise != with(rest.clone(), [u.clone()]) {
                return bad();
            }
            Ok(TrailStep {
                active: [(xi.clone(), u)].into_iter().collect(),
                passive: side(&rest),
            })
        }
        _ => bad(),
    }
}

pub fn letter_trail(letter: &RuleLetter) -> Result<TrailStep, NwError> {
    trail_relation(&letter.conclusion, letter.principal.as_ref(), &letter.premise)
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TrackState {
    Init,
    Formula(Formula),
    /// A fixpoint that was just unfolded; its trail continues from the unfolding.
    Starred(Formula),
}

impl fmt::Display for TrackState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TrackState::Init => f.write_str("init"),
            TrackState::Formula(p) => write!(f, "{p}"),
            TrackState::Starred(p) => write!(f, "({p})*"),
        }
    }
}

/// Nondeterministic parity automaton over [`RuleLetter`]s accepting the
/// branches that carry a ν-trail. Transitions are computed on demand.
#[derive(Debug, Clone)]
pub struct TrackingAutomaton {
    pub phi: Sequent,
    pub table: ClosureTable,
    other: u32,
}

pub fn tracking_automaton(phi: &Sequent) -> TrackingAutomaton {
    let table = closure(phi);
    let other = table.max_even.map_or(1, |m| m + 1);
    TrackingAutomaton {
        phi: phi.clone(),
        table,
        other,
    }
}

impl TrackingAutomaton {
    /// Every state: the initial one, the closure, and a starred copy of each
    /// fixpoint.
    pub fn states(&self) -> Vec<TrackState> {
        let mut out = vec![TrackState::Init];
        out.extend(self.table.members.iter().cloned().map(TrackState::Formula));
        out.extend(self.table.fix.iter().cloned().map(TrackState::Starred));
        out
    }

    /// An explicit automaton over the given letters, restricted to states
    /// reachable from the initial state. Letter `i` is `letters[i]`.
    pub fn materialize(&self, letters: &[RuleLetter]) -> StreamAutomaton {
        let mut ids: BTreeMap<TrackState, usize> = BTreeMap::new();
        let mut states = vec![TrackState::Init];
        ids.insert(TrackState::Init, 0);
        let mut edges = Vec::new();
        let mut i = 0;
        while i < states.len() {
            for (y, letter) in letters.iter().enumerate() {
                for q in self.successors(&states[i], letter) {
                    let j = *ids.entry(q.clone()).or_insert_with(|| {
                        states.push(q);
                        states.len() - 1
                    });
                    edges.push((i, y, j));
                }
            }
            i += 1;
        }
        let priorities = states.iter().map(|q| self.priority(q)).collect();
        StreamAutomaton::new(
            states.iter().map(|q| q.to_string()).collect(),
            (0..letters.len()).map(|i| format!("l{i}")).collect(),
            0,
            edges,
            Acceptance::Parity(priorities),
            false,
        )
        .expect("states are interned")
    }
}

impl OmegaSource for TrackingAutomaton {
    type State = TrackState;
    type Letter = RuleLetter;

    fn initial(&self) -> TrackState {
        TrackState::Init
    }

    fn successors(&self, q: &TrackState, y: &RuleLetter) -> Vec<TrackState> {
        let along = |f: &Formula| -> Vec<TrackState> {
            match letter_trail(y) {
                Ok(step) => step
                    .successors_of(f)
                    .cloned()
                    .collect::<BTreeSet<_>>()
                    .into_iter()
                    .map(TrackState::Formula)
                    .collect(),
                Err(_) => Vec::new(),
            }
        };
        match q {
            TrackState::Init => self.phi.iter().cloned().map(TrackState::Formula).collect(),
            TrackState::Formula(f) if f.is_fixpoint() && y.principal.as_ref() == Some(f) => {
                vec![TrackState::Starred(f.clone())]
            }
            TrackState::Starred(f) => along(&f.unfold().unwrap()),
            TrackState::Formula(f) => along(f),
        }
    }
}

impl ParitySource for TrackingAutomaton {
    fn priority(&self, q: &TrackState) -> u32 {
        match q {
            TrackState::Starred(f) => self.table.omega_of(f).unwrap_or(self.other),
            _ => self.other,
        }
    }

    fn max_even(&self) -> Option<u32> {
        self.table.max_even
    }
}

fn edge_letter(pi: &NwDerivation, v: usize, w: usize) -> RuleLetter {
    let node = pi.node(v);
    let principal = match node.label {
        Label::Rule(_) => node.principal.clone(),
        _ => None,
    };
    RuleLetter {
        conclusion: node.sequent.clone(),
        principal,
        premise: pi.node(w).sequent.clone(),
    }
}

/// The word of a branch: the duplicated root letter, then one letter per edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LetterLasso {
    pub stem: Vec<RuleLetter>,
    pub cycle: Vec<RuleLetter>,
}

impl LetterLasso {
    /// Interns the letters and returns them with the index lasso.
    pub fn indexed(&self) -> (Vec<RuleLetter>, Lasso) {
        let mut alphabet: Vec<RuleLetter> = Vec::new();
        let mut id = |l: &RuleLetter| match alphabet.iter().position(|x| x == l) {
            Some(i) => i,
            None => {
                alphabet.push(l.clone());
                alphabet.len() - 1
            }
        };
        let stem = self.stem.iter().map(&mut id).collect();
        let cycle = self.cycle.iter().map(&mut id).collect();
        (alphabet, Lasso { stem, cycle })
    }
}

pub fn branch_word(pi: &NwDerivation, branch: &Branch) -> Result<LetterLasso, NwError> {
    if !branch.is_valid(pi) {
        return Err(NwError::NotALasso);
    }
    let first = branch.node(0);
    let mut stem = vec![edge_letter(pi, first, first)];
    for p in 0..branch.stem.len() {
        stem.push(edge_letter(pi, branch.node(p), branch.node(p + 1)));
    }
    let cycle = (0..branch.cycle.len())
        .map(|i| {
            let p = branch.stem.len() + i;
            edge_letter(pi, branch.node(p), branch.node(branch.next_position(p)))
        })
        .collect();
    Ok(LetterLasso { stem, cycle })
}

/// From, to, and the priority and kind of a fixpoint unfolded on the step.
type TrailEdge = (usize, usize, Option<(u32, FixKind)>);

/// Does some trail on the branch unfold a ν-formula as its most important
/// fixpoint infinitely often? Decided on the product of branch positions and
/// formulas.
pub fn nu_trail_oracle(pi: &NwDerivation, branch: &Branch) -> Result<bool, NwError> {
    if !branch.is_valid(pi) {
        return Err(NwError::NotALasso);
    }
    let table = closure(&pi.node(0).sequent);
    let positions = branch.positions();
    let mut ids: BTreeMap<(usize, Formula), usize> = BTreeMap::new();
    for p in 0..positions {
        for f in &pi.node(branch.node(p)).sequent {
            let n = ids.len();
            ids.insert((p, f.clone()), n);
        }
    }
    let mut edges: Vec<TrailEdge> = Vec::new();
    for p in 0..positions {
        let q = branch.next_position(p);
        let letter = edge_letter(pi, branch.node(p), branch.node(q));
        let step = letter_trail(&letter).map_err(|e| NwError::Structural {
            node: branch.node(p),
            reason: e.to_string(),
        })?;
        for (a, b) in &step.active {
            let tag = a
                .fix_kind()
                .map(|k| (table.omega_of(a).unwrap_or(u32::MAX), k));
            edges.push((ids[&(p, a.clone())], ids[&(q, b.clone())], tag));
        }
        for (a, b) in &step.passive {
            edges.push((ids[&(p, a.clone())], ids[&(q, b.clone())], None));
        }
    }
    let n = ids.len();
    let mut full = vec![Vec::new(); n];
    for &(a, b, _) in &edges {
        full[a].push(b);
    }
    let mut reach = vec![false; n];
    for f in &pi.node(branch.node(0)).sequent {
        for (v, r) in graph::reachable(&full, ids[&(0, f.clone())]).into_iter().enumerate() {
            reach[v] |= r;
        }
    }
    let nu_levels: BTreeSet<u32> = edges
        .iter()
        .filter_map(|e| match e.2 {
            Some((d, FixKind::Nu)) => Some(d),
            _ => None,
        })
        .collect();
    for d in nu_levels {
        let mut adj = vec![Vec::new(); n];
        for &(a, b, tag) in &edges {
            if tag.is_none_or(|(o, _)| o >= d) {
                adj[a].push(b);
            }
        }
        let mut comp = vec![usize::MAX; n];
        for (c, scc) in graph::sccs_within(&adj, &reach).into_iter().enumerate() {
            for v in scc {
                comp[v] = c;
            }
        }
        let hit = edges.iter().any(|&(a, b, tag)| {
            tag == Some((d, FixKind::Nu)) && reach[a] && comp[a] != usize::MAX && comp[a] == comp[b]
        });
        if hit {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Checks every rule node against the rules; discharge structure is checked
/// when the derivation is built.
pub fn validate_nw(pi: &NwDerivation) -> Result<(), NwError> {
    for (v, node) in pi.nodes().iter().enumerate() {
        if let Label::Rule(r) = node.label {
            let premises = apply_nw_rule(r, node.principal.as_ref(), &node.sequent).map_err(|e| {
                NwError::Structural {
                    node: v,
                    reason: e.to_string(),
                }
            })?;
            let children: Vec<&Sequent> = node.children.iter().map(|&c| &pi.node(c).sequent).collect();
            if premises.iter().collect::<Vec<_>>() != children {
                return Err(NwError::Structural {
                    node: v,
                    reason: format!("premises of {r} do not match the children"),
                });
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NwReport {
    pub proof: bool,
    /// Derivation nodes of an uncovered strongly connected subgraph.
    pub witness: Option<BTreeSet<usize>>,
    pub product_size: usize,
}

/// Runs the determinized tracking automaton along the tree with back edges and
/// checks the Rabin condition on every strongly connected subgraph of the
/// product.
pub fn check_nw(pi: &NwDerivation) -> Result<NwReport, NwError> {
    validate_nw(pi)?;
    let aut = tracking_automaton(&pi.node(0).sequent);
    let succ = pi.cyclic_successors();
    let top = aut.max_even();
    let init = ParityMacrostate::initial(TrackState::Init, top);
    let start = determinize::parity_step(&aut, &init, &edge_letter(pi, 0, 0), &mut determinize::first_witness);

    type Key = (usize, ParityMacrostate<TrackState>);
    let mut ids: BTreeMap<Key, usize> = BTreeMap::new();
    let mut nodes: Vec<Key> = vec![(0, start.clone())];
    ids.insert((0, start), 0);
    let mut adj: Vec<Vec<usize>> = vec![Vec::new()];
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        let (v, m) = nodes[i].clone();
        for &w in &succ[v] {
            let next = determinize::parity_step(&aut, &m, &edge_letter(pi, v, w), &mut determinize::first_witness);
            let key = (w, next);
            let j = match ids.get(&key) {
                Some(&j) => j,
                None => {
                    let j = nodes.len();
                    ids.insert(key.clone(), j);
                    nodes.push(key);
                    adj.push(Vec::new());
                    queue.push_back(j);
                    j
                }
            };
            adj[i].push(j);
        }
    }

    let g = rabin_condition_graph(adj, nodes.iter().map(|(_, m)| m));
    let product_size = nodes.len();
    Ok(match cycleengine::all_scs_good(&g) {
        Verdict::Good { .. } => NwReport {
            proof: true,
            witness: None,
            product_size,
        },
        Verdict::Bad { witness } => NwReport {
            proof: false,
            witness: Some(witness.into_iter().map(|i| nodes[i].0).collect()),
            product_size,
        },
    })
}

/// One pair per `(k, s)` in play somewhere: in play while `s` is in the tree
/// at position `k`, good when green, bad when red.
fn rabin_condition_graph<'a, Q: Ord + Clone + 'a>(
    succ: Vec<Vec<usize>>,
    states: impl Iterator<Item = &'a ParityMacrostate<Q>> + Clone,
) -> ConditionGraph {
    let labels: BTreeSet<(usize, BitString)> = states
        .clone()
        .flat_map(|m| {
            m.colours
                .iter()
                .enumerate()
                .flat_map(|(i, c)| c.keys().map(move |s| (i, s.clone())))
        })
        .collect();
    let pairs = labels
        .into_iter()
        .enumerate()
        .map(|(index, (i, s))| {
            let colours: Vec<Option<Colour>> = states.clone().map(|m| m.colours[i].get(&s).copied()).collect();
            ConditionPair {
                index,
                inplay: colours.iter().map(Option::is_some).collect(),
                good: colours.iter().map(|c| *c == Some(Colour::Green)).collect(),
                bad: colours.iter().map(|c| *c == Some(Colour::Red)).collect(),
            }
        })
        .collect();
    ConditionGraph { succ, pairs }
}

/// Applies the ν-trail oracle to every lasso branch with a loop of length at
/// most `max_len`.
pub fn brute_check_nw(pi: &NwDerivation, max_len: usize, limit: usize) -> Result<bool, NwError> {
    validate_nw(pi)?;
    for b in pi.lasso_branches(max_len, limit) {
        if !nu_trail_oracle(pi, &b)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Rule choice for [`build_derivation`]: the rule and principal formula to
/// apply to a sequent, or `None` if the sequent is stuck.
pub type RuleChooser<'a> = dyn FnMut(&Sequent) -> Option<(NwRule, Option<Formula>)> + 'a;

/// Axioms first, then the least non-modal compound formula, then the
/// `box_index`-th box (cyclically).
pub fn canonical_choice(s: &Sequent, box_index: usize) -> Option<(NwRule, Option<Formula>)> {
    if let Some(ax) = axiom_for(s) {
        return Some((ax, None));
    }
    for f in s {
        let rule = match f {
            Formula::Or(..) => NwRule::Or,
            Formula::And(..) => NwRule::And,
            Formula::Fix(FixKind::Mu, ..) => NwRule::Mu,
            Formula::Fix(FixKind::Nu, ..) => NwRule::Nu,
            _ => continue,
        };
        return Some((rule, Some(f.clone())));
    }
    let boxes: Vec<&Formula> = s.iter().filter(|f| matches!(f, Formula::Box(_))).collect();
    if boxes.is_empty() {
        return None;
    }
    Some((NwRule::Box, Some(boxes[box_index % boxes.len()].clone())))
}

/// Unfolds a derivation from `root` by the chooser, closing a branch with a
/// back edge at the nearest ancestor with the same sequent.
pub fn build_derivation(
    root: &Sequent,
    choose: &mut RuleChooser<'_>,
    max_nodes: usize,
) -> Result<NwDerivation, NwError> {
    let mut drafts: Vec<Draft<Sequent, NwRule, Formula>> = Vec::new();
    fn grow(
        drafts: &mut Vec<Draft<Sequent, NwRule, Formula>>,
        path: &mut Vec<usize>,
        s: Sequent,
        choose: &mut RuleChooser<'_>,
        max_nodes: usize,
    ) -> Result<usize, NwError> {
        if drafts.len() >= max_nodes {
            return Err(NwError::TooLarge(max_nodes));
        }
        let id = drafts.len();
        let back = path.iter().rev().copied().find(|&a| drafts[a].sequent == s);
        drafts.push(Draft {
            sequent: s.clone(),
            rule: None,
            principal: None,
            children: Vec::new(),
            back,
        });
        if back.is_some() {
            return Ok(id);
        }
        let Some((rule, principal)) = choose(&s) else {
            return Err(NwError::NotApplicable(format!("no rule applies to {}", fmt_sequent(&s))));
        };
        let premises = apply_nw_rule(rule, principal.as_ref(), &s)?;
        drafts[id].rule = Some(rule);
        drafts[id].principal = principal;
        path.push(id);
        for p in premises {
            let c = grow(drafts, path, p, choose, max_nodes)?;
            drafts[id].children.push(c);
        }
        path.pop();
        Ok(id)
    }
    grow(&mut drafts, &mut Vec::new(), root.clone(), choose, max_nodes)?;
    Ok(derivation::materialize(&drafts, 0)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::accepts_lasso;
    use crate::mucalc::parse_formula;

    fn f(s: &str) -> Formula {
        parse_formula(s).unwrap()
    }

    fn seq(items: &[&str]) -> Sequent {
        items.iter().map(|s| f(s)).collect()
    }

    fn build(items: &[&str]) -> NwDerivation {
        build_derivation(&seq(items), &mut |s| canonical_choice(s, 0), 200).unwrap()
    }

    #[test]
    fn rule_examples() {
        assert_eq!(
            apply_nw_rule(NwRule::Nu, Some(&f("nu x. [] x")), &seq(&["nu x. [] x"])).unwrap(),
            vec![seq(&["[] nu x. [] x"])]
        );
        assert_eq!(apply_nw_rule(NwRule::Ax1, None, &seq(&["p", "~p", "q"])).unwrap(), vec![]);
        assert_eq!(
            apply_nw_rule(NwRule::Box, Some(&f("[] a")), &seq(&["[] a", "<> b", "q"])).unwrap(),
            vec![seq(&["a", "b"])]
        );
        assert!(apply_nw_rule(NwRule::Ax1, None, &seq(&["p", "q"])).is_err());
        assert!(apply_nw_rule(NwRule::Box, Some(&f("<> a")), &seq(&["<> a"])).is_err());
    }

    #[test]
    fn trail_examples() {
        let t = trail_relation(&seq(&["[] a", "<> b"]), Some(&f("[] a")), &seq(&["a", "b"])).unwrap();
        assert_eq!(
            t.active,
            [(f("[] a"), f("a")), (f("<> b"), f("b"))].into_iter().collect()
        );
        assert!(t.passive.is_empty());
        let t = trail_relation(&seq(&["a | b", "c"]), Some(&f("a | b")), &seq(&["a", "b", "c"])).unwrap();
        assert_eq!(t.active, [(f("a | b"), f("a")), (f("a | b"), f("b"))].into_iter().collect());
        assert_eq!(t.passive, [(f("c"), f("c"))].into_iter().collect());
        let nu = f("nu x. [] x");
        let t = trail_relation(&seq(&["nu x. [] x"]), Some(&nu), &seq(&["[] nu x. [] x"])).unwrap();
        assert_eq!(t.active, [(nu.clone(), nu.unfold().unwrap())].into_iter().collect());
        assert!(t.passive.is_empty());
        assert!(trail_relation(&seq(&["a"]), None, &seq(&["b"])).is_err());
    }

    #[test]
    fn tracking_examples() {
        let nu = f("nu x. [] x");
        let a = tracking_automaton(&seq(&["nu x. [] x"]));
        assert_eq!(a.states().len(), 4);
        assert_eq!(a.priority(&TrackState::Starred(nu.clone())), 0);
        assert_eq!(a.priority(&TrackState::Formula(nu.clone())), 1);
        assert_eq!(a.priority(&TrackState::Init), 1);
        let unfold = RuleLetter {
            conclusion: seq(&["nu x. [] x"]),
            principal: Some(nu.clone()),
            premise: seq(&["[] nu x. [] x"]),
        };
        assert_eq!(
            a.successors(&TrackState::Formula(nu.clone()), &unfold),
            vec![TrackState::Starred(nu.clone())]
        );
        let boxed = RuleLetter {
            conclusion: seq(&["[] nu x. [] x"]),
            principal: Some(f("[] nu x. [] x")),
            premise: seq(&["nu x. [] x"]),
        };
        assert_eq!(
            a.successors(&TrackState::Starred(nu.clone()), &boxed),
            vec![TrackState::Formula(nu)]
        );
        let mu = tracking_automaton(&seq(&["mu x. <> x"]));
        assert_eq!(mu.priority(&TrackState::Init), 1);
    }

    #[test]
    fn nu_box_proof() {
        let pi = build(&["nu x. [] x"]);
        assert_eq!(pi.len(), 4);
        let r = check_nw(&pi).unwrap();
        assert!(r.proof);
        let branches = pi.lasso_branches(8, 100);
        assert!(!branches.is_empty());
        for b in &branches {
            assert!(nu_trail_oracle(&pi, b).unwrap());
            let word = branch_word(&pi, b).unwrap();
            assert_eq!(word.stem[0].conclusion, word.stem[0].premise);
            let (letters, lasso) = word.indexed();
            let aut = tracking_automaton(&pi.node(0).sequent).materialize(&letters);
            assert!(accepts_lasso(&aut, &lasso).unwrap());
        }
    }

    #[test]
    fn mu_box_not_a_proof() {
        let pi = build(&["mu x. [] x"]);
        let r = check_nw(&pi).unwrap();
        assert!(!r.proof);
        assert!(!r.witness.unwrap().is_empty());
        for b in pi.lasso_branches(8, 100) {
            assert!(!nu_trail_oracle(&pi, &b).unwrap());
        }
        let pi = build(&["mu x. <> x | [] x"]);
        assert!(!check_nw(&pi).unwrap().proof);
    }

    #[test]
    fn finite_proof() {
        let pi = build(&["p | ~p"]);
        assert_eq!(pi.len(), 2);
        assert!(check_nw(&pi).unwrap().proof);
        assert!(pi.lasso_branches(8, 100).is_empty());
    }

    #[test]
    fn rejects_mismatched_premises() {
        let pi = build(&["nu x. [] x"]);
        let mut nodes = pi.nodes().to_vec();
        nodes[1].principal = Some(f("nu y. [] y"));
        let bad = NwDerivation::new(nodes).unwrap();
        assert!(matches!(check_nw(&bad), Err(NwError::Structural { node: 1, .. })));
    }

    #[test]
    fn stem_before_cycle() {
        let pi = build(&["p & q | nu x. [] x"]);
        assert!(check_nw(&pi).unwrap().proof == brute_check_nw(&pi, 12, 1000).unwrap());
        let b = Branch { stem: vec![], cycle: vec![1] };
        assert_eq!(branch_word(&pi, &b), Err(NwError::NotALasso));
    }
}
