//! Annotated cyclic derivations: rules with their priority discipline, the
//! proof checker, translation from plain proofs and a bounded prover.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::bitstring::{self, min_leaf_of, patched_closure, BitString, TSeq};
use crate::cycleengine::{self, ConditionGraph, ConditionPair, EngineError, Verdict};
use crate::derivation::{self, Derivation, DerivationError, Draft, Label, Node};
use crate::mucalc::{closure, ClosureTable, FixKind, Formula, Sequent};
use crate::nwproof::{self, axiom_for, NwDerivation, NwError, NwRule};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BtError {
    #[error("rule not applicable: {0}")]
    NotApplicable(String),
    #[error("node {node}: {reason}")]
    Structural { node: usize, reason: String },
    #[error(transparent)]
    Derivation(#[from] DerivationError),
    #[error(transparent)]
    Nw(#[from] NwError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error("translation exceeded the depth budget of {0}")]
    BudgetExceeded(usize),
    #[error("translated derivation is rejected by the checker")]
    NotAProof,
    #[error("bad rule name {0}")]
    BadRule(String),
}

pub type Annotated = (Formula, TSeq);
pub type AnnotatedSequent = BTreeSet<Annotated>;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BtRule {
    Ax1,
    Ax2,
    Or,
    And,
    Box,
    Mu,
    Nu,
    Resolve,
    Compress { k: u32, pattern: BitString },
}

impl BtRule {
    pub fn from_nw(r: NwRule) -> Self {
        match r {
            NwRule::Ax1 => BtRule::Ax1,
            NwRule::Ax2 => BtRule::Ax2,
            NwRule::Or => BtRule::Or,
            NwRule::And => BtRule::And,
            NwRule::Box => BtRule::Box,
            NwRule::Mu => BtRule::Mu,
            NwRule::Nu => BtRule::Nu,
        }
    }

    pub fn to_nw(&self) -> Option<NwRule> {
        Some(match self {
            BtRule::Ax1 => NwRule::Ax1,
            BtRule::Ax2 => NwRule::Ax2,
            BtRule::Or => NwRule::Or,
            BtRule::And => NwRule::And,
            BtRule::Box => NwRule::Box,
            BtRule::Mu => NwRule::Mu,
            BtRule::Nu => NwRule::Nu,
            BtRule::Resolve | BtRule::Compress { .. } => return None,
        })
    }

    pub fn is_axiom(&self) -> bool {
        matches!(self, BtRule::Ax1 | BtRule::Ax2)
    }

    /// Compress at a pattern ending in 1.
    pub fn is_progress(&self) -> bool {
        matches!(self, BtRule::Compress { pattern, .. } if pattern.last() == Some(true))
    }
}

impl fmt::Display for BtRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BtRule::Resolve => f.write_str("resolve"),
            BtRule::Compress { k, pattern } => write!(f, "compress({k},{})", pattern.to_bits()),
            r => f.write_str(r.to_nw().unwrap().name()),
        }
    }
}

impl FromStr for BtRule {
    type Err = BtError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || BtError::BadRule(s.to_string());
        if s == "resolve" {
            return Ok(BtRule::Resolve);
        }
        if let Some(args) = s.strip_prefix("compress(").and_then(|r| r.strip_suffix(')')) {
            let (k, p) = args.split_once(',').ok_or_else(bad)?;
            let k = k.trim().parse().map_err(|_| bad())?;
            let pattern: BitString = p.trim().parse().map_err(|_| bad())?;
            return Ok(BtRule::Compress { k, pattern });
        }
        s.parse::<NwRule>().map(BtRule::from_nw).map_err(|_| bad())
    }
}

pub type BtDerivation = Derivation<AnnotatedSequent, BtRule, Annotated>;

pub fn annotate(s: &Sequent, m: Option<u32>) -> AnnotatedSequent {
    s.iter().map(|f| (f.clone(), TSeq::epsilons(m))).collect()
}

pub fn erase_sequent(g: &AnnotatedSequent) -> Sequent {
    g.iter().map(|(f, _)| f.clone()).collect()
}

/// `Γ_k^N`
pub fn strings_at(g: &AnnotatedSequent, k: u32) -> BTreeSet<BitString> {
    g.iter().map(|(_, s)| s.at(k).clone()).collect()
}

/// Does `s` occur in `Γ_k^N`, i.e. is it a prefix of some string there?
pub fn occurs(g: &AnnotatedSequent, k: u32, s: &BitString) -> bool {
    g.iter().any(|(_, t)| s.is_prefix_of(t.at(k)))
}

pub fn fmt_annotated(g: &AnnotatedSequent) -> String {
    let parts: Vec<String> = g.iter().map(|(f, s)| format!("{f}^{s}")).collect();
    parts.join(", ")
}

/// `σ↾k`: every component at a position above `k` becomes the least leaf of
/// the tree of `Γ` at that position, or `ε` if that tree is empty.
pub fn restrict(sigma: &TSeq, k: u32, g: &AnnotatedSequent) -> TSeq {
    let mut out = sigma.clone();
    for i in 0..sigma.width() {
        let j = 2 * i as u32;
        if j > k {
            let strings = strings_at(g, j);
            *out.at_mut(j) = min_leaf_of(&patched_closure(&strings)).unwrap_or_default();
        }
    }
    out
}

/// The closure of the root sequent with its priorities.
#[derive(Debug, Clone)]
pub struct BtContext {
    pub table: ClosureTable,
    pub m: Option<u32>,
}

impl BtContext {
    pub fn new(root: &Sequent) -> Self {
        let table = closure(root);
        let m = table.max_even;
        BtContext { table, m }
    }

    pub fn positions(&self) -> impl Iterator<Item = u32> + Clone {
        bitstring::positions(self.m)
    }
}

fn na<T>(rule: &BtRule, why: &str) -> Result<T, BtError> {
    Err(BtError::NotApplicable(format!("{rule}: {why}")))
}

pub fn compress_applicable(g: &AnnotatedSequent, k: u32, pattern: &BitString) -> bool {
    let (Some(s), Some(b)) = (pattern.parent(), pattern.last()) else {
        return false;
    };
    if b && s.is_all_zeros() {
        return false;
    }
    let mut any = false;
    for (_, t) in g {
        if s.is_prefix_of(t.at(k)) {
            if !pattern.is_prefix_of(t.at(k)) {
                return false;
            }
            any = true;
        }
    }
    any
}

/// The premises of a rule instance. The priority discipline is checked by
/// [`priority_violation`], not here.
pub fn apply_bt_rule(
    ctx: &BtContext,
    rule: &BtRule,
    principal: Option<&Annotated>,
    g: &AnnotatedSequent,
) -> Result<Vec<AnnotatedSequent>, BtError> {
    match rule {
        BtRule::Ax1 | BtRule::Ax2 => {
            let closes = match rule {
                BtRule::Ax1 => {
                    let e = erase_sequent(g);
                    e.iter()
                        .any(|f| matches!(f, Formula::Prop(p) if e.contains(&Formula::NegProp(p.clone()))))
                }
                _ => g.iter().any(|(f, _)| *f == Formula::Top),
            };
            if closes {
                Ok(Vec::new())
            } else {
                na(rule, "no matching formulas")
            }
        }
        BtRule::Compress { k, pattern } => {
            if (*k / 2) as usize >= bitstring::width(ctx.m) || k % 2 == 1 {
                return na(rule, "no such position");
            }
            if pattern.is_empty() {
                return na(rule, "empty pattern");
            }
            if !compress_applicable(g, *k, pattern) {
                return na(rule, "side condition fails");
            }
            let s = pattern.parent().unwrap();
            let out = g
                .iter()
                .map(|(f, sigma)| {
                    let mut tau = sigma.clone();
                    if pattern.is_prefix_of(sigma.at(*k)) {
                        *tau.at_mut(*k) = sigma.at(*k).substitute(pattern, &s).unwrap();
                    }
                    (f.clone(), tau)
                })
                .collect();
            Ok(vec![out])
        }
        _ => {
            let Some(el) = principal else {
                return na(rule, "a principal formula is required");
            };
            if !g.contains(el) {
                return na(rule, "principal formula is not in the sequent");
            }
            let (xi, sigma) = el;
            let mut rest = g.clone();
            rest.remove(el);
            match (rule, xi) {
                (BtRule::Resolve, _) => {
                    if g.iter().any(|(f, tau)| f == xi && tau > sigma) {
                        Ok(vec![rest])
                    } else {
                        na(rule, "no greater annotation of the same formula")
                    }
                }
                (BtRule::Or, Formula::Or(a, b)) => {
                    rest.insert(((**a).clone(), sigma.clone()));
                    rest.insert(((**b).clone(), sigma.clone()));
                    Ok(vec![rest])
                }
                (BtRule::And, Formula::And(a, b)) => {
                    let mut left = rest.clone();
                    left.insert(((**a).clone(), sigma.clone()));
                    rest.insert(((**b).clone(), sigma.clone()));
                    Ok(vec![left, rest])
                }
                (BtRule::Box, Formula::Box(a)) => {
                    let mut out: AnnotatedSequent = g
                        .iter()
                        .filter_map(|(f, tau)| match f {
                            Formula::Diamond(b) => Some(((**b).clone(), tau.clone())),
                            _ => None,
                        })
                        .collect();
                    out.insert(((**a).clone(), sigma.clone()));
                    Ok(vec![out])
                }
                (BtRule::Mu, Formula::Fix(FixKind::Mu, ..)) => {
                    let Some(o) = ctx.table.omega_of(xi) else {
                        return na(rule, "fixpoint outside the closure");
                    };
                    rest.insert((xi.unfold().unwrap(), restrict(sigma, o, g)));
                    Ok(vec![rest])
                }
                (BtRule::Nu, Formula::Fix(FixKind::Nu, ..)) => {
                    let Some(k) = ctx.table.omega_of(xi) else {
                        return na(rule, "fixpoint outside the closure");
                    };
                    let mut tau = restrict(sigma, k, g);
                    tau.at_mut(k).push(true);
                    let mut out: AnnotatedSequent = rest
                        .into_iter()
                        .map(|(f, mut s)| {
                            s.at_mut(k).push(false);
                            (f, s)
                        })
                        .collect();
                    out.insert((xi.unfold().unwrap(), tau));
                    Ok(vec![out])
                }
                _ => na(rule, "principal formula has the wrong shape"),
            }
        }
    }
}

/// The lesser annotation of the least formula carrying two of them.
pub fn resolve_candidate(g: &AnnotatedSequent) -> Option<Annotated> {
    let mut prev: Option<&Annotated> = None;
    for el in g {
        if let Some(p) = prev {
            if p.0 == el.0 {
                return Some(p.clone());
            }
        }
        prev = Some(el);
    }
    None
}

/// First applicable Compress by position, then longer patterns first.
pub fn compress_candidate(ctx: &BtContext, g: &AnnotatedSequent) -> Option<BtRule> {
    for k in ctx.positions() {
        let mut patterns: Vec<BitString> = strings_at(g, k)
            .iter()
            .flat_map(|s| s.prefixes().filter(|p| !p.is_empty()).collect::<Vec<_>>())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        patterns.sort_by(|a, b| b.len().cmp(&a.len()).then(a.cmp(b)));
        if let Some(p) = patterns.into_iter().find(|p| compress_applicable(g, k, p)) {
            return Some(BtRule::Compress { k, pattern: p });
        }
    }
    None
}

/// Why a node labelled `rule` (`None` for a discharge) breaks the rule
/// priority, if it does.
pub fn priority_violation(ctx: &BtContext, rule: Option<&BtRule>, g: &AnnotatedSequent) -> Option<&'static str> {
    if rule != Some(&BtRule::Resolve) && resolve_candidate(g).is_some() {
        return Some("Resolve applies but another rule is used");
    }
    if !matches!(rule, Some(BtRule::Resolve | BtRule::Compress { .. })) && compress_candidate(ctx, g).is_some() {
        return Some("Compress applies but another rule is used");
    }
    None
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SatStep {
    pub rule: BtRule,
    pub principal: Option<Annotated>,
    pub conclusion: AnnotatedSequent,
}

/// Applies Resolve and then Compress until neither applies.
pub fn saturate(ctx: &BtContext, g: &AnnotatedSequent) -> (AnnotatedSequent, Vec<SatStep>) {
    let mut cur = g.clone();
    let mut steps = Vec::new();
    loop {
        let (rule, principal) = if let Some(el) = resolve_candidate(&cur) {
            (BtRule::Resolve, Some(el))
        } else if let Some(r) = compress_candidate(ctx, &cur) {
            (r, None)
        } else {
            return (cur, steps);
        };
        let next = apply_bt_rule(ctx, &rule, principal.as_ref(), &cur)
            .expect("candidate rules apply")
            .remove(0);
        steps.push(SatStep {
            rule,
            principal,
            conclusion: cur,
        });
        cur = next;
    }
}

/// Is `p = s·0^j·1` for some `j`?
pub fn progresses_at(s: &BitString, p: &BitString) -> bool {
    if p.len() <= s.len() || !s.is_prefix_of(p) || p.last() != Some(true) {
        return false;
    }
    p.bits()[s.len()..p.len() - 1].iter().all(|b| !b)
}

fn bad_at(rule: Option<&BtRule>, k: u32, s: &BitString) -> bool {
    matches!(rule, Some(BtRule::Compress { k: j, pattern }) if *j == k && pattern.is_strict_prefix_of(s))
}

fn good_at(rule: Option<&BtRule>, k: u32, s: &BitString) -> bool {
    matches!(rule, Some(BtRule::Compress { k: j, pattern }) if *j == k && progresses_at(s, pattern))
}

/// A pair `(k, s)` preserved and progressing on the given nodes.
pub fn covering_pair(ctx: &BtContext, nodes: &[(&AnnotatedSequent, Option<&BtRule>)]) -> Option<(u32, BitString)> {
    let (first, _) = nodes.first()?;
    for k in ctx.positions() {
        let candidates: BTreeSet<BitString> = strings_at(first, k)
            .iter()
            .flat_map(|s| s.prefixes().collect::<Vec<_>>())
            .collect();
        for s in candidates {
            let preserved = nodes
                .iter()
                .all(|(g, r)| occurs(g, k, &s) && !bad_at(*r, k, &s));
            if preserved && nodes.iter().any(|(_, r)| good_at(*r, k, &s)) {
                return Some((k, s));
            }
        }
    }
    None
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckReport {
    pub proof: bool,
    pub witness: Option<BTreeSet<usize>>,
    /// Cyclic components examined with the pair covering each.
    pub certificate: Vec<(Vec<usize>, (u32, BitString))>,
}

fn rule_of(node: &Node<AnnotatedSequent, BtRule, Annotated>) -> Option<&BtRule> {
    match &node.label {
        Label::Rule(r) => Some(r),
        _ => None,
    }
}

fn structural(node: usize, reason: impl ToString) -> BtError {
    BtError::Structural {
        node,
        reason: reason.to_string(),
    }
}

/// Checks annotations, rule instances and the rule priority.
pub fn validate_bt(d: &BtDerivation) -> Result<BtContext, BtError> {
    let ctx = BtContext::new(&erase_sequent(&d.node(0).sequent));
    let w = bitstring::width(ctx.m);
    for (v, node) in d.nodes().iter().enumerate() {
        for (f, s) in &node.sequent {
            if s.width() != w {
                return Err(structural(v, format!("annotation {s} should have {w} components")));
            }
            if !ctx.table.contains(f) {
                return Err(structural(v, format!("{f} is outside the closure of the root")));
            }
        }
        match &node.label {
            Label::Rule(r) => {
                let premises =
                    apply_bt_rule(&ctx, r, node.principal.as_ref(), &node.sequent).map_err(|e| structural(v, e))?;
                let children: Vec<&AnnotatedSequent> = node.children.iter().map(|&c| &d.node(c).sequent).collect();
                if premises.iter().collect::<Vec<_>>() != children {
                    return Err(structural(v, format!("premises of {r} do not match the children")));
                }
                if let Some(why) = priority_violation(&ctx, Some(r), &node.sequent) {
                    return Err(structural(v, why));
                }
            }
            Label::Discharge(_) => {
                if let Some(why) = priority_violation(&ctx, None, &node.sequent) {
                    return Err(structural(v, why));
                }
            }
            Label::Leaf(_) => {}
        }
    }
    Ok(ctx)
}

fn bt_condition_graph(d: &BtDerivation, ctx: &BtContext) -> (ConditionGraph, Vec<(u32, BitString)>) {
    let mut labels: BTreeSet<(u32, BitString)> = BTreeSet::new();
    for node in d.nodes() {
        for k in ctx.positions() {
            for s in strings_at(&node.sequent, k) {
                labels.extend(s.prefixes().map(|p| (k, p)));
            }
        }
    }
    let labels: Vec<(u32, BitString)> = labels.into_iter().collect();
    let pairs = labels
        .iter()
        .enumerate()
        .map(|(index, (k, s))| ConditionPair {
            index,
            inplay: d.nodes().iter().map(|n| occurs(&n.sequent, *k, s)).collect(),
            good: d.nodes().iter().map(|n| good_at(rule_of(n), *k, s)).collect(),
            bad: d.nodes().iter().map(|n| bad_at(rule_of(n), *k, s)).collect(),
        })
        .collect();
    (
        ConditionGraph {
            succ: d.cyclic_successors(),
            pairs,
        },
        labels,
    )
}

/// Every strongly connected subgraph of the tree with back edges needs a pair
/// that is preserved and progresses on it.
pub fn check_bt(d: &BtDerivation) -> Result<CheckReport, BtError> {
    let ctx = validate_bt(d)?;
    let (g, labels) = bt_condition_graph(d, &ctx);
    Ok(match cycleengine::all_scs_good(&g) {
        Verdict::Good { certificate } => CheckReport {
            proof: true,
            witness: None,
            certificate: certificate
                .into_iter()
                .map(|(comp, i)| (comp, labels[i].clone()))
                .collect(),
        },
        Verdict::Bad { witness } => CheckReport {
            proof: false,
            witness: Some(witness),
            certificate: Vec::new(),
        },
    })
}

/// [`check_bt`] with the exhaustive subgraph enumeration.
pub fn brute_check_bt(d: &BtDerivation) -> Result<bool, BtError> {
    let ctx = validate_bt(d)?;
    let (g, _) = bt_condition_graph(d, &ctx);
    Ok(cycleengine::brute_scs_good(&g)?.is_good())
}

/// Drops annotations and the Resolve and Compress nodes.
pub fn erase(d: &BtDerivation) -> Result<NwDerivation, BtError> {
    let skip = |mut v: usize| {
        while matches!(rule_of(d.node(v)), Some(BtRule::Resolve | BtRule::Compress { .. })) {
            v = d.node(v).children[0];
        }
        v
    };
    let mut order = vec![skip(0)];
    let mut nodes: Vec<Node<Sequent, NwRule, Formula>> = Vec::new();
    let mut i = 0;
    while i < order.len() {
        let v = order[i];
        let node = d.node(v);
        let mut children = Vec::new();
        for &c in &node.children {
            children.push(order.len());
            order.push(skip(c));
        }
        let label = match &node.label {
            Label::Rule(r) => Label::Rule(r.to_nw().unwrap()),
            Label::Discharge(t) => Label::Discharge(t.clone()),
            Label::Leaf(t) => Label::Leaf(t.clone()),
        };
        let principal = match &node.label {
            Label::Rule(r) if !r.is_axiom() => node.principal.as_ref().map(|(f, _)| f.clone()),
            _ => None,
        };
        nodes.push(Node {
            sequent: erase_sequent(&node.sequent),
            label,
            principal,
            children,
        });
        i += 1;
    }
    Ok(NwDerivation::new(nodes)?)
}

/// Follows discharges and back edges to the node where a rule is applied.
fn rule_node(pi: &NwDerivation, mut v: usize) -> usize {
    loop {
        match pi.node(v).label {
            Label::Rule(_) => return v,
            Label::Discharge(_) => v = pi.node(v).children[0],
            Label::Leaf(_) => v = pi.companion(v).unwrap(),
        }
    }
}

type BtDraft = Draft<AnnotatedSequent, BtRule, Annotated>;

fn push_draft(drafts: &mut Vec<BtDraft>, sequent: AnnotatedSequent, parent: Option<usize>) -> usize {
    let id = drafts.len();
    drafts.push(Draft {
        sequent,
        rule: None,
        principal: None,
        children: Vec::new(),
        back: None,
    });
    if let Some(p) = parent {
        drafts[p].children.push(id);
    }
    id
}

/// Pushes the saturation chain below `parent` and returns the saturated node.
fn push_saturated(
    ctx: &BtContext,
    drafts: &mut Vec<BtDraft>,
    g: AnnotatedSequent,
    parent: Option<usize>,
    path: &mut Vec<usize>,
) -> usize {
    let (sat, steps) = saturate(ctx, &g);
    let mut parent = parent;
    for st in steps {
        let id = push_draft(drafts, st.conclusion, parent);
        drafts[id].rule = Some(st.rule);
        drafts[id].principal = st.principal;
        path.push(id);
        parent = Some(id);
    }
    let f = push_draft(drafts, sat, parent);
    path.push(f);
    f
}

/// The first ancestor on `path` (root first) that carries the same sequent
/// as the last node, passes `same`, and has a pair preserved and progressing
/// on the connecting path.
fn tie_target(
    ctx: &BtContext,
    drafts: &[BtDraft],
    path: &[usize],
    same: impl Fn(usize) -> bool,
) -> Vec<usize> {
    let f = *path.last().unwrap();
    let mut out = Vec::new();
    for (i, &a) in path[..path.len() - 1].iter().enumerate() {
        if !same(a) || drafts[a].sequent != drafts[f].sequent {
            continue;
        }
        let seg: Vec<(&AnnotatedSequent, Option<&BtRule>)> = path[i..]
            .iter()
            .map(|&v| (&drafts[v].sequent, drafts[v].rule.as_ref()))
            .collect();
        if covering_pair(ctx, &seg).is_some() {
            out.push(a);
        }
    }
    out
}

struct Translator<'a> {
    ctx: BtContext,
    pi: &'a NwDerivation,
    drafts: Vec<BtDraft>,
    keys: Vec<Option<usize>>,
    budget: usize,
}

impl Translator<'_> {
    fn go(&mut self, v: usize, g: AnnotatedSequent, parent: Option<usize>, path: &mut Vec<usize>) -> Result<(), BtError> {
        let depth = path.len();
        let f = push_saturated(&self.ctx, &mut self.drafts, g, parent, path);
        self.keys.resize(self.drafts.len(), None);
        let keys = &self.keys;
        if let Some(&a) = tie_target(&self.ctx, &self.drafts, path, |a| keys[a] == Some(v)).first() {
            self.drafts[f].back = Some(a);
            path.truncate(depth);
            return Ok(());
        }
        if path.len() > self.budget {
            return Err(BtError::BudgetExceeded(self.budget));
        }
        self.keys[f] = Some(v);
        let node = self.pi.node(v);
        let Label::Rule(r) = node.label else {
            unreachable!("rule_node resolves to rule nodes")
        };
        let rule = BtRule::from_nw(r);
        let principal = match (&node.principal, r.is_axiom()) {
            (Some(p), false) => self.drafts[f].sequent.iter().find(|(x, _)| x == p).cloned(),
            _ => None,
        };
        let premises = apply_bt_rule(&self.ctx, &rule, principal.as_ref(), &self.drafts[f].sequent)
            .map_err(|e| structural(v, e))?;
        self.drafts[f].rule = Some(rule);
        self.drafts[f].principal = principal;
        for (&c, prem) in node.children.iter().zip(premises) {
            if erase_sequent(&prem) != self.pi.node(c).sequent {
                return Err(structural(c, "annotated premise does not match the plain derivation"));
            }
            self.go(rule_node(self.pi, c), prem, Some(f), path)?;
        }
        path.truncate(depth);
        Ok(())
    }
}

/// Annotates a plain cyclic proof, saturating after every rule and tying back
/// edges at the first repeat with a covering pair. The result is checked.
pub fn translate_nw_to_bt(pi: &NwDerivation, budget: usize) -> Result<BtDerivation, BtError> {
    if !nwproof::check_nw(pi)?.proof {
        return Err(BtError::NotAProof);
    }
    let ctx = BtContext::new(&pi.node(0).sequent);
    let root = annotate(&pi.node(0).sequent, ctx.m);
    let mut t = Translator {
        ctx,
        pi,
        drafts: Vec::new(),
        keys: Vec::new(),
        budget,
    };
    t.go(rule_node(pi, 0), root, None, &mut Vec::new())?;
    let d = derivation::materialize(&t.drafts, 0)?;
    if !check_bt(&d)?.proof {
        return Err(BtError::NotAProof);
    }
    Ok(d)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProverConfig {
    /// Maximal height of a proof.
    pub depth: usize,
    /// How often one annotated sequent may be expanded along a path.
    pub repeats: usize,
    /// Number of expansions before giving up.
    pub max_steps: usize,
}

pub const DEFAULT_DEPTH_CAP: usize = 100_000;

/// `min(cap, |Clos|^(2·(m/2+1)·|Clos|))`, with one position when there is no
/// even priority.
pub fn default_depth(phi: &Sequent, cap: usize) -> usize {
    let table = closure(phi);
    let n = table.members.len();
    let e = 2usize
        .saturating_mul(bitstring::width(table.max_even).max(1))
        .saturating_mul(n);
    let mut acc: usize = 1;
    for _ in 0..e {
        acc = acc.saturating_mul(n);
        if acc >= cap {
            return cap;
        }
    }
    acc.min(cap)
}

impl ProverConfig {
    pub fn for_sequent(phi: &Sequent) -> Self {
        ProverConfig {
            depth: default_depth(phi, DEFAULT_DEPTH_CAP),
            repeats: 2,
            max_steps: 200_000,
        }
    }
}

type Cont<'c> = dyn FnMut(&mut Search) -> bool + 'c;

struct Search {
    ctx: BtContext,
    cfg: ProverConfig,
    drafts: Vec<BtDraft>,
    parent: Vec<Option<usize>>,
    keyed: Vec<bool>,
    steps: usize,
    found: Option<BtDerivation>,
}

fn alternatives(g: &AnnotatedSequent) -> Vec<(BtRule, Annotated)> {
    let mut inner = Vec::new();
    let mut boxes = Vec::new();
    for el in g {
        match &el.0 {
            Formula::Or(..) => inner.push((BtRule::Or, el.clone())),
            Formula::And(..) => inner.push((BtRule::And, el.clone())),
            Formula::Fix(FixKind::Mu, ..) => inner.push((BtRule::Mu, el.clone())),
            Formula::Fix(FixKind::Nu, ..) => inner.push((BtRule::Nu, el.clone())),
            Formula::Box(_) => boxes.push((BtRule::Box, el.clone())),
            _ => {}
        }
    }
    inner.extend(boxes);
    inner
}

impl Search {
    fn undo(&mut self, mark: usize, parent: Option<usize>) {
        self.drafts.truncate(mark);
        self.parent.truncate(mark);
        self.keyed.truncate(mark);
        if let Some(p) = parent {
            if p < mark {
                self.drafts[p].children.pop();
            }
        }
    }

    fn path_to(&self, v: usize) -> Vec<usize> {
        let mut path = vec![v];
        let mut cur = v;
        while let Some(p) = self.parent[cur] {
            path.push(p);
            cur = p;
        }
        path.reverse();
        path
    }

    fn expand(&mut self, g: AnnotatedSequent, parent: Option<usize>, k: &mut Cont<'_>) -> bool {
        self.steps += 1;
        if self.steps > self.cfg.max_steps {
            return false;
        }
        let mark = self.drafts.len();
        let mut chain = Vec::new();
        let f = push_saturated(&self.ctx, &mut self.drafts, g, parent, &mut chain);
        let mut up = parent;
        for &id in &chain {
            self.parent.push(up);
            self.keyed.push(false);
            up = Some(id);
        }

        if let Some(ax) = axiom_for(&erase_sequent(&self.drafts[f].sequent)) {
            self.drafts[f].rule = Some(BtRule::from_nw(ax));
            if k(self) {
                return true;
            }
            self.undo(mark, parent);
            return false;
        }

        let path = self.path_to(f);
        let keyed = &self.keyed;
        for a in tie_target(&self.ctx, &self.drafts, &path, |a| keyed[a]) {
            self.drafts[f].back = Some(a);
            if k(self) {
                return true;
            }
            self.drafts[f].back = None;
        }
        let repeats = path
            .iter()
            .filter(|&&a| self.keyed[a] && self.drafts[a].sequent == self.drafts[f].sequent)
            .count();
        if repeats >= self.cfg.repeats || path.len() > self.cfg.depth {
            self.undo(mark, parent);
            return false;
        }
        self.keyed[f] = true;
        for (rule, el) in alternatives(&self.drafts[f].sequent) {
            let premises = apply_bt_rule(&self.ctx, &rule, Some(&el), &self.drafts[f].sequent).expect("alternatives apply");
            self.drafts[f].rule = Some(rule);
            self.drafts[f].principal = Some(el);
            if self.expand_all(&premises, 0, f, k) {
                return true;
            }
            if self.steps > self.cfg.max_steps {
                break;
            }
        }
        self.undo(mark, parent);
        false
    }

    fn expand_all(&mut self, premises: &[AnnotatedSequent], i: usize, f: usize, k: &mut Cont<'_>) -> bool {
        if i == premises.len() {
            return k(self);
        }
        self.expand(premises[i].clone(), Some(f), &mut |s: &mut Search| s.expand_all(premises, i + 1, f, k))
    }
}

/// Searches for an annotated proof of `phi^ε`. Every candidate is validated
/// by [`check_bt`]; `None` means no proof was found within the budget.
pub fn prove(phi: &Sequent, cfg: &ProverConfig) -> Option<BtDerivation> {
    let ctx = BtContext::new(phi);
    let root = annotate(phi, ctx.m);
    let mut s = Search {
        ctx,
        cfg: *cfg,
        drafts: Vec::new(),
        parent: Vec::new(),
        keyed: Vec::new(),
        steps: 0,
        found: None,
    };
    let depth = cfg.depth;
    s.expand(root, None, &mut |s: &mut Search| {
        let Ok(d) = derivation::materialize(&s.drafts, 0) else {
            return false;
        };
        if d.height() > depth || !check_bt(&d).is_ok_and(|r| r.proof) {
            return false;
        }
        s.found = Some(d);
        true
    });
    s.found
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::determinize::{self, OmegaSource, ParityMacrostate};
    use crate::mucalc::parse_formula;
    use crate::nwproof::{build_derivation, canonical_choice, check_nw, RuleLetter, TrackState};

    fn f(s: &str) -> Formula {
        parse_formula(s).unwrap()
    }

    fn b(s: &str) -> BitString {
        s.parse().unwrap()
    }

    fn t(parts: &[&str]) -> TSeq {
        TSeq::from_components(parts.iter().map(|p| b(p)).collect())
    }

    fn ann(items: &[(&str, &[&str])]) -> AnnotatedSequent {
        items.iter().map(|(x, s)| (f(x), t(s))).collect()
    }

    fn ctx(items: &[&str]) -> BtContext {
        BtContext::new(&items.iter().map(|s| f(s)).collect())
    }

    fn nw(items: &[&str]) -> NwDerivation {
        let root: Sequent = items.iter().map(|s| f(s)).collect();
        build_derivation(&root, &mut |s| canonical_choice(s, 0), 200).unwrap()
    }

    #[test]
    fn restrict_examples() {
        let g = ann(&[("p", &["1", "0"]), ("q", &["1", "1"])]);
        assert_eq!(restrict(&t(&["1", "1"]), 0, &g), t(&["1", "0"]));
        assert_eq!(restrict(&t(&["1", "1"]), 2, &g), t(&["1", "1"]));
        assert_eq!(restrict(&t(&[""]), 0, &ann(&[("p", &[""])])), t(&[""]));
    }

    #[test]
    fn rule_examples() {
        let c = ctx(&["nu x. [] x"]);
        let g = ann(&[("nu x. [] x", &[""])]);
        let el = g.iter().next().unwrap().clone();
        assert_eq!(
            apply_bt_rule(&c, &BtRule::Nu, Some(&el), &g).unwrap(),
            vec![ann(&[("[] nu x. [] x", &["1"])])]
        );
        let g = ann(&[("[] nu x. [] x", &["11"]), ("[] nu x. [] x", &["1"])]);
        let lesser = (f("[] nu x. [] x"), t(&["1"]));
        assert_eq!(
            apply_bt_rule(&c, &BtRule::Resolve, Some(&lesser), &g).unwrap(),
            vec![ann(&[("[] nu x. [] x", &["11"])])]
        );
        let greater = (f("[] nu x. [] x"), t(&["11"]));
        assert!(apply_bt_rule(&c, &BtRule::Resolve, Some(&greater), &g).is_err());
        let g = ann(&[("[] nu x. [] x", &["11"])]);
        let r = BtRule::Compress { k: 0, pattern: b("11") };
        assert_eq!(
            apply_bt_rule(&c, &r, None, &g).unwrap(),
            vec![ann(&[("[] nu x. [] x", &["1"])])]
        );
        let g = ann(&[("[] nu x. [] x", &["01"])]);
        let r = BtRule::Compress { k: 0, pattern: b("01") };
        assert!(apply_bt_rule(&c, &r, None, &g).is_err());
    }

    #[test]
    fn nu_context_gets_zero() {
        let c = ctx(&["nu x. [] x", "p"]);
        let g = ann(&[("nu x. [] x", &["1"]), ("p", &["0"])]);
        let el = (f("nu x. [] x"), t(&["1"]));
        assert_eq!(
            apply_bt_rule(&c, &BtRule::Nu, Some(&el), &g).unwrap(),
            vec![ann(&[("[] nu x. [] x", &["11"]), ("p", &["00"])])]
        );
    }

    #[test]
    fn saturate_examples() {
        let c = ctx(&["nu x. [] x"]);
        let (g, steps) = saturate(&c, &ann(&[("nu x. [] x", &["11"]), ("nu x. [] x", &["1"])]));
        assert_eq!(g, ann(&[("nu x. [] x", &["1"])]));
        assert_eq!(steps.len(), 2);
        assert_eq!(steps[0].rule, BtRule::Resolve);
        let (g, steps) = saturate(&c, &ann(&[("nu x. [] x", &[""])]));
        assert_eq!(g, ann(&[("nu x. [] x", &[""])]));
        assert!(steps.is_empty());
        let (g, steps) = saturate(&c, &ann(&[("nu x. [] x", &["11"])]));
        assert_eq!(g, ann(&[("nu x. [] x", &["1"])]));
        assert_eq!(steps[0].rule, BtRule::Compress { k: 0, pattern: b("11") });
    }

    #[test]
    fn rule_names_round_trip() {
        for r in [BtRule::Ax1, BtRule::Nu, BtRule::Resolve, BtRule::Compress { k: 2, pattern: b("01") }] {
            assert_eq!(r.to_string().parse::<BtRule>().unwrap(), r);
        }
        assert!("compress(0)".parse::<BtRule>().is_err());
    }

    #[test]
    fn nu_box_translation() {
        let pi = nw(&["nu x. [] x"]);
        let d = translate_nw_to_bt(&pi, 1000).unwrap();
        assert_eq!(d.len(), 6);
        let r = check_bt(&d).unwrap();
        assert!(r.proof);
        assert!(r.certificate.iter().all(|(_, p)| *p == (0, b("1"))));
        assert!(brute_check_bt(&d).unwrap());
        assert!(check_nw(&erase(&d).unwrap()).unwrap().proof);
    }

    #[test]
    fn finite_translation() {
        let pi = nw(&["p", "~p"]);
        let d = translate_nw_to_bt(&pi, 100).unwrap();
        assert_eq!(d.len(), 1);
        assert_eq!(d.node(0).label, Label::Rule(BtRule::Ax1));
        assert!(check_bt(&d).unwrap().proof);
    }

    #[test]
    fn nested_translation() {
        let pi = nw(&["nu y. mu x. (<> x | [] y)"]);
        assert!(check_nw(&pi).unwrap().proof);
        let d = translate_nw_to_bt(&pi, 1000).unwrap();
        assert!(check_bt(&d).unwrap().proof);
        assert!(check_nw(&erase(&d).unwrap()).unwrap().proof);
    }

    #[test]
    fn dropping_compress_breaks_proof() {
        let d = translate_nw_to_bt(&nw(&["nu x. [] x"]), 1000).unwrap();
        let v = (0..d.len())
            .find(|&v| matches!(d.node(v).label, Label::Rule(BtRule::Compress { .. })))
            .unwrap();
        let mut nodes = d.nodes().to_vec();
        let child = nodes[v].children[0];
        nodes[v].label = Label::Rule(BtRule::Mu);
        nodes[v].children = nodes[child].children.clone();
        let bad = BtDerivation::new(nodes);
        assert!(bad.map_or(true, |d| !check_bt(&d).is_ok_and(|r| r.proof)));
    }

    #[test]
    fn prover_examples() {
        let go = |s: &str| {
            let phi: Sequent = [f(s)].into_iter().collect();
            prove(&phi, &ProverConfig::for_sequent(&phi))
        };
        let d = go("nu x. [] x").unwrap();
        assert!(check_bt(&d).unwrap().proof);
        let d = go("p | ~p").unwrap();
        assert_eq!(d.node(0).label, Label::Rule(BtRule::Or));
        assert!(go("mu x. [] x").is_none());
        assert!(go("mu x. <> x").is_none());
    }

    #[test]
    fn default_depth_saturates() {
        let phi: Sequent = [f("nu x. [] x")].into_iter().collect();
        // |Clos| = 2, one position: 2^4
        assert_eq!(default_depth(&phi, 100_000), 16);
        let phi: Sequent = [f("nu x. mu y. [] x & <> y")].into_iter().collect();
        assert_eq!(default_depth(&phi, 1000), 1000);
        let phi: Sequent = [f("p | (q | ~p)")].into_iter().collect();
        assert!(default_depth(&phi, 1000) >= 2);
        assert!(prove(&phi, &ProverConfig::for_sequent(&phi)).is_some());
    }

    /// Saturated annotations along the cycle agree with the determinized
    /// tracking automaton's macrostates on the same branch.
    #[test]
    fn annotations_match_macrostates() {
        let pi = nw(&["nu x. [] x"]);
        let d = translate_nw_to_bt(&pi, 1000).unwrap();
        let aut = nwproof::tracking_automaton(&pi.node(0).sequent);
        let mapped = |m: &ParityMacrostate<TrackState>| -> AnnotatedSequent {
            let mut best: alloc::collections::BTreeMap<Formula, TSeq> = Default::default();
            for (q, s) in &m.f {
                let phi = match q {
                    TrackState::Init => continue,
                    TrackState::Formula(x) => x.clone(),
                    TrackState::Starred(x) => x.unfold().unwrap(),
                };
                let e = best.entry(phi).or_insert_with(|| s.clone());
                if *s > *e {
                    *e = s.clone();
                }
            }
            best.into_iter().collect()
        };
        // walk the saturated nodes of the annotated proof
        let next_rule_node = |mut v: usize| loop {
            match &d.node(v).label {
                Label::Rule(BtRule::Resolve | BtRule::Compress { .. }) => v = d.node(v).children[0],
                Label::Rule(_) => return v,
                Label::Discharge(_) => v = d.node(v).children[0],
                Label::Leaf(_) => v = d.companion(v).unwrap(),
            }
        };
        let mut v = next_rule_node(0);
        let letter = |v: usize, w: usize| RuleLetter {
            conclusion: erase_sequent(&d.node(v).sequent),
            principal: d.node(v).principal.as_ref().map(|p| p.0.clone()),
            premise: erase_sequent(&d.node(w).sequent),
        };
        let init = ParityMacrostate::initial(TrackState::Init, aut.table.max_even);
        let mut m = determinize::parity_step(&aut, &init, &letter(v, v), &mut determinize::first_witness);
        assert_eq!(aut.initial(), TrackState::Init);
        for _ in 0..8 {
            assert_eq!(mapped(&m), d.node(v).sequent);
            let w = next_rule_node(d.node(v).children[0]);
            m = determinize::parity_step(&aut, &m, &letter(v, w), &mut determinize::first_witness);
            v = w;
        }
    }
}
