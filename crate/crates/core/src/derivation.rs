//! Finite derivation trees with discharged leaves pointing back to companion
//! nodes. Shared by the plain and the annotated proof systems.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DerivationError {
    #[error("derivation has no nodes")]
    Empty,
    #[error("node {0} is not reachable as a tree child from the root exactly once")]
    NotATree(usize),
    #[error("child index {0} out of range")]
    DanglingChild(usize),
    #[error("discharge node {0} must have exactly one child")]
    DischargeArity(usize),
    #[error("discharged leaf {0} has children")]
    LeafWithChildren(usize),
    #[error("token {0} is used by more than one discharge node")]
    DuplicateToken(String),
    #[error("leaf {leaf} refers to unknown token {token}")]
    UnknownToken { leaf: usize, token: String },
    #[error("companion of leaf {0} is not a proper ancestor")]
    CompanionNotAncestor(usize),
    #[error("leaf {0} and its companion carry different sequents")]
    CompanionMismatch(usize),
    #[error("discharge node {0} and its child carry different sequents")]
    DischargeMismatch(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Label<R> {
    Rule(R),
    /// The discharge rule with this token; its only child repeats its sequent.
    Discharge(String),
    /// A leaf discharged by the token.
    Leaf(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Node<S, R, P> {
    pub sequent: S,
    pub label: Label<R>,
    pub principal: Option<P>,
    pub children: Vec<usize>,
}

/// Node `0` is the root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Derivation<S, R, P> {
    nodes: Vec<Node<S, R, P>>,
    parent: Vec<Option<usize>>,
    companion: BTreeMap<usize, usize>,
}

impl<S: PartialEq, R, P> Derivation<S, R, P> {
    /// Checks the tree shape and the discharge discipline.
    pub fn new(nodes: Vec<Node<S, R, P>>) -> Result<Self, DerivationError> {
        if nodes.is_empty() {
            return Err(DerivationError::Empty);
        }
        let n = nodes.len();
        let mut parent = vec![None; n];
        let mut seen = vec![false; n];
        seen[0] = true;
        let mut work = vec![0];
        while let Some(v) = work.pop() {
            for &c in &nodes[v].children {
                if c >= n {
                    return Err(DerivationError::DanglingChild(c));
                }
                if seen[c] {
                    return Err(DerivationError::NotATree(c));
                }
                seen[c] = true;
                parent[c] = Some(v);
                work.push(c);
            }
        }
        if let Some(v) = seen.iter().position(|s| !s) {
            return Err(DerivationError::NotATree(v));
        }

        let mut tokens = BTreeMap::new();
        for (v, node) in nodes.iter().enumerate() {
            match &node.label {
                Label::Discharge(t) => {
                    if node.children.len() != 1 {
                        return Err(DerivationError::DischargeArity(v));
                    }
                    if nodes[node.children[0]].sequent != node.sequent {
                        return Err(DerivationError::DischargeMismatch(v));
                    }
                    if tokens.insert(t.clone(), v).is_some() {
                        return Err(DerivationError::DuplicateToken(t.clone()));
                    }
                }
                Label::Leaf(_) if !node.children.is_empty() => {
                    return Err(DerivationError::LeafWithChildren(v));
                }
                _ => {}
            }
        }
        let mut companion = BTreeMap::new();
        for (v, node) in nodes.iter().enumerate() {
            if let Label::Leaf(t) = &node.label {
                let &c = tokens.get(t).ok_or_else(|| DerivationError::UnknownToken {
                    leaf: v,
                    token: t.clone(),
                })?;
                // the companion's child lies strictly between, so the companion
                // must be a proper ancestor of the leaf's parent
                let mut up = parent[v].and_then(|p| parent[p]);
                let mut found = false;
                while let Some(a) = up {
                    if a == c {
                        found = true;
                        break;
                    }
                    up = parent[a];
                }
                if !found {
                    return Err(DerivationError::CompanionNotAncestor(v));
                }
                if nodes[c].sequent != node.sequent {
                    return Err(DerivationError::CompanionMismatch(v));
                }
                companion.insert(v, c);
            }
        }
        Ok(Derivation {
            nodes,
            parent,
            companion,
        })
    }
}

impl<S, R, P> Derivation<S, R, P> {
    pub fn nodes(&self) -> &[Node<S, R, P>] {
        &self.nodes
    }

    pub fn node(&self, v: usize) -> &Node<S, R, P> {
        &self.nodes[v]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        self.parent[v]
    }

    pub fn companion(&self, leaf: usize) -> Option<usize> {
        self.companion.get(&leaf).copied()
    }

    pub fn discharged_leaves(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.companion.iter().map(|(&l, &c)| (l, c))
    }

    pub fn depth(&self, v: usize) -> usize {
        let mut d = 0;
        let mut up = self.parent[v];
        while let Some(p) = up {
            d += 1;
            up = self.parent[p];
        }
        d
    }

    pub fn height(&self) -> usize {
        (0..self.len()).map(|v| self.depth(v)).max().unwrap_or(0)
    }

    pub fn is_ancestor(&self, a: usize, v: usize) -> bool {
        let mut up = Some(v);
        while let Some(u) = up {
            if u == a {
                return true;
            }
            up = self.parent[u];
        }
        false
    }

    /// Tree path from the root to `v`, inclusive.
    pub fn path_to(&self, v: usize) -> Vec<usize> {
        let mut path = vec![v];
        let mut up = self.parent[v];
        while let Some(p) = up {
            path.push(p);
            up = self.parent[p];
        }
        path.reverse();
        path
    }

    /// Successors in the tree with back edges: children, plus the companion
    /// of a discharged leaf.
    pub fn cyclic_successors(&self) -> Vec<Vec<usize>> {
        (0..self.len())
            .map(|v| match self.companion(v) {
                Some(c) => vec![c],
                None => self.nodes[v].children.clone(),
            })
            .collect()
    }

    /// Lasso-shaped infinite paths from the root: the stem is the tree path to
    /// the entry node `u`, and the loop is a closed walk from `u` that stays
    /// strictly below `u` in between visits and has length at most `max_len`.
    /// At most `limit` branches are produced.
    pub fn lasso_branches(&self, max_len: usize, limit: usize) -> Vec<Branch> {
        let succ = self.cyclic_successors();
        let mut out = Vec::new();
        for u in 0..self.len() {
            let stem = {
                let mut p = self.path_to(u);
                p.pop();
                p
            };
            let mut walk = vec![u];
            self.walks(&succ, u, &mut walk, max_len, limit, &stem, &mut out);
            if out.len() >= limit {
                break;
            }
        }
        out
    }

    #[allow(clippy::too_many_arguments)]
    fn walks(
        &self,
        succ: &[Vec<usize>],
        u: usize,
        walk: &mut Vec<usize>,
        max_len: usize,
        limit: usize,
        stem: &[usize],
        out: &mut Vec<Branch>,
    ) {
        let last = *walk.last().unwrap();
        for &w in &succ[last] {
            if out.len() >= limit {
                return;
            }
            if w == u {
                out.push(Branch {
                    stem: stem.to_vec(),
                    cycle: walk.clone(),
                });
                // continuing through u again yields longer loops
            }
            if walk.len() < max_len && (w == u || (self.is_ancestor(u, w))) {
                walk.push(w);
                self.walks(succ, u, walk, max_len, limit, stem, out);
                walk.pop();
            }
        }
    }
}

/// An infinite path `stem · cycle^ω` through the tree with back edges, given
/// by node ids.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Branch {
    pub stem: Vec<usize>,
    pub cycle: Vec<usize>,
}

impl Branch {
    pub fn node(&self, i: usize) -> usize {
        if i < self.stem.len() {
            self.stem[i]
        } else {
            self.cycle[(i - self.stem.len()) % self.cycle.len()]
        }
    }

    pub fn positions(&self) -> usize {
        self.stem.len() + self.cycle.len()
    }

    pub fn next_position(&self, p: usize) -> usize {
        if p + 1 < self.positions() {
            p + 1
        } else {
            self.stem.len()
        }
    }

    /// Checks that consecutive nodes are linked and the path starts at the root.
    pub fn is_valid<S, R, P>(&self, d: &Derivation<S, R, P>) -> bool {
        if self.cycle.is_empty() || self.node(0) != 0 {
            return false;
        }
        let succ = d.cyclic_successors();
        let n = d.len();
        (0..self.positions()).all(|p| {
            let (a, b) = (self.node(p), self.node(self.next_position(p)));
            a < n && b < n && succ[a].contains(&b)
        })
    }

    pub fn nodes(&self) -> BTreeSet<usize> {
        self.cycle.iter().copied().collect()
    }
}

/// A node of a derivation under construction. A node with `back = Some(t)`
/// becomes a leaf discharged at draft node `t`.
#[derive(Debug, Clone)]
pub struct Draft<S, R, P> {
    pub sequent: S,
    pub rule: Option<R>,
    pub principal: Option<P>,
    pub children: Vec<usize>,
    pub back: Option<usize>,
}

pub fn token_name(i: usize) -> String {
    match i {
        0 => "x".into(),
        1 => "y".into(),
        2 => "z".into(),
        _ => format!("x{i}"),
    }
}

/// Turns drafts rooted at `root` into a derivation, inserting a discharge node
/// above every back-edge target.
pub fn materialize<S: Clone + PartialEq, R: Clone, P: Clone>(
    drafts: &[Draft<S, R, P>],
    root: usize,
) -> Result<Derivation<S, R, P>, DerivationError> {
    let mut targets: Vec<usize> = Vec::new();
    let mut order = vec![root];
    let mut i = 0;
    while i < order.len() {
        let d = &drafts[order[i]];
        if let Some(t) = d.back {
            if !targets.contains(&t) {
                targets.push(t);
            }
        }
        order.extend(d.children.iter().copied());
        i += 1;
    }
    // tokens follow the preorder position of the companion
    targets.sort_by_key(|t| order.iter().position(|x| x == t));
    let token = |t: usize| token_name(targets.iter().position(|&x| x == t).unwrap());

    let mut nodes: Vec<Node<S, R, P>> = Vec::new();
    // (draft, slot in parent's child list)
    let mut stack: Vec<(usize, Option<usize>)> = vec![(root, None)];
    while let Some((d, parent)) = stack.pop() {
        let draft = &drafts[d];
        let attach = |nodes: &mut Vec<Node<S, R, P>>, id: usize| {
            if let Some(p) = parent {
                nodes[p].children.push(id);
            }
        };
        let mut top = nodes.len();
        if targets.contains(&d) {
            nodes.push(Node {
                sequent: draft.sequent.clone(),
                label: Label::Discharge(token(d)),
                principal: None,
                children: Vec::new(),
            });
            attach(&mut nodes, top);
            top = nodes.len();
            nodes.push(Node {
                sequent: draft.sequent.clone(),
                label: Label::Leaf(String::new()),
                principal: None,
                children: Vec::new(),
            });
            nodes[top - 1].children.push(top);
        } else {
            nodes.push(Node {
                sequent: draft.sequent.clone(),
                label: Label::Leaf(String::new()),
                principal: None,
                children: Vec::new(),
            });
            attach(&mut nodes, top);
        }
        let node = &mut nodes[top];
        match (draft.back, &draft.rule) {
            (Some(t), _) => node.label = Label::Leaf(token(t)),
            (None, Some(r)) => {
                node.label = Label::Rule(r.clone());
                node.principal = draft.principal.clone();
            }
            (None, None) => unreachable!("draft without rule or back edge"),
        }
        for &c in draft.children.iter().rev() {
            stack.push((c, Some(top)));
        }
    }
    Derivation::new(nodes)
}

#[cfg(test)]
mod tests {
    use super::*;

    type D = Derivation<u8, &'static str, ()>;

    fn node(s: u8, label: Label<&'static str>, children: Vec<usize>) -> Node<u8, &'static str, ()> {
        Node {
            sequent: s,
            label,
            principal: None,
            children,
        }
    }

    fn cyclic() -> D {
        D::new(vec![
            node(1, Label::Discharge("x".into()), vec![1]),
            node(1, Label::Rule("a"), vec![2]),
            node(1, Label::Leaf("x".into()), vec![]),
        ])
        .unwrap()
    }

    #[test]
    fn structure() {
        let d = cyclic();
        assert_eq!(d.companion(2), Some(0));
        assert_eq!(d.cyclic_successors(), vec![vec![1], vec![2], vec![0]]);
        let branches = d.lasso_branches(6, 100);
        assert_eq!(branches[0], Branch { stem: vec![], cycle: vec![0, 1, 2] });
        assert!(branches.iter().all(|b| b.is_valid(&d)));
    }

    #[test]
    fn rejects_bad_companions() {
        let r = D::new(vec![
            node(1, Label::Discharge("x".into()), vec![1]),
            node(1, Label::Leaf("x".into()), vec![]),
        ]);
        assert_eq!(r, Err(DerivationError::CompanionNotAncestor(1)));
        let r = D::new(vec![
            node(1, Label::Discharge("x".into()), vec![1]),
            node(1, Label::Rule("a"), vec![2]),
            node(2, Label::Leaf("x".into()), vec![]),
        ]);
        assert_eq!(r, Err(DerivationError::CompanionMismatch(2)));
        let r = D::new(vec![node(1, Label::Leaf("q".into()), vec![])]);
        assert!(matches!(r, Err(DerivationError::UnknownToken { .. })));
        let r = D::new(vec![node(1, Label::Rule("a"), vec![0])]);
        assert_eq!(r, Err(DerivationError::NotATree(0)));
    }

    #[test]
    fn materialize_inserts_discharge() {
        let drafts = vec![
            Draft { sequent: 1u8, rule: Some("a"), principal: None::<()>, children: vec![1], back: None },
            Draft { sequent: 2, rule: Some("b"), principal: None, children: vec![2, 3], back: None },
            Draft { sequent: 1, rule: None, principal: None, children: vec![], back: Some(0) },
            Draft { sequent: 3, rule: Some("c"), principal: None, children: vec![], back: None },
        ];
        let d = materialize(&drafts, 0).unwrap();
        assert_eq!(d.len(), 5);
        assert_eq!(d.node(0).label, Label::Discharge("x".into()));
        assert_eq!(d.node(1).label, Label::Rule("a"));
        assert_eq!(d.node(2).label, Label::Rule("b"));
        assert_eq!(d.node(2).children, vec![3, 4]);
        assert_eq!(d.node(3).label, Label::Leaf("x".into()));
        assert_eq!(d.node(4).label, Label::Rule("c"));
    }
}
