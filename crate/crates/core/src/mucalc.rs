//! Modal μ-calculus formulas in negation normal form, the closure relation
//! `→_C`, the dependency order on fixpoints and the parity function Ω.

use alloc::boxed::Box;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::graph;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MuError {
    #[error("syntax error at {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("bound variable {0} occurs negated")]
    NegativeBoundVariable(String),
    #[error("variable {0} is bound twice on one path")]
    ShadowedVariable(String),
    #[error("not a fixpoint formula: {0}")]
    NotAFixpoint(String),
    #[error("consecutive formulas {0} and {1} are not related by the closure relation")]
    NotATrace(String, String),
    #[error("no fixpoint formula is unfolded on the cycle")]
    NoFixpointOnCycle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FixKind {
    Mu,
    Nu,
}

impl fmt::Display for FixKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FixKind::Mu => "mu",
            FixKind::Nu => "nu",
        })
    }
}

/// Free identifiers are propositions; identifiers bound by an enclosing
/// fixpoint are variables. Formulas built by the parser are closed.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Formula {
    Prop(String),
    NegProp(String),
    Bot,
    Top,
    Or(Box<Formula>, Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Diamond(Box<Formula>),
    Box(Box<Formula>),
    Fix(FixKind, String, Box<Formula>),
    Var(String),
}

pub type Sequent = BTreeSet<Formula>;

impl Formula {
    pub fn prop(p: &str) -> Self {
        Formula::Prop(p.into())
    }

    pub fn neg_prop(p: &str) -> Self {
        Formula::NegProp(p.into())
    }

    pub fn or(a: Formula, b: Formula) -> Self {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn and(a: Formula, b: Formula) -> Self {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn diamond(a: Formula) -> Self {
        Formula::Diamond(Box::new(a))
    }

    pub fn boxed(a: Formula) -> Self {
        Formula::Box(Box::new(a))
    }

    pub fn mu(x: &str, body: Formula) -> Self {
        Formula::Fix(FixKind::Mu, x.into(), Box::new(body))
    }

    pub fn nu(x: &str, body: Formula) -> Self {
        Formula::Fix(FixKind::Nu, x.into(), Box::new(body))
    }

    pub fn var(x: &str) -> Self {
        Formula::Var(x.into())
    }

    pub fn fix_kind(&self) -> Option<FixKind> {
        match self {
            Formula::Fix(k, _, _) => Some(*k),
            _ => None,
        }
    }

    pub fn is_fixpoint(&self) -> bool {
        matches!(self, Formula::Fix(..))
    }

    /// `χ[ξ/x]` for `ξ = ηx.χ`.
    pub fn unfold(&self) -> Result<Formula, MuError> {
        match self {
            Formula::Fix(_, x, body) => Ok(body.substitute(x, self)),
            _ => Err(MuError::NotAFixpoint(self.to_string())),
        }
    }

    /// Replaces free occurrences of the variable `x`. `by` is assumed closed.
    pub fn substitute(&self, x: &str, by: &Formula) -> Formula {
        match self {
            Formula::Var(y) if y == x => by.clone(),
            Formula::Or(a, b) => Formula::or(a.substitute(x, by), b.substitute(x, by)),
            Formula::And(a, b) => Formula::and(a.substitute(x, by), b.substitute(x, by)),
            Formula::Diamond(a) => Formula::diamond(a.substitute(x, by)),
            Formula::Box(a) => Formula::boxed(a.substitute(x, by)),
            Formula::Fix(k, y, body) if y != x => {
                Formula::Fix(*k, y.clone(), Box::new(body.substitute(x, by)))
            }
            _ => self.clone(),
        }
    }

    /// Direct successors under `→_C`.
    pub fn closure_successors(&self) -> Vec<Formula> {
        match self {
            Formula::Or(a, b) | Formula::And(a, b) => alloc::vec![(**a).clone(), (**b).clone()],
            Formula::Diamond(a) | Formula::Box(a) => alloc::vec![(**a).clone()],
            Formula::Fix(..) => alloc::vec![self.unfold().unwrap()],
            _ => Vec::new(),
        }
    }

    fn children(&self) -> Vec<&Formula> {
        match self {
            Formula::Or(a, b) | Formula::And(a, b) => alloc::vec![&**a, &**b],
            Formula::Diamond(a) | Formula::Box(a) | Formula::Fix(_, _, a) => alloc::vec![&**a],
            _ => Vec::new(),
        }
    }

    /// Syntactic subformula test, excluding `self`.
    pub fn has_proper_subformula(&self, other: &Formula) -> bool {
        self.children()
            .into_iter()
            .any(|c| c == other || c.has_proper_subformula(other))
    }

    pub fn size(&self) -> usize {
        1 + self.children().into_iter().map(Formula::size).sum::<usize>()
    }

    fn precedence(&self) -> u8 {
        match self {
            Formula::Fix(..) => 0,
            Formula::Or(..) => 1,
            Formula::And(..) => 2,
            _ => 3,
        }
    }

    fn write_at(&self, f: &mut fmt::Formatter<'_>, ctx: u8) -> fmt::Result {
        let paren = self.precedence() < ctx;
        if paren {
            f.write_str("(")?;
        }
        match self {
            Formula::Prop(p) | Formula::Var(p) => f.write_str(p)?,
            Formula::NegProp(p) => write!(f, "~{p}")?,
            Formula::Bot => f.write_str("false")?,
            Formula::Top => f.write_str("true")?,
            Formula::Or(a, b) => {
                a.write_at(f, 1)?;
                f.write_str(" | ")?;
                b.write_at(f, 2)?;
            }
            Formula::And(a, b) => {
                a.write_at(f, 2)?;
                f.write_str(" & ")?;
                b.write_at(f, 3)?;
            }
            Formula::Diamond(a) => {
                f.write_str("<>")?;
                a.write_at(f, 3)?;
            }
            Formula::Box(a) => {
                f.write_str("[]")?;
                a.write_at(f, 3)?;
            }
            Formula::Fix(k, x, body) => {
                write!(f, "{k} {x}. ")?;
                body.write_at(f, 0)?;
            }
        }
        if paren {
            f.write_str(")")?;
        }
        Ok(())
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_at(f, 0)
    }
}

impl FromStr for Formula {
    type Err = MuError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_formula(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    True,
    False,
    Not,
    And,
    Or,
    Dia,
    Box,
    Mu,
    Nu,
    Dot,
    LParen,
    RParen,
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, MuError> {
    let mut out = Vec::new();
    let mut it = text.char_indices().peekable();
    while let Some(&(pos, c)) = it.peek() {
        if c.is_whitespace() {
            it.next();
            continue;
        }
        let single = match c {
            '~' | '¬' | '!' => Some(Tok::Not),
            '&' | '∧' => Some(Tok::And),
            '|' | '∨' => Some(Tok::Or),
            '◇' => Some(Tok::Dia),
            '□' => Some(Tok::Box),
            '.' => Some(Tok::Dot),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            'μ' => Some(Tok::Mu),
            'ν' => Some(Tok::Nu),
            '⊤' => Some(Tok::True),
            '⊥' => Some(Tok::False),
            _ => None,
        };
        if let Some(t) = single {
            it.next();
            out.push((pos, t));
            continue;
        }
        if c == '<' || c == '[' {
            it.next();
            let close = if c == '<' { '>' } else { ']' };
            match it.next() {
                Some((_, d)) if d == close => {}
                _ => {
                    return Err(MuError::Syntax {
                        pos,
                        msg: alloc::format!("expected {c}{close}"),
                    })
                }
            }
            out.push((pos, if c == '<' { Tok::Dia } else { Tok::Box }));
            continue;
        }
        if c.is_alphanumeric() || c == '_' {
            let mut word = String::new();
            while let Some(&(_, d)) = it.peek() {
                if d.is_alphanumeric() || d == '_' || d == '\'' {
                    word.push(d);
                    it.next();
                } else {
                    break;
                }
            }
            let tok = match word.as_str() {
                "true" => Tok::True,
                "false" => Tok::False,
                "mu" => Tok::Mu,
                "nu" => Tok::Nu,
                _ => Tok::Ident(word),
            };
            out.push((pos, tok));
            continue;
        }
        return Err(MuError::Syntax {
            pos,
            msg: alloc::format!("unexpected character {c:?}"),
        });
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    at: usize,
    end: usize,
    bound: Vec<String>,
    shadowing: bool,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|(_, t)| t)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.at).map_or(self.end, |(p, _)| *p)
    }

    fn fail<T>(&self, msg: &str) -> Result<T, MuError> {
        Err(MuError::Syntax {
            pos: self.pos(),
            msg: msg.into(),
        })
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), MuError> {
        if self.peek() == Some(&tok) {
            self.at += 1;
            Ok(())
        } else {
            self.fail(what)
        }
    }

    fn expr(&mut self) -> Result<Formula, MuError> {
        let mut left = self.conj()?;
        while self.peek() == Some(&Tok::Or) {
            self.at += 1;
            let right = self.conj()?;
            left = Formula::or(left, right);
        }
        Ok(left)
    }

    fn conj(&mut self) -> Result<Formula, MuError> {
        let mut left = self.unary()?;
        while self.peek() == Some(&Tok::And) {
            self.at += 1;
            let right = self.unary()?;
            left = Formula::and(left, right);
        }
        Ok(left)
    }

    fn unary(&mut self) -> Result<Formula, MuError> {
        match self.peek().cloned() {
            Some(Tok::Not) => {
                self.at += 1;
                match self.peek().cloned() {
                    Some(Tok::Ident(p)) => {
                        self.at += 1;
                        if self.bound.contains(&p) {
                            return Err(MuError::NegativeBoundVariable(p));
                        }
                        Ok(Formula::NegProp(p))
                    }
                    _ => self.fail("negation applies to propositions only"),
                }
            }
            Some(Tok::Dia) => {
                self.at += 1;
                Ok(Formula::diamond(self.unary()?))
            }
            Some(Tok::Box) => {
                self.at += 1;
                Ok(Formula::boxed(self.unary()?))
            }
            Some(Tok::Mu) | Some(Tok::Nu) => self.binder(),
            Some(Tok::True) => {
                self.at += 1;
                Ok(Formula::Top)
            }
            Some(Tok::False) => {
                self.at += 1;
                Ok(Formula::Bot)
            }
            Some(Tok::Ident(p)) => {
                self.at += 1;
                if self.bound.contains(&p) {
                    Ok(Formula::Var(p))
                } else {
                    Ok(Formula::Prop(p))
                }
            }
            Some(Tok::LParen) => {
                self.at += 1;
                let inner = self.expr()?;
                self.expect(Tok::RParen, "expected )")?;
                Ok(inner)
            }
            _ => self.fail("expected a formula"),
        }
    }

    fn binder(&mut self) -> Result<Formula, MuError> {
        let kind = if self.peek() == Some(&Tok::Mu) {
            FixKind::Mu
        } else {
            FixKind::Nu
        };
        self.at += 1;
        let x = match self.peek().cloned() {
            Some(Tok::Ident(x)) => x,
            _ => return self.fail("expected a variable after the binder"),
        };
        if !self.shadowing && self.bound.contains(&x) {
            return Err(MuError::ShadowedVariable(x));
        }
        self.at += 1;
        self.expect(Tok::Dot, "expected .")?;
        self.bound.push(x.clone());
        let body = self.expr();
        self.bound.pop();
        Ok(Formula::Fix(kind, x, Box::new(body?)))
    }
}

/// Concrete syntax: `true false p ~p & | <> [] mu x. nu x.` with precedence
/// negation > modalities > `&` > `|`; binder bodies extend to the right.
pub fn parse_formula(text: &str) -> Result<Formula, MuError> {
    parse_with(text, false)
}

/// As [`parse_formula`], but an inner binder may reuse a bound name. Closure
/// members such as unfoldings print this way.
pub fn parse_closure_member(text: &str) -> Result<Formula, MuError> {
    parse_with(text, true)
}

fn parse_with(text: &str, shadowing: bool) -> Result<Formula, MuError> {
    let mut p = Parser {
        toks: lex(text)?,
        at: 0,
        end: text.len(),
        bound: Vec::new(),
        shadowing,
    };
    let f = p.expr()?;
    if p.at != p.toks.len() {
        return p.fail("trailing input");
    }
    Ok(f)
}

/// `Clos(Φ)` with its edge relation, the dependency order and Ω.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClosureTable {
    pub roots: Sequent,
    pub members: BTreeSet<Formula>,
    pub edges: BTreeMap<Formula, Vec<Formula>>,
    pub fix: Vec<Formula>,
    pub omega: BTreeMap<Formula, u32>,
    pub max_even: Option<u32>,
    less: BTreeSet<(usize, usize)>,
}

impl ClosureTable {
    pub fn omega_of(&self, f: &Formula) -> Option<u32> {
        self.omega.get(f).copied()
    }

    pub fn contains(&self, f: &Formula) -> bool {
        self.members.contains(f)
    }

    /// `ξ <_Φ ζ`
    pub fn fix_less(&self, xi: &Formula, zeta: &Formula) -> bool {
        let i = self.fix.iter().position(|f| f == xi);
        let j = self.fix.iter().position(|f| f == zeta);
        match (i, j) {
            (Some(i), Some(j)) => self.less.contains(&(i, j)),
            _ => false,
        }
    }

    /// All pairs of the dependency order.
    pub fn fix_order(&self) -> impl Iterator<Item = (&Formula, &Formula)> + '_ {
        self.less.iter().map(|&(i, j)| (&self.fix[i], &self.fix[j]))
    }

    pub fn is_edge(&self, from: &Formula, to: &Formula) -> bool {
        self.edges.get(from).is_some_and(|s| s.contains(to))
    }
}

pub fn closure<'a>(phi: impl IntoIterator<Item = &'a Formula>) -> ClosureTable {
    let roots: Sequent = phi.into_iter().cloned().collect();
    let mut members = BTreeSet::new();
    let mut edges = BTreeMap::new();
    let mut work: Vec<Formula> = roots.iter().cloned().collect();
    while let Some(f) = work.pop() {
        if !members.insert(f.clone()) {
            continue;
        }
        let succ = f.closure_successors();
        work.extend(succ.iter().cloned());
        edges.insert(f, succ);
    }

    let index: Vec<Formula> = members.iter().cloned().collect();
    let id = |f: &Formula| index.binary_search(f).unwrap();
    let adj: Vec<Vec<usize>> = index
        .iter()
        .map(|f| edges[f].iter().map(id).collect())
        .collect();
    let comp = graph::scc_ids(&adj);

    let fix: Vec<Formula> = index.iter().filter(|f| f.is_fixpoint()).cloned().collect();
    let mut less = BTreeSet::new();
    for (i, xi) in fix.iter().enumerate() {
        for (j, zeta) in fix.iter().enumerate() {
            if i != j && comp[id(xi)] == comp[id(zeta)] && zeta.has_proper_subformula(xi) {
                less.insert((i, j));
            }
        }
    }

    // longest chain below each fixpoint; the order is acyclic since it
    // refines the proper subformula order
    let mut depth = alloc::vec![None::<u32>; fix.len()];
    fn chain(j: usize, less: &BTreeSet<(usize, usize)>, depth: &mut [Option<u32>]) -> u32 {
        if let Some(d) = depth[j] {
            return d;
        }
        let below: Vec<usize> = less.iter().filter(|p| p.1 == j).map(|p| p.0).collect();
        let d = below.into_iter().map(|i| chain(i, less, depth) + 1).max().unwrap_or(0);
        depth[j] = Some(d);
        d
    }
    let mut omega = BTreeMap::new();
    for (j, f) in fix.iter().enumerate() {
        let d = 2 * chain(j, &less, &mut depth);
        let want_even = f.fix_kind() == Some(FixKind::Nu);
        omega.insert(f.clone(), if want_even == d.is_multiple_of(2) { d } else { d + 1 });
    }
    let max_even = fix
        .iter()
        .filter(|f| f.fix_kind() == Some(FixKind::Nu))
        .map(|f| omega[f])
        .max();

    ClosureTable {
        roots,
        members,
        edges,
        fix,
        omega,
        max_even,
        less,
    }
}

/// Kind of the Ω-minimal fixpoint unfolded on a `→_C` cycle.
pub fn trace_classify(table: &ClosureTable, cycle: &[Formula]) -> Result<FixKind, MuError> {
    let n = cycle.len();
    for i in 0..n {
        let (a, b) = (&cycle[i], &cycle[(i + 1) % n]);
        if !a.closure_successors().contains(b) {
            return Err(MuError::NotATrace(a.to_string(), b.to_string()));
        }
    }
    cycle
        .iter()
        .filter(|f| f.is_fixpoint())
        .min_by_key(|f| table.omega_of(f).unwrap_or(u32::MAX))
        .and_then(Formula::fix_kind)
        .ok_or(MuError::NoFixpointOnCycle)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(s: &str) -> Formula {
        parse_formula(s).unwrap()
    }

    #[test]
    fn parse_examples() {
        assert_eq!(f("nu x. [] x"), Formula::nu("x", Formula::boxed(Formula::var("x"))));
        assert_eq!(f("p | ~p"), Formula::or(Formula::prop("p"), Formula::neg_prop("p")));
        assert_eq!(
            parse_formula("mu x. ~x"),
            Err(MuError::NegativeBoundVariable("x".into()))
        );
        assert!(matches!(
            parse_formula("mu x. nu x. x"),
            Err(MuError::ShadowedVariable(_))
        ));
        assert!(matches!(parse_formula("p &"), Err(MuError::Syntax { .. })));
        assert_eq!(f("νx.□x"), f("nu x. [] x"));
    }

    #[test]
    fn unfold_examples() {
        assert_eq!(f("nu x. [] x").unfold().unwrap(), f("[] nu x. [] x"));
        assert_eq!(
            f("mu x. p | <> x").unfold().unwrap(),
            f("p | <> mu x. p | <> x")
        );
        assert_eq!(f("nu x. true").unfold().unwrap(), Formula::Top);
        assert!(f("p").unfold().is_err());
    }

    #[test]
    fn closure_examples() {
        let nu = f("nu x. [] x");
        let t = closure([&nu]);
        assert_eq!(t.members, [nu.clone(), f("[] nu x. [] x")].into_iter().collect());
        assert_eq!(t.fix, alloc::vec![nu.clone()]);
        assert_eq!(t.omega_of(&nu), Some(0));
        assert_eq!(t.max_even, Some(0));

        let t = closure([&f("p | ~p")]);
        assert_eq!(t.members.len(), 3);
        assert!(t.fix.is_empty());
        assert_eq!(t.max_even, None);

        let mu = f("mu x. <> x");
        let t = closure([&mu]);
        assert_eq!(t.members.len(), 2);
        assert_eq!(t.omega_of(&mu), Some(1));
        assert_eq!(t.max_even, None);
    }

    #[test]
    fn nested_priorities() {
        let nu = f("nu y. mu x. <> x | [] y");
        let inner = nu.unfold().unwrap();
        let t = closure([&nu]);
        assert_eq!(t.omega_of(&nu), Some(0));
        assert_eq!(t.omega_of(&inner), Some(3));
        assert!(t.fix_less(&nu, &inner));

        let Formula::Fix(_, _, body) = &inner else { panic!() };
        let inner_loop = alloc::vec![
            inner.clone(),
            inner.unfold().unwrap(),
            Formula::diamond(inner.clone()),
        ];
        assert_eq!(&inner_loop[1], &body.substitute("x", &inner));
        assert_eq!(trace_classify(&t, &inner_loop), Ok(FixKind::Mu));

        let outer_loop = alloc::vec![
            nu.clone(),
            inner.clone(),
            inner.unfold().unwrap(),
            Formula::boxed(nu.clone()),
        ];
        assert_eq!(trace_classify(&t, &outer_loop), Ok(FixKind::Nu));
    }

    #[test]
    fn classify_examples() {
        let nu = f("nu x. [] x");
        let t = closure([&nu]);
        assert_eq!(
            trace_classify(&t, &[nu.clone(), nu.unfold().unwrap()]),
            Ok(FixKind::Nu)
        );
        let mu = f("mu x. <> x");
        let t = closure([&mu]);
        assert_eq!(
            trace_classify(&t, &[mu.clone(), mu.unfold().unwrap()]),
            Ok(FixKind::Mu)
        );
        assert!(trace_classify(&t, core::slice::from_ref(&mu)).is_err());
    }

    #[test]
    fn display_round_trip() {
        for s in [
            "nu x. [] x",
            "p | ~p",
            "(p | q) & r",
            "p | q & r",
            "p | (q | r)",
            "[](mu x. <>x) & true",
            "nu y. mu x. <>x | []y",
            "<>(p & q)",
        ] {
            let a = f(s);
            assert_eq!(f(&a.to_string()), a, "{s} printed as {a}");
        }
    }
}
