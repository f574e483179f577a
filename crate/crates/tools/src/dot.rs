//! Graphviz output for automata and for proofs with their back-edges.

use std::fmt::Write as _;

use treedet_core::automata::Acceptance;
use treedet_core::btproof::{fmt_annotated, BtDerivation};
use treedet_core::derivation::{Derivation, Label, Node};
use treedet_core::nwproof::{fmt_sequent, NwDerivation};
use treedet_core::StreamAutomaton;

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

pub fn automaton_dot(a: &StreamAutomaton) -> String {
    let mut out = String::from("digraph automaton {\n  rankdir=LR;\n  start [shape=point];\n");
    for (q, name) in a.state_names().iter().enumerate() {
        let extra = match a.acceptance() {
            Acceptance::Buchi(f) if f.contains(&q) => ", peripheries=2".to_string(),
            Acceptance::Parity(p) => format!(", xlabel=\"{}\"", p[q]),
            _ => String::new(),
        };
        writeln!(out, "  s{q} [label=\"{}\"{extra}];", escape(name)).unwrap();
    }
    writeln!(out, "  start -> s{};", a.initial()).unwrap();
    for (q, y, r) in a.transitions() {
        writeln!(out, "  s{q} -> s{r} [label=\"{}\"];", escape(&a.letter_names()[y])).unwrap();
    }
    out.push_str("}\n");
    out
}

fn derivation_dot<S, R, P>(
    d: &Derivation<S, R, P>,
    sequent: impl Fn(&S) -> String,
    rule: impl Fn(&R) -> String,
    highlight: impl Fn(&Node<S, R, P>) -> bool,
) -> String {
    let mut out = String::from("digraph proof {\n  node [shape=box, fontname=monospace];\n");
    for (v, n) in d.nodes().iter().enumerate() {
        let tag = match &n.label {
            Label::Rule(r) => rule(r),
            Label::Discharge(t) => format!("[{t}]"),
            Label::Leaf(t) => t.clone(),
        };
        let fill = if highlight(n) { ", style=filled, fillcolor=lightgreen" } else { "" };
        writeln!(out, "  n{v} [label=\"{}\\n{}\"{fill}];", escape(&sequent(&n.sequent)), escape(&tag)).unwrap();
    }
    for (v, n) in d.nodes().iter().enumerate() {
        for &c in &n.children {
            writeln!(out, "  n{v} -> n{c} [dir=back];").unwrap();
        }
    }
    for (leaf, companion) in d.discharged_leaves() {
        writeln!(out, "  n{leaf} -> n{companion} [style=dashed, constraint=false];").unwrap();
    }
    out.push_str("}\n");
    out
}

pub fn nw_dot(d: &NwDerivation) -> String {
    derivation_dot(d, fmt_sequent, |r| r.to_string(), |_| false)
}

/// Compress nodes, the only progress points, are filled.
pub fn bt_dot(d: &BtDerivation) -> String {
    derivation_dot(d, fmt_annotated, |r| r.to_string(), |n| {
        matches!(&n.label, Label::Rule(r) if r.is_progress())
    })
}
