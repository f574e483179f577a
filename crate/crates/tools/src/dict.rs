//! Plain-text listing of the macrostates behind a determinized automaton.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use treedet_core::automata::{Acceptance, RabinPair};
use treedet_core::determinize::{Determinized, Macrostate, ParityMacrostate};
use treedet_core::{BitString, Colour, StreamAutomaton};

fn tree_line(colours: &BTreeMap<BitString, Colour>) -> String {
    colours
        .iter()
        .map(|(s, c)| format!("{s}:{c}"))
        .collect::<Vec<_>>()
        .join(" ")
}

fn tail(out: &mut String, src: &StreamAutomaton, d: &StreamAutomaton, labels: &[String]) {
    out.push_str("transitions\n");
    for (q, y, r) in d.transitions() {
        writeln!(out, "  {} {} -> {}", d.state_names()[q], src.letter_names()[y], d.state_names()[r]).unwrap();
    }
    out.push_str("pairs\n");
    let Acceptance::Rabin(pairs) = d.acceptance() else {
        unreachable!("determinized automata carry Rabin pairs")
    };
    let names = |p: &RabinPair, good: bool| {
        let set = if good { &p.good } else { &p.bad };
        set.iter().map(|&q| d.state_names()[q].as_str()).collect::<Vec<_>>().join(" ")
    };
    for (label, p) in labels.iter().zip(pairs) {
        writeln!(out, "  {label} good [{}] bad [{}]", names(p, true), names(p, false)).unwrap();
    }
}

pub fn buchi_dictionary(src: &StreamAutomaton, d: &Determinized<Macrostate<usize>, BitString>) -> String {
    let mut out = String::new();
    for (i, m) in d.macrostates.iter().enumerate() {
        writeln!(out, "{}", d.automaton.state_names()[i]).unwrap();
        for (q, s) in &m.f {
            writeln!(out, "  {} -> {s}", src.state_names()[*q]).unwrap();
        }
        writeln!(out, "  tree {}", tree_line(&m.colours)).unwrap();
    }
    let labels: Vec<String> = d.pairs.iter().map(|s| s.to_string()).collect();
    tail(&mut out, src, &d.automaton, &labels);
    out
}

pub fn parity_dictionary(
    src: &StreamAutomaton,
    d: &Determinized<ParityMacrostate<usize>, (u32, BitString)>,
) -> String {
    let mut out = String::new();
    for (i, m) in d.macrostates.iter().enumerate() {
        writeln!(out, "{}", d.automaton.state_names()[i]).unwrap();
        for (q, s) in &m.f {
            writeln!(out, "  {} -> {s}", src.state_names()[*q]).unwrap();
        }
        for (k, c) in m.colours.iter().enumerate() {
            writeln!(out, "  tree{} {}", 2 * k, tree_line(c)).unwrap();
        }
    }
    let labels: Vec<String> = d.pairs.iter().map(|(k, s)| format!("{k}:{s}")).collect();
    tail(&mut out, src, &d.automaton, &labels);
    out
}
