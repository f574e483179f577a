//! Text format for stream automata.
//!
//! ```text
//! # Büchi automaton with an accepting loop through q1
//! states: q0 q1 q2
//! alphabet: a
//! initial: q0
//! deterministic: no
//! acceptance: buchi F=q1
//! transitions:
//!   q0 a q1
//!   q1 a q1
//!   q1 a q2
//!   q2 a q1
//! ```
//!
//! Acceptance is `buchi F=q,q'`, `parity q:1 q':0` or `rabin (G;B) ...`
//! with comma separated state lists inside each pair.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use treedet_core::automata::{Acceptance, RabinPair};
use treedet_core::{Lasso, StreamAutomaton};

use crate::ToolError;

fn err(line: usize, msg: impl Into<String>) -> ToolError {
    ToolError::Format {
        line,
        msg: msg.into(),
    }
}

enum RawAcc {
    Buchi(Vec<String>),
    Parity(Vec<(String, u32)>),
    Rabin(Vec<(Vec<String>, Vec<String>)>),
}

fn list(s: &str) -> Vec<String> {
    s.split(',').map(str::trim).filter(|w| !w.is_empty()).map(String::from).collect()
}

fn parse_acceptance(ln: usize, v: &str) -> Result<RawAcc, ToolError> {
    let (kind, rest) = v.split_once(char::is_whitespace).unwrap_or((v, ""));
    let rest = rest.trim();
    match kind {
        "buchi" => {
            let f = rest.strip_prefix("F=").ok_or_else(|| err(ln, "expected F=..."))?;
            Ok(RawAcc::Buchi(list(f)))
        }
        "parity" => rest
            .split_whitespace()
            .map(|w| {
                let (q, p) = w.split_once(':').ok_or_else(|| err(ln, "expected state:priority"))?;
                let p = p.parse().map_err(|_| err(ln, format!("bad priority {p}")))?;
                Ok((q.to_string(), p))
            })
            .collect::<Result<_, _>>()
            .map(RawAcc::Parity),
        "rabin" => {
            let mut pairs = Vec::new();
            let mut s = rest;
            while !s.is_empty() {
                let body = s.strip_prefix('(').ok_or_else(|| err(ln, "expected '(' to open a pair"))?;
                let close = body.find(')').ok_or_else(|| err(ln, "unclosed pair"))?;
                let (g, b) = body[..close].split_once(';').ok_or_else(|| err(ln, "pair needs ';'"))?;
                pairs.push((list(g), list(b)));
                s = body[close + 1..].trim_start();
            }
            Ok(RawAcc::Rabin(pairs))
        }
        _ => Err(err(ln, format!("unknown acceptance '{kind}'"))),
    }
}

pub fn parse_automaton(text: &str) -> Result<StreamAutomaton, ToolError> {
    let mut states: Option<Vec<String>> = None;
    let mut letters: Option<Vec<String>> = None;
    let mut initial: Option<(usize, String)> = None;
    let mut acc: Option<(usize, RawAcc)> = None;
    let mut deterministic = false;
    let mut edges: Vec<(usize, String, String, String)> = Vec::new();
    let mut in_transitions = false;

    for (i, raw) in text.lines().enumerate() {
        let ln = i + 1;
        let line = raw.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once(':').filter(|(k, _)| !k.contains(char::is_whitespace)) else {
            if !in_transitions {
                return Err(err(ln, format!("cannot read '{line}'")));
            }
            let w: Vec<&str> = line.split_whitespace().collect();
            if w.len() != 3 {
                return Err(err(ln, "a transition is 'src letter dst'"));
            }
            edges.push((ln, w[0].into(), w[1].into(), w[2].into()));
            continue;
        };
        let value = value.trim();
        in_transitions = false;
        let words = || value.split_whitespace().map(String::from).collect::<Vec<_>>();
        match key {
            "states" => states = Some(words()),
            "alphabet" => letters = Some(words()),
            "initial" => initial = Some((ln, value.to_string())),
            "deterministic" => {
                deterministic = match value {
                    "yes" => true,
                    "no" => false,
                    _ => return Err(err(ln, "deterministic is yes or no")),
                }
            }
            "acceptance" => acc = Some((ln, parse_acceptance(ln, value)?)),
            "transitions" => {
                if !value.is_empty() {
                    return Err(err(ln, "transitions are listed on the following lines"));
                }
                in_transitions = true;
            }
            _ => return Err(err(ln, format!("unknown field '{key}'"))),
        }
    }

    let states = states.ok_or_else(|| err(0, "missing states"))?;
    let letters = letters.ok_or_else(|| err(0, "missing alphabet"))?;
    let state = |ln: usize, q: &str| {
        states
            .iter()
            .position(|s| s == q)
            .ok_or_else(|| err(ln, format!("unknown state {q}")))
    };
    let (iln, iname) = initial.ok_or_else(|| err(0, "missing initial"))?;
    let init = state(iln, &iname)?;
    let mut trans = Vec::new();
    for (ln, src, y, dst) in &edges {
        let yi = letters
            .iter()
            .position(|l| l == y)
            .ok_or_else(|| err(*ln, format!("unknown letter {y}")))?;
        trans.push((state(*ln, src)?, yi, state(*ln, dst)?));
    }
    let set = |ln: usize, names: &[String]| -> Result<BTreeSet<usize>, ToolError> {
        names.iter().map(|q| state(ln, q)).collect()
    };
    let (aln, acc) = acc.ok_or_else(|| err(0, "missing acceptance"))?;
    let acceptance = match acc {
        RawAcc::Buchi(f) => Acceptance::Buchi(set(aln, &f)?),
        RawAcc::Parity(pri) => {
            let mut out = vec![None; states.len()];
            for (q, p) in pri {
                out[state(aln, &q)?] = Some(p);
            }
            let out: Option<Vec<u32>> = out.into_iter().collect();
            Acceptance::Parity(out.ok_or_else(|| err(aln, "every state needs a priority"))?)
        }
        RawAcc::Rabin(pairs) => Acceptance::Rabin(
            pairs
                .iter()
                .map(|(g, b)| {
                    Ok(RabinPair {
                        good: set(aln, g)?,
                        bad: set(aln, b)?,
                    })
                })
                .collect::<Result<_, ToolError>>()?,
        ),
    };
    Ok(StreamAutomaton::new(states, letters, init, trans, acceptance, deterministic)?)
}

/// Canonical rendering; parsing it gives back an equal automaton.
pub fn write_automaton(a: &StreamAutomaton) -> String {
    let names = a.state_names();
    let join = |ids: &BTreeSet<usize>| ids.iter().map(|&q| names[q].as_str()).collect::<Vec<_>>().join(",");
    let mut out = String::new();
    writeln!(out, "states: {}", names.join(" ")).unwrap();
    writeln!(out, "alphabet: {}", a.letter_names().join(" ")).unwrap();
    writeln!(out, "initial: {}", names[a.initial()]).unwrap();
    writeln!(out, "deterministic: {}", if a.is_deterministic() { "yes" } else { "no" }).unwrap();
    match a.acceptance() {
        Acceptance::Buchi(f) => writeln!(out, "acceptance: buchi F={}", join(f)).unwrap(),
        Acceptance::Parity(p) => {
            let items: Vec<String> = p.iter().enumerate().map(|(q, k)| format!("{}:{k}", names[q])).collect();
            writeln!(out, "acceptance: parity {}", items.join(" ")).unwrap();
        }
        Acceptance::Rabin(pairs) => {
            let items: Vec<String> = pairs.iter().map(|p| format!("({};{})", join(&p.good), join(&p.bad))).collect();
            writeln!(out, "acceptance: rabin {}", items.join(" ")).unwrap();
        }
    }
    out.push_str("transitions:\n");
    for (q, y, r) in a.transitions() {
        writeln!(out, "  {} {} {}", names[q], a.letter_names()[y], names[r]).unwrap();
    }
    out
}

/// `a b (c d)`: stem letters followed by the loop in parentheses.
pub fn parse_word(a: &StreamAutomaton, text: &str) -> Result<Lasso, ToolError> {
    let bad = |m: &str| ToolError::Usage(format!("word '{text}': {m}"));
    let open = text.find('(').ok_or_else(|| bad("the loop must be given in parentheses"))?;
    let close = text.rfind(')').filter(|&c| c > open).ok_or_else(|| bad("unclosed loop"))?;
    if !text[close + 1..].trim().is_empty() {
        return Err(bad("text after the loop"));
    }
    let letters = |s: &str| -> Result<Vec<usize>, ToolError> {
        s.split_whitespace()
            .map(|l| a.letter_index(l).ok_or_else(|| bad(&format!("unknown letter {l}"))))
            .collect()
    };
    let stem = letters(&text[..open])?;
    let cycle = letters(&text[open + 1..close])?;
    Ok(Lasso::new(stem, cycle)?)
}

pub fn write_word(a: &StreamAutomaton, w: &Lasso) -> String {
    let l = |ys: &[usize]| {
        ys.iter()
            .map(|&y| a.letter_names()[y].as_str())
            .collect::<Vec<_>>()
            .join(" ")
    };
    if w.stem.is_empty() {
        format!("({})", l(&w.cycle))
    } else {
        format!("{} ({})", l(&w.stem), l(&w.cycle))
    }
}
