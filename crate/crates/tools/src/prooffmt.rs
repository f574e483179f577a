//! JSON proof files. Each node is an object with a `sequent`, and either a
//! `rule` with optional `principal` and `children`, a `discharge` token with
//! one child, or a `companion-of` token marking a discharged leaf.
//!
//! Annotated proofs list sequent members as `{"formula", "annotation"}`
//! objects and write Compress as `"rule": "compress"` with `k` and `pattern`.

use serde::{Deserialize, Serialize};
use treedet_core::btproof::{Annotated, AnnotatedSequent, BtDerivation, BtRule};
use treedet_core::derivation::{Label, Node};
use treedet_core::mucalc::parse_closure_member;
use treedet_core::nwproof::{NwDerivation, NwRule};
use treedet_core::{BitString, Formula, Sequent, TSeq};

use crate::ToolError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotatedJson {
    pub formula: String,
    pub annotation: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Member {
    Plain(String),
    Annotated(AnnotatedJson),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeJson {
    pub sequent: Vec<Member>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rule: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pattern: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub principal: Option<Member>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub discharge: Option<String>,
    #[serde(default, rename = "companion-of", skip_serializing_if = "Option::is_none")]
    pub companion_of: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<NodeJson>,
}

fn bad(msg: impl Into<String>) -> ToolError {
    ToolError::Proof(msg.into())
}

fn formula(s: &str) -> Result<Formula, ToolError> {
    parse_closure_member(s).map_err(|e| bad(format!("formula '{s}': {e}")))
}

fn plain(m: &Member) -> Result<Formula, ToolError> {
    match m {
        Member::Plain(s) => formula(s),
        Member::Annotated(_) => Err(bad("annotations are not allowed here")),
    }
}

fn annotated(m: &Member) -> Result<Annotated, ToolError> {
    match m {
        Member::Annotated(a) => {
            let comps: Result<Vec<BitString>, _> = a.annotation.iter().map(|s| s.parse()).collect();
            let comps = comps.map_err(|_| bad(format!("bad annotation {:?}", a.annotation)))?;
            Ok((formula(&a.formula)?, TSeq::from_components(comps)))
        }
        Member::Plain(s) => Err(bad(format!("'{s}' lacks an annotation"))),
    }
}

fn flatten<S, R, P>(
    root: &NodeJson,
    mut conv: impl FnMut(&NodeJson) -> Result<(S, Option<R>, Option<P>), ToolError>,
) -> Result<Vec<Node<S, R, P>>, ToolError> {
    let mut nodes: Vec<Node<S, R, P>> = Vec::new();
    let mut work: Vec<(&NodeJson, Option<usize>)> = vec![(root, None)];
    let mut pending: Vec<(&NodeJson, Option<usize>)> = Vec::new();
    // preorder, children in file order
    while let Some((j, parent)) = work.pop() {
        let id = nodes.len();
        let (sequent, rule, principal) = conv(j)?;
        let label = match (&j.discharge, &j.companion_of, rule) {
            (Some(t), None, None) => {
                if j.children.len() != 1 {
                    return Err(bad(format!("discharge {t} needs exactly one child")));
                }
                Label::Discharge(t.clone())
            }
            (None, Some(t), None) => {
                if !j.children.is_empty() {
                    return Err(bad(format!("leaf discharged by {t} has children")));
                }
                Label::Leaf(t.clone())
            }
            (None, None, Some(r)) => Label::Rule(r),
            _ => return Err(bad("a node needs exactly one of rule, discharge, companion-of")),
        };
        nodes.push(Node {
            sequent,
            label,
            principal,
            children: Vec::new(),
        });
        if let Some(p) = parent {
            nodes[p].children.push(id);
        }
        pending.clear();
        pending.extend(j.children.iter().map(|c| (c, Some(id))));
        work.extend(pending.drain(..).rev());
    }
    Ok(nodes)
}

pub fn nw_from_json(root: &NodeJson) -> Result<NwDerivation, ToolError> {
    let nodes = flatten(root, |j| {
        let sequent: Sequent = j.sequent.iter().map(plain).collect::<Result<_, _>>()?;
        let rule = match &j.rule {
            Some(r) => Some(r.parse::<NwRule>().map_err(|_| bad(format!("unknown rule {r}")))?),
            None => None,
        };
        let principal = j.principal.as_ref().map(plain).transpose()?;
        Ok((sequent, rule, principal))
    })?;
    Ok(NwDerivation::new(nodes)?)
}

pub fn bt_from_json(root: &NodeJson) -> Result<BtDerivation, ToolError> {
    let nodes = flatten(root, |j| {
        let sequent: AnnotatedSequent = j.sequent.iter().map(annotated).collect::<Result<_, _>>()?;
        let rule = match j.rule.as_deref() {
            Some("compress") => {
                let k = j.k.ok_or_else(|| bad("compress needs k"))?;
                let p = j.pattern.as_deref().ok_or_else(|| bad("compress needs a pattern"))?;
                let pattern = p.parse().map_err(|_| bad(format!("bad pattern {p}")))?;
                Some(BtRule::Compress { k, pattern })
            }
            Some(r) => Some(r.parse::<BtRule>().map_err(|_| bad(format!("unknown rule {r}")))?),
            None => None,
        };
        let principal = j.principal.as_ref().map(annotated).transpose()?;
        Ok((sequent, rule, principal))
    })?;
    Ok(BtDerivation::new(nodes)?)
}

fn unflatten<S, R, P>(
    nodes: &[Node<S, R, P>],
    v: usize,
    conv: &dyn Fn(&Node<S, R, P>) -> NodeJson,
) -> NodeJson {
    let mut j = conv(&nodes[v]);
    match &nodes[v].label {
        Label::Discharge(t) => j.discharge = Some(t.clone()),
        Label::Leaf(t) => j.companion_of = Some(t.clone()),
        Label::Rule(_) => {}
    }
    j.children = nodes[v].children.iter().map(|&c| unflatten(nodes, c, conv)).collect();
    j
}

fn empty(sequent: Vec<Member>) -> NodeJson {
    NodeJson {
        sequent,
        rule: None,
        k: None,
        pattern: None,
        principal: None,
        discharge: None,
        companion_of: None,
        children: Vec::new(),
    }
}

pub fn nw_to_json(d: &NwDerivation) -> NodeJson {
    unflatten(d.nodes(), 0, &|n| {
        let mut j = empty(n.sequent.iter().map(|f| Member::Plain(f.to_string())).collect());
        if let Label::Rule(r) = &n.label {
            j.rule = Some(r.to_string());
            j.principal = n.principal.as_ref().map(|f| Member::Plain(f.to_string()));
        }
        j
    })
}

fn member(a: &Annotated) -> Member {
    Member::Annotated(AnnotatedJson {
        formula: a.0.to_string(),
        annotation: a.1.components().iter().map(|s| s.to_bits()).collect(),
    })
}

pub fn bt_to_json(d: &BtDerivation) -> NodeJson {
    unflatten(d.nodes(), 0, &|n| {
        let mut j = empty(n.sequent.iter().map(member).collect());
        match &n.label {
            Label::Rule(BtRule::Compress { k, pattern }) => {
                j.rule = Some("compress".into());
                j.k = Some(*k);
                j.pattern = Some(pattern.to_bits());
            }
            Label::Rule(r) => {
                j.rule = Some(r.to_string());
                j.principal = n.principal.as_ref().map(member);
            }
            _ => {}
        }
        j
    })
}

pub fn read_json(text: &str) -> Result<NodeJson, ToolError> {
    serde_json::from_str(text).map_err(|e| bad(format!("json: {e}")))
}

pub fn write_json(j: &NodeJson) -> String {
    let mut s = serde_json::to_string_pretty(j).expect("proof nodes serialize");
    s.push('\n');
    s
}
