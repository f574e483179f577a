//! Binary strings, binary trees, treetops and annotation tuples.
//!
//! The derived ordering on [`BitString`] is lexicographic with `0 < 1`, and a
//! proper prefix sorts before its extensions.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BitError {
    #[error("{prefix} is not a prefix of {string}")]
    PrefixMismatch { prefix: BitString, string: BitString },
    #[error("leaf set does not induce a binary tree")]
    NotATreetop,
    #[error("tree is empty")]
    EmptyTree,
    #[error("annotations have {0} and {1} components")]
    IndexMismatch(usize, usize),
    #[error("invalid bit string {0:?}")]
    Parse(String),
}

/// A finite word over `{0,1}`. `false` is the bit 0.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct BitString(Vec<bool>);

impl BitString {
    pub const fn empty() -> Self {
        BitString(Vec::new())
    }

    pub fn from_bits(bits: impl IntoIterator<Item = bool>) -> Self {
        BitString(bits.into_iter().collect())
    }

    /// `0^n`
    pub fn zeros(n: usize) -> Self {
        BitString(alloc::vec![false; n])
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn push(&mut self, bit: bool) {
        self.0.push(bit);
    }

    /// `self · bit`
    pub fn child(&self, bit: bool) -> BitString {
        let mut out = self.clone();
        out.0.push(bit);
        out
    }

    pub fn parent(&self) -> Option<BitString> {
        if self.0.is_empty() {
            return None;
        }
        Some(BitString(self.0[..self.0.len() - 1].to_vec()))
    }

    pub fn last(&self) -> Option<bool> {
        self.0.last().copied()
    }

    pub fn is_prefix_of(&self, other: &BitString) -> bool {
        other.0.starts_with(&self.0)
    }

    pub fn is_strict_prefix_of(&self, other: &BitString) -> bool {
        self.0.len() < other.0.len() && self.is_prefix_of(other)
    }

    /// True for `0^j`, including ε.
    pub fn is_all_zeros(&self) -> bool {
        self.0.iter().all(|b| !b)
    }

    /// All prefixes from ε up to and including `self`.
    pub fn prefixes(&self) -> impl Iterator<Item = BitString> + '_ {
        (0..=self.0.len()).map(move |i| BitString(self.0[..i].to_vec()))
    }

    /// `s[t := r]`: replaces the prefix `t` of `self` by `r`.
    pub fn substitute(&self, t: &BitString, r: &BitString) -> Result<BitString, BitError> {
        if !t.is_prefix_of(self) {
            return Err(BitError::PrefixMismatch {
                prefix: t.clone(),
                string: self.clone(),
            });
        }
        let mut out = r.0.clone();
        out.extend_from_slice(&self.0[t.len()..]);
        Ok(BitString(out))
    }

    /// ASCII rendering with ε as the empty string.
    pub fn to_bits(&self) -> String {
        self.0.iter().map(|&b| if b { '1' } else { '0' }).collect()
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("ε");
        }
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for BitString {
    type Err = BitError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "ε" {
            return Ok(BitString::empty());
        }
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(BitError::Parse(s.into())),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(BitString)
    }
}

pub fn lex_less(s: &BitString, t: &BitString) -> bool {
    s < t
}

pub fn is_prefix(s: &BitString, t: &BitString) -> bool {
    s.is_prefix_of(t)
}

pub fn prefix_closure<'a>(strings: impl IntoIterator<Item = &'a BitString>) -> BTreeSet<BitString> {
    let mut out = BTreeSet::new();
    for s in strings {
        for p in s.prefixes() {
            out.insert(p);
        }
    }
    out
}

/// Prefix closure plus the all-zeros sibling `0^j0` of every all-zeros node
/// whose 1-child is present.
pub fn patched_closure<'a>(strings: impl IntoIterator<Item = &'a BitString>) -> BTreeSet<BitString> {
    let mut out = prefix_closure(strings);
    let patches: Vec<BitString> = out
        .iter()
        .filter(|s| s.last() == Some(true) && s.parent().is_some_and(|p| p.is_all_zeros()))
        .map(|s| s.parent().unwrap().child(false))
        .collect();
    out.extend(patches);
    out
}

/// Every non-root node has its parent and its sibling.
pub fn is_binary_tree(nodes: &BTreeSet<BitString>) -> bool {
    nodes.iter().all(|s| match s.parent() {
        None => true,
        Some(p) => {
            let sibling = p.child(!s.last().unwrap());
            nodes.contains(&p) && nodes.contains(&sibling)
        }
    })
}

fn pairwise_non_prefix(leaves: &BTreeSet<BitString>) -> bool {
    // under the derived order a string's extensions follow it directly
    leaves
        .iter()
        .zip(leaves.iter().skip(1))
        .all(|(a, b)| !a.is_prefix_of(b))
}

/// A finite binary tree given by its node set.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct BinTree(BTreeSet<BitString>);

impl BinTree {
    pub fn from_nodes(nodes: BTreeSet<BitString>) -> Result<Self, BitError> {
        if !is_binary_tree(&nodes) {
            return Err(BitError::NotATreetop);
        }
        Ok(BinTree(nodes))
    }

    pub fn nodes(&self) -> &BTreeSet<BitString> {
        &self.0
    }

    pub fn contains(&self, s: &BitString) -> bool {
        self.0.contains(s)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn leaves(&self) -> impl Iterator<Item = &BitString> + '_ {
        self.0.iter().filter(|s| !self.0.contains(&s.child(false)))
    }

    pub fn min_leaf(&self) -> Result<BitString, BitError> {
        min_leaf_of(&self.0).ok_or(BitError::EmptyTree)
    }
}

/// The all-zeros leaf of a node set, if the set is nonempty.
pub fn min_leaf_of(nodes: &BTreeSet<BitString>) -> Option<BitString> {
    if nodes.is_empty() {
        return None;
    }
    let mut s = BitString::empty();
    while nodes.contains(&s.child(false)) {
        s.push(false);
    }
    Some(s)
}

/// Leaves of a binary tree, where the all-zeros leaf may be missing.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Treetop(BTreeSet<BitString>);

impl Treetop {
    pub fn new(leaves: BTreeSet<BitString>) -> Result<Self, BitError> {
        if !pairwise_non_prefix(&leaves) || !is_binary_tree(&patched_closure(&leaves)) {
            return Err(BitError::NotATreetop);
        }
        Ok(Treetop(leaves))
    }

    pub fn leaves(&self) -> &BTreeSet<BitString> {
        &self.0
    }
}

pub fn tree_of(l: &Treetop) -> Result<BinTree, BitError> {
    BinTree::from_nodes(patched_closure(&l.0))
}

pub fn min_leaf(t: &BinTree) -> Result<BitString, BitError> {
    t.min_leaf()
}

/// An annotation `(s_0, s_2, ..., s_m)`; component `i` sits at position `2i`.
/// The derived order is the block-lexicographic order on annotations.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct TSeq(Vec<BitString>);

impl TSeq {
    /// `(ε, ..., ε)` for the given maximal even position.
    pub fn epsilons(m: Option<u32>) -> Self {
        TSeq(alloc::vec![BitString::empty(); width(m)])
    }

    pub fn from_components(components: Vec<BitString>) -> Self {
        TSeq(components)
    }

    pub fn components(&self) -> &[BitString] {
        &self.0
    }

    pub fn components_mut(&mut self) -> &mut [BitString] {
        &mut self.0
    }

    pub fn width(&self) -> usize {
        self.0.len()
    }

    /// `π_k`
    pub fn at(&self, k: u32) -> &BitString {
        &self.0[(k / 2) as usize]
    }

    pub fn at_mut(&mut self, k: u32) -> &mut BitString {
        &mut self.0[(k / 2) as usize]
    }
}

impl fmt::Display for TSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, s) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{s}")?;
        }
        f.write_str(")")
    }
}

impl fmt::Debug for TSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Number of annotation components for maximal even position `m`.
pub fn width(m: Option<u32>) -> usize {
    m.map_or(0, |m| (m / 2 + 1) as usize)
}

/// The even positions `0, 2, ..., m`.
pub fn positions(m: Option<u32>) -> impl Iterator<Item = u32> + Clone {
    (0..width(m) as u32).map(|i| 2 * i)
}

pub fn tseq_less(sigma: &TSeq, tau: &TSeq) -> Result<bool, BitError> {
    if sigma.width() != tau.width() {
        return Err(BitError::IndexMismatch(sigma.width(), tau.width()));
    }
    Ok(sigma < tau)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub enum Colour {
    #[default]
    White,
    Green,
    Red,
}

impl fmt::Display for Colour {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Colour::White => "white",
            Colour::Green => "green",
            Colour::Red => "red",
        })
    }
}
