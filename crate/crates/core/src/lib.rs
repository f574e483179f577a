//! Binary-tree determinization of nondeterministic Büchi and parity stream
//! automata into deterministic Rabin automata, and the annotated cyclic proof
//! system for the modal μ-calculus built on top of it.
//!
//! The crate is `no_std` and only needs `alloc`.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod automata;
pub mod bitstring;
pub mod btproof;
pub mod cycleengine;
pub mod derivation;
pub mod determinize;
mod graph;
pub mod mucalc;
pub mod nwproof;
pub mod testkit;

pub use automata::{Acceptance, Lasso, RabinPair, StreamAutomaton};
pub use bitstring::{BinTree, BitString, Colour, TSeq, Treetop};
pub use mucalc::{ClosureTable, Formula, Sequent};
