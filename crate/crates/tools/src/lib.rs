//! File formats, renderers and helpers behind the `treedet` command.

pub mod autfmt;
pub mod compare;
pub mod dict;
pub mod dot;
pub mod prooffmt;

use treedet_core::automata::AutomatonError;
use treedet_core::btproof::BtError;
use treedet_core::derivation::DerivationError;
use treedet_core::determinize::DetError;
use treedet_core::mucalc::MuError;
use treedet_core::nwproof::NwError;

#[derive(Debug, thiserror::Error)]
pub enum ToolError {
    #[error("line {line}: {msg}")]
    Format { line: usize, msg: String },
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("proof file: {0}")]
    Proof(String),
    #[error(transparent)]
    Automaton(#[from] AutomatonError),
    #[error(transparent)]
    Det(#[from] DetError),
    #[error(transparent)]
    Formula(#[from] MuError),
    #[error(transparent)]
    Derivation(#[from] DerivationError),
    #[error(transparent)]
    Nw(#[from] NwError),
    #[error(transparent)]
    Bt(#[from] BtError),
}

pub fn read_file(path: &str) -> Result<String, ToolError> {
    std::fs::read_to_string(path).map_err(|source| ToolError::Io {
        path: path.into(),
        source,
    })
}

pub fn write_file(path: &str, text: &str) -> Result<(), ToolError> {
    std::fs::write(path, text).map_err(|source| ToolError::Io {
        path: path.into(),
        source,
    })
}
