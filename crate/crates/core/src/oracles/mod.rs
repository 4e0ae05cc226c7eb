//! Scripted stand-ins for the non-computable inputs.

pub mod dominator;
pub mod enumeration;
pub mod guesser;
pub mod sets;
pub mod tree;

use std::collections::HashMap;
use std::fmt;

pub use dominator::{DominatorApprox, DominatorSpec};
pub use enumeration::{designated_indexes, true_stage_reindex, Enumeration, EnumerationState};
pub use guesser::{default_raw, Gain, GuesserSpec, NodeStats, RhoStats, StreamOverride, StreamSpec};
pub use sets::{ScriptedFamily, ScriptedSet, SetSpec};
pub use tree::{tree_slice, Extension, ScriptedTree, TreeSpec};

use crate::addr::{Mode, TreeAddress};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScriptError {
    pub section: String,
    pub message: String,
    pub line: Option<usize>,
}

impl ScriptError {
    pub fn invalid(section: &str, message: &str) -> ScriptError {
        ScriptError { section: section.to_string(), message: message.to_string(), line: None }
    }

    pub fn at_line(mut self, line: usize) -> ScriptError {
        self.line = Some(line);
        self
    }
}

impl fmt::Display for ScriptError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: [{}] {}", self.section, self.message),
            None => write!(f, "[{}] {}", self.section, self.message),
        }
    }
}

impl std::error::Error for ScriptError {}

/// Every oracle a run reads, built from a validated script.
#[derive(Clone, Debug)]
pub struct Oracles {
    pub mode: Mode,
    pub universe: u64,
    pub a: Enumeration,
    pub w: ScriptedFamily,
    pub dominator: DominatorApprox,
    pub tree: Option<ScriptedTree>,
    pub gain: Gain,
    pub overrides: HashMap<TreeAddress, StreamSpec>,
}

impl Oracles {
    pub fn override_for(&self, addr: &TreeAddress) -> Option<&StreamSpec> {
        if self.overrides.is_empty() {
            None
        } else {
            self.overrides.get(addr)
        }
    }
}
