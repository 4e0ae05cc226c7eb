use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::ScriptError;
use crate::label::{Label, LabelSet, MAX_SET_WIDTH};

/// How an explicit tree continues below its listed depth.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Extension {
    /// Members at the listed depth have both children, forever.
    #[default]
    Full,
    /// Members at the listed depth continue along zeros only.
    Leftmost,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TreeSpec {
    /// Every bit string.
    Full { depth: usize },
    /// Prefixes of `000...`.
    Branch { depth: usize },
    /// Prefixes of `000...` together with every string starting with `1`.
    Mix { depth: usize },
    /// Listed members (strings, `_` for the empty string) up to `depth`, continued by `extend`.
    Explicit {
        depth: usize,
        members: Vec<String>,
        #[serde(default)]
        extend: Extension,
    },
}

/// A scripted downward-closed tree of bit strings, known up to a finite depth.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScriptedTree {
    depth: usize,
    members: BTreeSet<Label>,
}

type Pred = Box<dyn Fn(&Label) -> bool>;

impl ScriptedTree {
    pub fn from_spec(spec: &TreeSpec) -> Result<ScriptedTree, ScriptError> {
        let (depth, pred): (usize, Pred) = match spec {
            TreeSpec::Full { depth } => (*depth, Box::new(|_| true)),
            TreeSpec::Branch { depth } => (*depth, Box::new(|l: &Label| l.code() == 0)),
            TreeSpec::Mix { depth } => (*depth, Box::new(|l: &Label| l.is_empty() || l.code() == 0 || l.bit(0) == 1)),
            TreeSpec::Explicit { depth, members, extend } => {
                let mut listed = BTreeSet::new();
                for (i, m) in members.iter().enumerate() {
                    let l = Label::parse(m)
                        .ok_or_else(|| ScriptError::invalid("tree", &format!("member #{i} {m:?} is not a bit string")))?;
                    if l.len() > *depth {
                        return Err(ScriptError::invalid("tree", &format!("member {m:?} is deeper than depth {depth}")));
                    }
                    listed.insert(l);
                }
                for l in &listed {
                    if !l.is_empty() && !listed.contains(&l.prefix(l.len() - 1)) {
                        return Err(ScriptError::invalid(
                            "tree",
                            &format!("member {l} has no parent in the tree (not downward closed)"),
                        ));
                    }
                }
                let d = *depth;
                let ext = *extend;
                (
                    d,
                    Box::new(move |l: &Label| {
                        if l.len() <= d {
                            return listed.contains(l);
                        }
                        let head = l.prefix(d);
                        if !listed.contains(&head) {
                            return false;
                        }
                        match ext {
                            Extension::Full => true,
                            Extension::Leftmost => (0..l.len() - d).all(|i| l.bit(d + i) == 0),
                        }
                    }),
                )
            }
        };
        if depth > MAX_SET_WIDTH as usize {
            return Err(ScriptError::invalid("tree", &format!("depth {depth} exceeds {MAX_SET_WIDTH}")));
        }
        let mut members = BTreeSet::new();
        for e in 0..=depth {
            for l in Label::all_of_len(e) {
                if pred(&l) {
                    members.insert(l);
                }
            }
        }
        Ok(ScriptedTree { depth, members })
    }

    pub fn from_members(depth: usize, members: impl IntoIterator<Item = Label>) -> Result<ScriptedTree, ScriptError> {
        let members: BTreeSet<Label> = members.into_iter().filter(|l| l.len() <= depth).collect();
        for l in &members {
            if !l.is_empty() && !members.contains(&l.prefix(l.len() - 1)) {
                return Err(ScriptError::invalid("tree", &format!("member {l} has no parent in the tree")));
            }
        }
        Ok(ScriptedTree { depth, members })
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn contains(&self, l: &Label) -> bool {
        self.members.contains(l)
    }

    pub fn members(&self) -> impl Iterator<Item = &Label> {
        self.members.iter()
    }

    /// `T ∩ {0,1}^e`.
    pub fn slice(&self, e: usize) -> Result<LabelSet, ScriptError> {
        if e > self.depth {
            return Err(ScriptError::invalid("tree", &format!("slice {e} beyond scripted depth {}", self.depth)));
        }
        Ok(LabelSet::from_labels(e, self.members.iter().filter(|l| l.len() == e)))
    }
}

pub fn tree_slice(t: &ScriptedTree, e: usize) -> Result<LabelSet, ScriptError> {
    t.slice(e)
}
