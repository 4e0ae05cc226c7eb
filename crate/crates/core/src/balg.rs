//! Tree nodes of the Boolean-algebra variant, and finite presentations of `B(T)`.

use std::collections::BTreeSet;

use crate::addr::{Outcome, TreeAddress};
use crate::hhs::YView;
use crate::label::{Label, LabelSet};

/// Remaining pull clauses for a tree child `β = α⌢E_n`: `ρ ∈ E` and `β` wants `x`.
pub fn tree_pullable(rho_in_e: bool, y: YView, ell: u64, x: u64) -> bool {
    rho_in_e && y.wants(x, ell)
}

/// Remaining elimination clauses: `ρ ∉ E`, `x ≠ min Y(α,ρ)` and `x < bound`.
pub fn tree_eliminable(rho_in_e: bool, x: u64, min_parent: Option<u64>, bound: u64) -> bool {
    !rho_in_e && min_parent != Some(x) && x < bound
}

/// The guess `E(α)`: the set of the last tree outcome on the address, `{λ}` at the top.
pub fn e_of(addr: &TreeAddress) -> LabelSet {
    addr.outcomes()
        .iter()
        .rev()
        .find_map(|o| match o {
            Outcome::TreeGuess(e, _) => Some(*e),
            _ => None,
        })
        .unwrap_or_else(|| LabelSet::full(0))
}

/// A finite presentation of `B(T)` from the members of `T` up to `depth`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteBA {
    depth: usize,
    members: BTreeSet<Label>,
}

/// Canonical signature of the subalgebra below a node.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Sig {
    Zero,
    Atom,
    Join(Vec<Sig>),
}

impl FiniteBA {
    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn members(&self) -> &BTreeSet<Label> {
        &self.members
    }

    /// A member is nonzero iff it has a member extension at full depth.
    pub fn is_nonzero(&self, t: &Label) -> bool {
        self.members.contains(t) && self.members.iter().any(|m| m.len() == self.depth && m.extends(t))
    }

    /// Nonzero members at full depth.
    pub fn atoms(&self) -> Vec<Label> {
        self.members.iter().filter(|m| m.len() == self.depth).copied().collect()
    }

    fn sig_of(&self, t: &Label) -> Sig {
        if !self.is_nonzero(t) {
            return Sig::Zero;
        }
        if t.len() == self.depth {
            return Sig::Atom;
        }
        let mut kids: Vec<Sig> = [t.push(0), t.push(1)]
            .iter()
            .map(|c| self.sig_of(c))
            .filter(|s| *s != Sig::Zero)
            .collect();
        if kids.len() == 1 {
            return kids.pop().expect("one child");
        }
        kids.sort();
        Sig::Join(kids)
    }

    /// Signature of the whole algebra: chains collapse, zero classes drop, children sorted.
    pub fn signature(&self) -> Sig {
        self.sig_of(&Label::EMPTY)
    }

    /// The family of atom sets below each nonzero generator.
    pub fn generator_sets(&self) -> BTreeSet<Vec<usize>> {
        let atoms = self.atoms();
        self.members
            .iter()
            .filter(|t| self.is_nonzero(t))
            .map(|t| atoms.iter().enumerate().filter(|(_, a)| a.extends(t)).map(|(i, _)| i).collect())
            .collect()
    }
}

pub fn build_ba_from_tree<'a>(tree: impl IntoIterator<Item = &'a Label>, depth: usize) -> FiniteBA {
    let given: BTreeSet<Label> = tree.into_iter().filter(|l| l.len() <= depth).copied().collect();
    let members = given
        .iter()
        .filter(|l| (0..l.len()).all(|i| given.contains(&l.prefix(i))))
        .copied()
        .collect();
    FiniteBA { depth, members }
}

/// Isomorphism at equal depth by canonical signature.
pub fn compare_ba(a: &FiniteBA, b: &FiniteBA) -> bool {
    a.depth == b.depth && a.signature() == b.signature()
}
