//! Tree addresses, outcome alphabets and the orders on them.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::label::{Label, LabelSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Maximal,
    Hhs,
    Balg,
}

impl Mode {
    pub fn name(&self) -> &'static str {
        match self {
            Mode::Maximal => "maximal",
            Mode::Hhs => "hhs",
            Mode::Balg => "balg",
        }
    }

    pub fn all() -> [Mode; 3] {
        [Mode::Maximal, Mode::Hhs, Mode::Balg]
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StructuralError {
    #[error("outcome {outcome} not allowed at position {pos} in {mode} mode")]
    BadOutcome { mode: Mode, pos: usize, outcome: String },
    #[error("cannot compare outcomes from different families: {0} vs {1}")]
    MixedFamilies(String, String),
    #[error("node {0} has no guess stream")]
    NoStream(String),
    #[error("the root has no parent")]
    RootHasNoParent,
    #[error("cannot parse address {0:?}")]
    Parse(String),
}

/// Tie-break order for the decision and tree outcomes `D_n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DnOrder {
    /// By `n`, then by canonical set index.
    #[default]
    NMajor,
    /// By canonical set index, then by `n`.
    SetMajor,
}

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub enum Outcome {
    Inf(u32),
    Fin(u32),
    DecisionGuess(LabelSet, u32),
    SplitChildIndex(u32),
    ChildLink,
    TreeGuess(LabelSet, u32),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Family {
    InfFin,
    Decision,
    Split,
    Link,
    Tree,
}

impl Outcome {
    fn family(&self) -> Family {
        match self {
            Outcome::Inf(_) | Outcome::Fin(_) => Family::InfFin,
            Outcome::DecisionGuess(..) => Family::Decision,
            Outcome::SplitChildIndex(_) => Family::Split,
            Outcome::ChildLink => Family::Link,
            Outcome::TreeGuess(..) => Family::Tree,
        }
    }

    fn key(&self, order: DnOrder) -> (u64, u64) {
        match *self {
            Outcome::Inf(n) => (2 * n as u64, 0),
            Outcome::Fin(n) => (2 * n as u64 + 1, 0),
            Outcome::DecisionGuess(d, n) | Outcome::TreeGuess(d, n) => match order {
                DnOrder::NMajor => (n as u64, d.index()),
                DnOrder::SetMajor => (d.index(), n as u64),
            },
            Outcome::SplitChildIndex(n) => (n as u64, 0),
            Outcome::ChildLink => (0, 0),
        }
    }

    pub fn is_inf(&self) -> bool {
        matches!(self, Outcome::Inf(_))
    }

    /// Guess set carried by a decision or tree outcome.
    pub fn guess_set(&self) -> Option<LabelSet> {
        match self {
            Outcome::DecisionGuess(d, _) | Outcome::TreeGuess(d, _) => Some(*d),
            _ => None,
        }
    }

    pub fn parse(s: &str) -> Option<Outcome> {
        if s == "c" {
            return Some(Outcome::ChildLink);
        }
        if let Some(r) = s.strip_prefix("inf") {
            return r.parse().ok().map(Outcome::Inf);
        }
        if let Some(r) = s.strip_prefix("fin") {
            return r.parse().ok().map(Outcome::Fin);
        }
        if let Some(r) = s.strip_prefix('s') {
            return r.parse().ok().map(Outcome::SplitChildIndex);
        }
        let tree = s.starts_with('T');
        if let Some(r) = s.strip_prefix('D').or_else(|| s.strip_prefix('T')) {
            let r = r.strip_prefix('{')?;
            let (body, rest) = r.split_once('}')?;
            let n: u32 = rest.strip_prefix('#')?.parse().ok()?;
            let width = body.split(',').next().map(|x| if x == "_" { 0 } else { x.len() });
            let labels: Option<Vec<Label>> = if body.is_empty() {
                Some(vec![])
            } else {
                body.split(',').map(Label::parse).collect()
            };
            let labels = labels?;
            let width = if labels.is_empty() { None } else { width };
            // An empty set carries no width in its text; width 0 is used and fixed up on parse of a full address.
            let w = width.unwrap_or(0);
            if labels.iter().any(|l| l.len() != w) || w > crate::label::MAX_SET_WIDTH as usize {
                return None;
            }
            let set = LabelSet::from_labels(w, labels.iter());
            return Some(if tree { Outcome::TreeGuess(set, n) } else { Outcome::DecisionGuess(set, n) });
        }
        None
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Outcome::Inf(n) => write!(f, "inf{n}"),
            Outcome::Fin(n) => write!(f, "fin{n}"),
            Outcome::DecisionGuess(d, n) => write!(f, "D{d}#{n}"),
            Outcome::SplitChildIndex(n) => write!(f, "s{n}"),
            Outcome::ChildLink => f.write_str("c"),
            Outcome::TreeGuess(d, n) => write!(f, "T{d}#{n}"),
        }
    }
}

impl fmt::Debug for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Total order on one outcome family, with the canonical `D_n` order.
pub fn outcome_order(a: &Outcome, b: &Outcome) -> Result<Ordering, StructuralError> {
    outcome_order_with(a, b, DnOrder::NMajor)
}

pub fn outcome_order_with(a: &Outcome, b: &Outcome, order: DnOrder) -> Result<Ordering, StructuralError> {
    if a.family() != b.family() {
        return Err(StructuralError::MixedFamilies(a.to_string(), b.to_string()));
    }
    Ok(a.key(order).cmp(&b.key(order)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NodeKind {
    Root,
    DecisionChild,
    ParentSplit,
    SplitChild,
    SplitGrandchild,
    TreeChild,
}

/// What a node does toward its own children.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Role {
    /// Decides `W_e` for labels of length `e`.
    Decision(usize),
    /// Parent `e`-splitting node.
    ParentSplit(usize),
    /// Child `e`-splitting node; its unique child is reached by `ChildLink`.
    SplitChild(usize),
    /// `e`-tree node deciding the level-`e` slice of the scripted tree.
    Tree(usize),
}

impl Role {
    pub fn level(&self) -> usize {
        match *self {
            Role::Decision(e) | Role::ParentSplit(e) | Role::SplitChild(e) | Role::Tree(e) => e,
        }
    }
}

fn period(mode: Mode) -> usize {
    match mode {
        Mode::Maximal => 1,
        Mode::Hhs => 3,
        Mode::Balg => 4,
    }
}

/// Role of any node of the given length.
pub fn role_at(mode: Mode, len: usize) -> Role {
    match mode {
        Mode::Maximal => Role::Decision(len),
        Mode::Hhs => match len % 3 {
            0 => Role::Decision(len / 3),
            1 => Role::ParentSplit(len / 3),
            _ => Role::SplitChild(len / 3),
        },
        Mode::Balg => match len % 4 {
            0 => Role::Tree(len / 4),
            1 => Role::Decision(len / 4),
            2 => Role::ParentSplit(len / 4),
            _ => Role::SplitChild(len / 4),
        },
    }
}

/// Length of labels carried by balls residing at a node of this length.
pub fn label_len_at(mode: Mode, len: usize) -> usize {
    match mode {
        Mode::Maximal => 0,
        _ => len / period(mode),
    }
}

pub fn kind_at(mode: Mode, len: usize) -> NodeKind {
    if len == 0 {
        return NodeKind::Root;
    }
    match role_at(mode, len - 1) {
        Role::Decision(_) => NodeKind::DecisionChild,
        Role::ParentSplit(_) => NodeKind::SplitChild,
        Role::SplitChild(_) => NodeKind::SplitGrandchild,
        Role::Tree(_) => NodeKind::TreeChild,
    }
}

/// Does this node carry its own guess stream?
pub fn has_stream(mode: Mode, len: usize) -> bool {
    len > 0 && matches!(kind_at(mode, len), NodeKind::DecisionChild | NodeKind::TreeChild)
}

/// Whether `o` may follow a node of length `pos` in this mode.
pub fn outcome_fits(mode: Mode, pos: usize, o: &Outcome) -> bool {
    match (role_at(mode, pos), o) {
        (Role::Decision(_), Outcome::Inf(_) | Outcome::Fin(_)) => mode == Mode::Maximal,
        (Role::Decision(e), Outcome::DecisionGuess(d, _)) => mode != Mode::Maximal && d.width() == e,
        (Role::ParentSplit(_), Outcome::SplitChildIndex(_)) => true,
        (Role::SplitChild(_), Outcome::ChildLink) => true,
        (Role::Tree(e), Outcome::TreeGuess(d, _)) => d.width() == e,
        _ => false,
    }
}

#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct TreeAddress(pub Vec<Outcome>);

impl TreeAddress {
    pub fn root() -> TreeAddress {
        TreeAddress(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.is_root()
    }

    pub fn outcomes(&self) -> &[Outcome] {
        &self.0
    }

    pub fn child(&self, o: Outcome) -> TreeAddress {
        let mut v = self.0.clone();
        v.push(o);
        TreeAddress(v)
    }

    pub fn parent(&self) -> Option<TreeAddress> {
        if self.0.is_empty() {
            None
        } else {
            Some(TreeAddress(self.0[..self.0.len() - 1].to_vec()))
        }
    }

    pub fn prefix(&self, n: usize) -> TreeAddress {
        TreeAddress(self.0[..n].to_vec())
    }

    pub fn last(&self) -> Option<&Outcome> {
        self.0.last()
    }

    /// `self ⪯ other`.
    pub fn is_prefix_of(&self, other: &TreeAddress) -> bool {
        self.len() <= other.len() && other.0[..self.len()] == self.0[..]
    }

    pub fn validate(&self, mode: Mode) -> Result<(), StructuralError> {
        for (pos, o) in self.0.iter().enumerate() {
            if !outcome_fits(mode, pos, o) {
                return Err(StructuralError::BadOutcome { mode, pos, outcome: o.to_string() });
            }
        }
        Ok(())
    }

    pub fn render(&self) -> String {
        if self.0.is_empty() {
            return "root".to_string();
        }
        let parts: Vec<String> = self.0.iter().map(|o| o.to_string()).collect();
        parts.join(".")
    }

    /// Parses the canonical text form. Empty guess sets are given the width their position requires.
    pub fn parse(mode: Mode, s: &str) -> Result<TreeAddress, StructuralError> {
        if s == "root" || s.is_empty() {
            return Ok(TreeAddress::root());
        }
        let mut out = Vec::new();
        for part in s.split('.') {
            out.push(Outcome::parse(part).ok_or_else(|| StructuralError::Parse(s.to_string()))?);
        }
        let mut a = TreeAddress(out);
        a.normalize(mode);
        a.validate(mode)?;
        Ok(a)
    }
}

impl TreeAddress {
    /// Gives empty guess sets the label length of their position under `mode`.
    pub fn normalize(&mut self, mode: Mode) {
        for (pos, o) in self.0.iter_mut().enumerate() {
            match (o, role_at(mode, pos)) {
                (Outcome::DecisionGuess(d, _), Role::Decision(e)) | (Outcome::TreeGuess(d, _), Role::Tree(e))
                    if d.is_empty() =>
                {
                    *d = LabelSet::empty(e)
                }
                _ => {}
            }
        }
    }
}

impl fmt::Display for TreeAddress {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

impl fmt::Debug for TreeAddress {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{}>", self.render())
    }
}

impl Serialize for TreeAddress {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(&self.render())
    }
}

impl<'de> Deserialize<'de> for TreeAddress {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        // Empty guess sets get width 0 until `normalize` is called with the mode.
        if s == "root" {
            return Ok(TreeAddress::root());
        }
        let parts: Option<Vec<Outcome>> = s.split('.').map(Outcome::parse).collect();
        parts.map(TreeAddress).ok_or_else(|| serde::de::Error::custom(format!("bad address {s:?}")))
    }
}

pub fn node_kind(mode: Mode, addr: &TreeAddress) -> Result<NodeKind, StructuralError> {
    addr.validate(mode)?;
    Ok(kind_at(mode, addr.len()))
}

/// First position where the two addresses differ, if neither is a prefix of the other.
fn first_difference(a: &TreeAddress, b: &TreeAddress) -> Option<usize> {
    a.0.iter().zip(b.0.iter()).position(|(x, y)| x != y)
}

/// `a` lies strictly to the left of `b`.
pub fn left_of_with(a: &TreeAddress, b: &TreeAddress, order: DnOrder) -> bool {
    match first_difference(a, b) {
        Some(i) => outcome_order_with(&a.0[i], &b.0[i], order).map(|o| o == Ordering::Less).unwrap_or(false),
        None => false,
    }
}

pub fn left_of(a: &TreeAddress, b: &TreeAddress) -> bool {
    left_of_with(a, b, DnOrder::NMajor)
}

/// `a` is stronger than `b`: left of it, or a proper prefix.
pub fn stronger(a: &TreeAddress, b: &TreeAddress) -> bool {
    stronger_with(a, b, DnOrder::NMajor)
}

pub fn stronger_with(a: &TreeAddress, b: &TreeAddress, order: DnOrder) -> bool {
    left_of_with(a, b, order) || (a.len() < b.len() && a.is_prefix_of(b))
}

/// Kleene-Brouwer order: `a` extends `b`, or `a` is left of `b`.
pub fn kleene_brouwer_leq(a: &TreeAddress, b: &TreeAddress) -> bool {
    kleene_brouwer_leq_with(a, b, DnOrder::NMajor)
}

pub fn kleene_brouwer_leq_with(a: &TreeAddress, b: &TreeAddress, order: DnOrder) -> bool {
    b.is_prefix_of(a) || left_of_with(a, b, order)
}
