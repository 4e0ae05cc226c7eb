//! Machine state shared by the engines: node arena, balls, interval tables and snapshots.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::addr::{outcome_order_with, DnOrder, Mode, Outcome, TreeAddress};
use crate::label::Label;

pub type NodeId = u32;
pub const ROOT: NodeId = 0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OffReason {
    NeverPlaced,
    Eliminated,
    EnteredA,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Loc {
    Off(OffReason),
    At(NodeId),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Ball {
    pub loc: Loc,
    pub label: Label,
}

impl Ball {
    pub fn node(&self) -> Option<NodeId> {
        match self.loc {
            Loc::At(n) => Some(n),
            Loc::Off(_) => None,
        }
    }
}

/// 64-bit FNV-1a.
pub fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bytes {
        h ^= *b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// SplitMix64 finalizer.
pub fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn mix_all(parts: &[u64]) -> u64 {
    parts.iter().fold(0x1234_5678_9abc_def0u64, |acc, p| mix(acc ^ p.wrapping_mul(0x2545_f491_4f6c_dd1d)))
}

pub fn address_hash(a: &TreeAddress) -> u64 {
    fnv1a(a.render().as_bytes())
}

pub fn label_hash(l: &Label) -> u64 {
    mix_all(&[l.len() as u64, l.code()])
}

/// Canonical total order on addresses: outcome by outcome, prefixes first.
pub fn addr_cmp(a: &TreeAddress, b: &TreeAddress, order: DnOrder) -> Ordering {
    for (x, y) in a.outcomes().iter().zip(b.outcomes()) {
        let o = outcome_order_with(x, y, order).unwrap_or_else(|_| x.to_string().cmp(&y.to_string()));
        if o != Ordering::Equal {
            return o;
        }
    }
    a.len().cmp(&b.len())
}

/// Lazily materialized nodes of the tree of strategies.
#[derive(Clone, Debug)]
pub struct Arena {
    pub mode: Mode,
    pub order: DnOrder,
    addrs: Arc<Vec<TreeAddress>>,
    parent: Vec<Option<NodeId>>,
    children: Vec<Vec<(Outcome, NodeId)>>,
    hashes: Vec<u64>,
    index: HashMap<TreeAddress, NodeId>,
}

impl Arena {
    pub fn new(mode: Mode, order: DnOrder) -> Arena {
        let root = TreeAddress::root();
        let mut index = HashMap::new();
        index.insert(root.clone(), ROOT);
        Arena {
            mode,
            order,
            hashes: vec![address_hash(&root)],
            addrs: Arc::new(vec![root]),
            parent: vec![None],
            children: vec![Vec::new()],
            index,
        }
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn addr(&self, id: NodeId) -> &TreeAddress {
        &self.addrs[id as usize]
    }

    pub fn addrs(&self) -> Arc<Vec<TreeAddress>> {
        Arc::clone(&self.addrs)
    }

    pub fn depth(&self, id: NodeId) -> usize {
        self.addrs[id as usize].len()
    }

    pub fn parent(&self, id: NodeId) -> Option<NodeId> {
        self.parent[id as usize]
    }

    pub fn hash(&self, id: NodeId) -> u64 {
        self.hashes[id as usize]
    }

    pub fn last_outcome(&self, id: NodeId) -> Option<Outcome> {
        self.addrs[id as usize].last().copied()
    }

    pub fn find(&self, a: &TreeAddress) -> Option<NodeId> {
        self.index.get(a).copied()
    }

    pub fn child(&self, id: NodeId, o: &Outcome) -> Option<NodeId> {
        self.children[id as usize].iter().find(|(c, _)| c == o).map(|(_, n)| *n)
    }

    pub fn children(&self, id: NodeId) -> &[(Outcome, NodeId)] {
        &self.children[id as usize]
    }

    pub fn get_or_create(&mut self, id: NodeId, o: Outcome) -> NodeId {
        if let Some(n) = self.child(id, &o) {
            return n;
        }
        let addr = self.addrs[id as usize].child(o);
        let n = self.parent.len() as NodeId;
        self.hashes.push(address_hash(&addr));
        self.index.insert(addr.clone(), n);
        Arc::make_mut(&mut self.addrs).push(addr);
        self.parent.push(Some(id));
        self.children.push(Vec::new());
        let order = self.order;
        let list = &mut self.children[id as usize];
        let pos = list
            .iter()
            .position(|(c, _)| outcome_order_with(&o, c, order).map(|x| x == Ordering::Less).unwrap_or(false))
            .unwrap_or(list.len());
        list.insert(pos, (o, n));
        n
    }

    pub fn ensure(&mut self, a: &TreeAddress) -> NodeId {
        let mut cur = ROOT;
        for o in a.outcomes() {
            cur = self.get_or_create(cur, *o);
        }
        cur
    }

    /// Path from the root to `id`, inclusive.
    pub fn path(&self, id: NodeId) -> Vec<NodeId> {
        let mut out = vec![id];
        let mut cur = id;
        while let Some(p) = self.parent[cur as usize] {
            out.push(p);
            cur = p;
        }
        out.reverse();
        out
    }

    /// `a ⪯ b`.
    pub fn is_ancestor(&self, a: NodeId, b: NodeId) -> bool {
        let da = self.depth(a);
        let mut cur = b;
        while self.depth(cur) > da {
            cur = self.parent[cur as usize].expect("non-root has parent");
        }
        cur == a
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IntervalStatus {
    Waiting,
    Released,
}

/// One defined `f(k)` for `k ≥ 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntervalEntry {
    pub f: u64,
    pub u: u64,
    /// Index `m` of the split child `α⌢m` holding the block.
    pub beta: u32,
    pub status: IntervalStatus,
    /// Stage of definition.
    pub defined_at: u64,
}

/// Intervals of one parent splitting node and label. `entries[k-1]` describes `k`; `f(0) = 0`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntervalTable {
    pub entries: Vec<IntervalEntry>,
}

impl IntervalTable {
    pub fn f(&self, k: usize) -> Option<u64> {
        if k == 0 {
            Some(0)
        } else {
            self.entries.get(k - 1).map(|e| e.f)
        }
    }

    pub fn u(&self, k: usize) -> Option<u64> {
        if k == 0 {
            Some(0)
        } else {
            self.entries.get(k - 1).map(|e| e.u)
        }
    }

    pub fn get(&self, k: usize) -> Option<&IntervalEntry> {
        if k == 0 {
            None
        } else {
            self.entries.get(k - 1)
        }
    }

    /// Least `k` with `f(k)` undefined.
    pub fn next_k(&self) -> usize {
        self.entries.len() + 1
    }

    /// The `k ≥ 1` with `x ∈ I(k) = [f(k-1), f(k))`.
    pub fn interval_of(&self, x: u64) -> Option<usize> {
        let idx = self.entries.partition_point(|e| e.f <= x);
        if idx < self.entries.len() {
            Some(idx + 1)
        } else {
            None
        }
    }

    pub fn waiting_at(&self, m: u32) -> bool {
        self.entries.iter().any(|e| e.status == IntervalStatus::Waiting && e.beta == m)
    }

    /// Least `k` waiting at `m`.
    pub fn least_waiting(&self, m: u32) -> Option<usize> {
        self.entries.iter().position(|e| e.status == IntervalStatus::Waiting && e.beta == m).map(|i| i + 1)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

pub type IntervalKey = (NodeId, u64);

/// One on-machine ball in a snapshot.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BallRecord {
    pub x: u64,
    pub node: NodeId,
    pub label: Label,
}

/// What a stage did.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Case {
    Pull,
    Eliminate,
    Release,
    Establish,
    NewBalls,
}

impl Case {
    pub fn name(&self) -> &'static str {
        match self {
            Case::Pull => "pull",
            Case::Eliminate => "eliminate",
            Case::Release => "release",
            Case::Establish => "establish",
            Case::NewBalls => "new-balls",
        }
    }
}

/// Complete machine state at the start of a stage.
#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub mode: Mode,
    pub stage: u64,
    pub n: u64,
    pub nodes: Arc<Vec<TreeAddress>>,
    pub balls: Vec<BallRecord>,
    /// Members of `M` (or `H`) below the universe, ascending.
    pub h: Vec<u64>,
    pub intervals: BTreeMap<IntervalKey, IntervalTable>,
    /// Case of the previous stage.
    pub last_case: Option<Case>,
}

#[derive(Serialize)]
struct BallView<'a> {
    x: u64,
    at: &'a TreeAddress,
    label: Label,
}

#[derive(Serialize)]
struct IntervalView<'a> {
    alpha: &'a TreeAddress,
    rho: Label,
    entries: &'a [IntervalEntry],
}

#[derive(Serialize)]
struct SnapshotView<'a> {
    mode: Mode,
    stage: u64,
    n: u64,
    hash: u64,
    balls: Vec<BallView<'a>>,
    removed: &'a [u64],
    intervals: Vec<IntervalView<'a>>,
    last_case: Option<Case>,
}

impl Snapshot {
    pub fn addr(&self, id: NodeId) -> &TreeAddress {
        &self.nodes[id as usize]
    }

    /// JSON form with rendered addresses.
    pub fn to_json(&self) -> String {
        let view = SnapshotView {
            mode: self.mode,
            stage: self.stage,
            n: self.n,
            hash: self.hash(),
            balls: self.balls.iter().map(|b| BallView { x: b.x, at: self.addr(b.node), label: b.label }).collect(),
            removed: &self.h,
            intervals: self
                .intervals
                .iter()
                .map(|(&(a, code), t)| {
                    let alpha = self.addr(a);
                    let e = crate::addr::label_len_at(self.mode, alpha.len());
                    IntervalView { alpha, rho: Label::new(e as u8, code), entries: &t.entries }
                })
                .collect(),
            last_case: self.last_case,
        };
        serde_json::to_string_pretty(&view).expect("snapshot serializes")
    }

    pub fn hash(&self) -> u64 {
        state_hash(
            self.stage,
            self.n,
            self.balls.iter().map(|b| (b.x, address_hash(self.addr(b.node)), b.label)),
            self.h.iter().copied(),
            self.intervals.iter().map(|((a, rho), t)| (address_hash(self.addr(*a)), *rho, t)),
        )
    }
}

/// Order-independent hash of a machine state.
pub fn state_hash<'a>(
    stage: u64,
    n: u64,
    balls: impl Iterator<Item = (u64, u64, Label)>,
    h: impl Iterator<Item = u64>,
    intervals: impl Iterator<Item = (u64, u64, &'a IntervalTable)>,
) -> u64 {
    let mut acc = mix_all(&[stage, n]);
    for (x, node, label) in balls {
        acc = acc.wrapping_add(mix_all(&[1, x, node, label_hash(&label)]));
    }
    for x in h {
        acc = acc.wrapping_add(mix_all(&[2, x]));
    }
    for (a, rho, t) in intervals {
        for (i, e) in t.entries.iter().enumerate() {
            let st = match e.status {
                IntervalStatus::Waiting => 0,
                IntervalStatus::Released => 1,
            };
            acc = acc.wrapping_add(mix_all(&[3, a, rho, i as u64 + 1, e.f, e.u, e.beta as u64, st, e.defined_at]));
        }
    }
    acc
}
