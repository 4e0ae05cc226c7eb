//! Per-snapshot invariant checks.

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use crate::addr::{kind_at, label_len_at, left_of_with, role_at, DnOrder, Mode, NodeKind, Outcome, Role, TreeAddress};
use crate::label::Label;
use crate::machine::{Case, IntervalStatus, Snapshot};
use crate::oracles::{EnumerationState, Oracles};

/// The registered invariant classes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum InvariantClass {
    RootView,
    ResidencyDepth,
    LabelLength,
    IntervalDomain,
    IntervalLocation,
}

impl InvariantClass {
    pub const ALL: [InvariantClass; 5] = [
        InvariantClass::RootView,
        InvariantClass::ResidencyDepth,
        InvariantClass::LabelLength,
        InvariantClass::IntervalDomain,
        InvariantClass::IntervalLocation,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            InvariantClass::RootView => "root-view",
            InvariantClass::ResidencyDepth => "residency-depth",
            InvariantClass::LabelLength => "label-length",
            InvariantClass::IntervalDomain => "interval-domain",
            InvariantClass::IntervalLocation => "interval-location",
        }
    }
}

impl fmt::Display for InvariantClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub class: InvariantClass,
    pub stage: u64,
    pub node: Option<String>,
    pub ball: Option<u64>,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] stage {}", self.class, self.stage)?;
        if let Some(n) = &self.node {
            write!(f, " node {n}")?;
        }
        if let Some(x) = self.ball {
            write!(f, " ball {x}")?;
        }
        write!(f, ": {}", self.detail)
    }
}

/// Context the checker needs beyond the snapshot.
#[derive(Clone, Copy, Debug)]
pub struct CheckContext<'a> {
    pub oracles: &'a Oracles,
    pub order: DnOrder,
    pub split_width: u32,
    /// The case the stage starting at this snapshot takes, when known.
    pub next_case: Option<Case>,
}

struct Ctx<'a> {
    snap: &'a Snapshot,
    out: Vec<Violation>,
}

impl Ctx<'_> {
    fn push(&mut self, class: InvariantClass, node: Option<&TreeAddress>, ball: Option<u64>, detail: String) {
        self.out.push(Violation { class, stage: self.snap.stage, node: node.map(|a| a.render()), ball, detail });
    }
}

/// All violations of the registered invariants at this snapshot.
pub fn check_stage_invariants(snap: &Snapshot, cx: &CheckContext<'_>) -> Vec<Violation> {
    let mut c = Ctx { snap, out: Vec::new() };
    root_view(&mut c, cx);
    residency(&mut c);
    if snap.mode != Mode::Maximal {
        interval_domain(&mut c, cx);
        if !matches!(cx.next_case, None | Some(Case::Pull)) {
            interval_location(&mut c, cx);
        }
    }
    c.out
}

fn root_view(c: &mut Ctx<'_>, cx: &CheckContext<'_>) {
    let snap = c.snap;
    let or = cx.oracles;
    let h: BTreeSet<u64> = snap.h.iter().copied().collect();
    for y in 0..or.universe {
        if or.a.in_stage(y, snap.n) && !h.contains(&y) {
            c.push(InvariantClass::RootView, None, Some(y), "member of A missing from the removed set".into());
        }
    }
    let q_end = EnumerationState::at(&or.a, snap.n).q_end();
    let mut on = BTreeSet::new();
    for b in &snap.balls {
        if !on.insert(b.x) {
            c.push(InvariantClass::RootView, Some(snap.addr(b.node)), Some(b.x), "ball resides twice".into());
        }
        if h.contains(&b.x) {
            c.push(InvariantClass::RootView, Some(snap.addr(b.node)), Some(b.x), "removed ball still on the machine".into());
        }
        if b.x >= q_end {
            c.push(InvariantClass::RootView, Some(snap.addr(b.node)), Some(b.x), "ball outside Q".into());
        }
    }
    for x in 0..q_end {
        if !h.contains(&x) && !on.contains(&x) {
            c.push(InvariantClass::RootView, None, Some(x), "ball of Q neither removed nor on the machine".into());
        }
    }
}

fn decision_prefix_len(mode: Mode, a: &TreeAddress) -> usize {
    (1..=a.len()).rev().find(|&i| kind_at(mode, i) == NodeKind::DecisionChild).unwrap_or(0)
}

fn residency(c: &mut Ctx<'_>) {
    let snap = c.snap;
    let mode = snap.mode;
    for b in &snap.balls {
        let a = snap.addr(b.node);
        let eps = decision_prefix_len(mode, a);
        if eps > 0 && b.x < eps as u64 + 1 {
            c.push(InvariantClass::ResidencyDepth, Some(a), Some(b.x), format!("below decision prefix of length {eps}"));
        }
        if mode != Mode::Maximal && a.len() as u64 > b.x + 2 {
            c.push(InvariantClass::ResidencyDepth, Some(a), Some(b.x), format!("resides at depth {}", a.len()));
        }
        let want = label_len_at(mode, a.len());
        if b.label.len() != want {
            c.push(InvariantClass::LabelLength, Some(a), Some(b.x), format!("label {} should have length {want}", b.label));
        }
    }
}

fn interval_domain(c: &mut Ctx<'_>, cx: &CheckContext<'_>) {
    let snap = c.snap;
    for (&(alpha, rho), t) in &snap.intervals {
        let a = snap.addr(alpha);
        if !matches!(role_at(snap.mode, a.len()), Role::ParentSplit(_)) {
            c.push(InvariantClass::IntervalDomain, Some(a), None, "intervals kept at a node that is not a parent split".into());
        }
        if rho >> label_len_at(snap.mode, a.len()) != 0 {
            c.push(InvariantClass::IntervalDomain, Some(a), None, format!("label code {rho} too long"));
        }
        let mut prev = 0;
        for (i, e) in t.entries.iter().enumerate() {
            let k = i + 1;
            if e.f <= prev {
                c.push(InvariantClass::IntervalDomain, Some(a), None, format!("f({k}) = {} not above f({}) = {prev}", e.f, k - 1));
            }
            if e.u > e.f {
                c.push(InvariantClass::IntervalDomain, Some(a), None, format!("use u({k}) = {} exceeds f({k}) = {}", e.u, e.f));
            }
            if e.beta >= cx.split_width {
                c.push(InvariantClass::IntervalDomain, Some(a), None, format!("interval {k} assigned to child {}", e.beta));
            }
            if e.defined_at >= snap.stage {
                c.push(InvariantClass::IntervalDomain, Some(a), None, format!("interval {k} defined in the future"));
            }
            prev = e.f;
        }
    }
}

fn interval_location(c: &mut Ctx<'_>, cx: &CheckContext<'_>) {
    let snap = c.snap;
    let mode = snap.mode;
    for (&(alpha, rho), t) in &snap.intervals {
        let a = snap.addr(alpha).clone();
        let e = label_len_at(mode, a.len());
        let prefix = Label::new(e as u8, rho);
        let members: Vec<(u64, &TreeAddress)> = snap
            .balls
            .iter()
            .filter(|b| b.label.len() >= e && b.label.prefix(e) == prefix)
            .map(|b| (b.x, snap.addr(b.node)))
            .filter(|(_, at)| a.is_prefix_of(at))
            .collect();
        for (i, en) in t.entries.iter().enumerate() {
            let k = i + 1;
            let beta = a.child(Outcome::SplitChildIndex(en.beta));
            if let Some(later) = t.entries.get(i + 1) {
                if later.beta < en.beta {
                    c.push(
                        InvariantClass::IntervalLocation,
                        Some(&beta),
                        None,
                        format!("interval {k} sits right of interval {}", k + 1),
                    );
                }
            }
            let lo = if i == 0 { 0 } else { t.entries[i - 1].f };
            for &(x, at) in &members {
                if x >= en.f && left_of_with(at, &beta, cx.order) {
                    c.push(InvariantClass::IntervalLocation, Some(at), Some(x), format!("ball beyond f({k}) left of its block"));
                }
                if x < lo || x >= en.f {
                    continue;
                }
                match en.status {
                    IntervalStatus::Waiting if at != &beta => {
                        c.push(InvariantClass::IntervalLocation, Some(at), Some(x), format!("waiting block {k} not at {}", beta.render()));
                    }
                    IntervalStatus::Released if !(beta.is_prefix_of(at) && at.len() > beta.len()) => {
                        c.push(InvariantClass::IntervalLocation, Some(at), Some(x), format!("released block {k} not below {}", beta.render()));
                    }
                    _ => {}
                }
            }
        }
    }
}
