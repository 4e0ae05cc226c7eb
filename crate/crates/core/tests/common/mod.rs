//! Shared helpers for the integration tests.
#![allow(dead_code)]

use std::sync::Arc;

use pinball::addr::label_len_at;
use pinball::machine::{IntervalStatus, Snapshot};
use pinball::oracles::Oracles;
use pinball::scenarios::golden_hhs;
use pinball::verify::{check_stage_invariants, CheckContext, InvariantClass, Violation};
use pinball::{Case, Engine, Label, RunConfig};

/// A clean snapshot together with what the checker needs.
pub struct Fixture {
    pub cfg: RunConfig,
    pub oracles: Oracles,
    pub snap: Snapshot,
    pub next_case: Option<Case>,
}

impl Fixture {
    pub fn check(&self, snap: &Snapshot) -> Vec<Violation> {
        let cx = CheckContext {
            oracles: &self.oracles,
            order: self.cfg.dn_order,
            split_width: self.cfg.split_width,
            next_case: self.next_case,
        };
        check_stage_invariants(snap, &cx)
    }
}

fn has_waiting_block(s: &Snapshot) -> bool {
    s.intervals.iter().any(|(&(alpha, rho), t)| {
        let e = label_len_at(s.mode, s.addr(alpha).len());
        let prefix = Label::new(e as u8, rho);
        t.entries.iter().enumerate().any(|(i, en)| {
            let lo = if i == 0 { 0 } else { t.entries[i - 1].f };
            en.status == IntervalStatus::Waiting
                && s.balls.iter().any(|b| b.x >= lo && b.x < en.f && b.label.prefix(e) == prefix)
        })
    })
}

/// A violation-free HHS snapshot with a populated waiting block and a non-pull next stage.
pub fn hhs_fixture() -> Fixture {
    let mut cfg = golden_hhs();
    cfg.budget = 3000;
    let oracles = cfg.validate().expect("golden config validates");
    let mut e = Engine::new(cfg.clone(), Arc::new(oracles.clone()));
    while !e.is_done() {
        let snap = e.snapshot();
        let next_case = e.step();
        if snap.stage < 200 || matches!(next_case, None | Some(Case::Pull)) || !has_waiting_block(&snap) {
            continue;
        }
        let fx = Fixture { cfg: cfg.clone(), oracles: oracles.clone(), snap, next_case };
        if fx.check(&fx.snap).is_empty() && fx.snap.balls.iter().any(|b| fx.snap.addr(b.node).len() >= 3) {
            return fx;
        }
    }
    panic!("no suitable snapshot within the budget");
}

/// One mutated copy of `fx.snap` per invariant class.
pub fn mutations(fx: &Fixture) -> Vec<(InvariantClass, Snapshot)> {
    let s = &fx.snap;
    let mut out = Vec::new();

    // Drop one ball from the machine.
    let mut m = s.clone();
    m.balls.remove(0);
    out.push((InvariantClass::RootView, m));

    // Put the smallest resident ball at the deepest node, keeping its label length right.
    let mut m = s.clone();
    let deep = (0..m.nodes.len()).max_by_key(|&i| m.nodes[i].len()).expect("nodes") as u32;
    let len = m.addr(deep).len();
    let i = (0..m.balls.len()).min_by_key(|&i| m.balls[i].x).expect("balls");
    assert!(m.balls[i].x + 2 < len as u64, "deepest node too shallow for the mutation");
    let want = label_len_at(m.mode, len);
    let l = m.balls[i].label;
    m.balls[i].label = if l.len() >= want { l.prefix(want) } else { (l.len()..want).fold(l, |acc, _| acc.push(0)) };
    m.balls[i].node = deep;
    out.push((InvariantClass::ResidencyDepth, m));

    // Lengthen one label.
    let mut m = s.clone();
    let b = &mut m.balls[0];
    b.label = b.label.push(1);
    out.push((InvariantClass::LabelLength, m));

    // Give an interval a use above its value.
    let mut m = s.clone();
    let t = m.intervals.values_mut().find(|t| !t.entries.is_empty()).expect("an interval");
    t.entries[0].u = t.entries[0].f + 1;
    out.push((InvariantClass::IntervalDomain, m));

    // Move one ball of a waiting block up to its parent splitting node.
    let mut m = s.clone();
    let mut moved = false;
    'outer: for (&(alpha, rho), t) in &s.intervals {
        let e = label_len_at(s.mode, s.addr(alpha).len());
        let prefix = Label::new(e as u8, rho);
        for (k, en) in t.entries.iter().enumerate() {
            let lo = if k == 0 { 0 } else { t.entries[k - 1].f };
            if en.status != IntervalStatus::Waiting {
                continue;
            }
            if let Some(b) = m.balls.iter_mut().find(|b| b.x >= lo && b.x < en.f && b.label.prefix(e) == prefix) {
                b.node = alpha;
                b.label = b.label.prefix(e);
                moved = true;
                break 'outer;
            }
        }
    }
    assert!(moved, "fixture has a populated waiting block");
    out.push((InvariantClass::IntervalLocation, m));
    out
}
