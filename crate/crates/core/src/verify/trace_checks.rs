//! Checks over the event sequence of a whole trace.

use std::collections::HashMap;

use serde::Serialize;

use crate::addr::{kleene_brouwer_leq_with, Outcome, TreeAddress};
use crate::label::Label;
use crate::oracles::Oracles;
use crate::trace::{RunTrace, TraceEvent};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TraceViolation {
    pub check: &'static str,
    pub stage: u64,
    pub detail: String,
}

/// Pulls and releases strictly descend in the Kleene–Brouwer order.
pub fn check_kb_monotone(trace: &RunTrace) -> Vec<TraceViolation> {
    let order = trace.header.config.dn_order;
    let mut out = Vec::new();
    for ev in &trace.events {
        if let TraceEvent::Pull { stage, x, from, to, .. } = ev {
            if from == to || !kleene_brouwer_leq_with(to, from, order) {
                out.push(TraceViolation {
                    check: "kb-monotone",
                    stage: *stage,
                    detail: format!("ball {x} moved from {} up to {}", from.render(), to.render()),
                });
            }
        }
    }
    out
}

/// `|Q_{s+1}| = |Q_s| + 2n + 1` at every new-balls stage.
pub fn check_q_growth(trace: &RunTrace) -> Vec<TraceViolation> {
    let mut out = Vec::new();
    for ev in &trace.events {
        if let TraceEvent::NewBalls { stage, n, q_before, q_after, .. } = ev {
            if *q_before != n * n || *q_after != q_before + 2 * n + 1 {
                out.push(TraceViolation {
                    check: "q-growth",
                    stage: *stage,
                    detail: format!("n = {n}, |Q| went {q_before} -> {q_after}"),
                });
            }
        }
    }
    out
}

/// Every release sends the `k` least balls of the block to `ρ0` and the rest to `ρ1`.
pub fn check_release_split(trace: &RunTrace) -> Vec<TraceViolation> {
    let mut out = Vec::new();
    for ev in &trace.events {
        if let TraceEvent::Release { stage, k, zero, one, .. } = ev {
            let mut all: Vec<u64> = zero.iter().chain(one).copied().collect();
            all.sort_unstable();
            let cut = (*k as usize).min(all.len());
            if zero[..] != all[..cut] || one[..] != all[cut..] {
                out.push(TraceViolation {
                    check: "release-split",
                    stage: *stage,
                    detail: format!("block {all:?} split as {zero:?} / {one:?} with k = {k}"),
                });
            }
        }
    }
    out
}

type Key = (TreeAddress, Label);

/// Undefinitions only at new-balls stages, caused by an `A`-change below the use;
/// establishments extend the domain by exactly one; releases and reassignments touch defined blocks.
pub fn check_interval_discipline(trace: &RunTrace, oracles: &Oracles) -> Vec<TraceViolation> {
    let mut out = Vec::new();
    let mut uses: HashMap<Key, Vec<u64>> = HashMap::new();
    let bad = |stage: u64, detail: String| TraceViolation { check: "interval-discipline", stage, detail };
    let mut by_stage: Vec<(u64, Vec<&TraceEvent>)> = Vec::new();
    for ev in &trace.events {
        match by_stage.last_mut() {
            Some((s, v)) if *s == ev.stage() => v.push(ev),
            _ => by_stage.push((ev.stage(), vec![ev])),
        }
    }
    for (stage, evs) in by_stage {
        let new_balls = evs.iter().find_map(|e| match e {
            TraceEvent::NewBalls { n, .. } => Some(*n),
            _ => None,
        });
        for ev in &evs {
            match ev {
                TraceEvent::Establish { alpha, rho, k, u, f, .. } => {
                    let v = uses.entry((alpha.clone(), *rho)).or_default();
                    if *k != v.len() as u64 + 1 || u > f {
                        out.push(bad(stage, format!("interval {k} at {} established out of order", alpha.render())));
                    }
                    v.push(*u);
                }
                TraceEvent::Undefine { alpha, rho, k, cause, .. } => {
                    let Some(n) = new_balls else {
                        out.push(bad(stage, format!("interval {k} at {} undefined outside a new-balls stage", alpha.render())));
                        continue;
                    };
                    if *cause != stage {
                        out.push(bad(stage, format!("undefinition cause {cause} is not the stage")));
                    }
                    let v = uses.entry((alpha.clone(), *rho)).or_default();
                    let u = v.get(*k as usize - 1).copied();
                    let justified = u.is_some_and(|u| (0..u.min(oracles.universe)).any(|y| oracles.a.in_stage(y, n + 1) && !oracles.a.in_stage(y, n)));
                    if !justified {
                        out.push(bad(stage, format!("interval {k} at {} undefined without an A-change below its use", alpha.render())));
                    }
                }
                TraceEvent::Release { alpha, rho, k, from, .. } | TraceEvent::Reassign { alpha, rho, k, to: from, .. } => {
                    let defined = uses.get(&(alpha.clone(), *rho)).map_or(0, |v| v.len() as u64);
                    if *k == 0 || *k > defined {
                        out.push(bad(stage, format!("block {k} of {} used while undefined", alpha.render())));
                    }
                    if from.parent().as_ref() != Some(alpha) || !matches!(from.last(), Some(Outcome::SplitChildIndex(_))) {
                        out.push(bad(stage, format!("{} is not a split child of {}", from.render(), alpha.render())));
                    }
                }
                _ => {}
            }
        }
        for ev in &evs {
            if let TraceEvent::Undefine { alpha, rho, k, .. } = ev {
                if let Some(v) = uses.get_mut(&(alpha.clone(), *rho)) {
                    v.truncate(*k as usize - 1);
                }
            }
        }
    }
    out
}

/// All trace-level checks.
pub fn check_trace(trace: &RunTrace, oracles: &Oracles) -> Vec<TraceViolation> {
    let mut out = check_kb_monotone(trace);
    out.extend(check_q_growth(trace));
    out.extend(check_release_split(trace));
    out.extend(check_interval_discipline(trace, oracles));
    out
}
