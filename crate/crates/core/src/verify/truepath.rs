//! Horizon-relative estimate of the true path.

use std::collections::{HashMap, HashSet};
use std::sync::Arc;

use serde::Serialize;

use crate::addr::{role_at, Outcome, Role, TreeAddress};
use crate::engine::{candidate_outcomes, Engine};
use crate::oracles::ScriptError;
use crate::trace::{RunTrace, TraceEvent};

use super::zfamily::window_start;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TruePathEstimate {
    /// Nodes below the root, each extending the previous one.
    pub nodes: Vec<TreeAddress>,
    pub evidence: Vec<String>,
    /// The descent stopped before the requested depth.
    pub truncated: bool,
    pub window_start: u64,
}

impl TruePathEstimate {
    pub fn last(&self) -> TreeAddress {
        self.nodes.last().cloned().unwrap_or_else(TreeAddress::root)
    }
}

/// Greedy leftmost descent over horizon data, up to `depth` nodes.
///
/// Deciding nodes take the leftmost child whose ℓ grew within the final window; parent
/// splitting nodes take the leftmost child that released in the window; split children
/// take their unique child.
pub fn infer_true_path(trace: &RunTrace, depth: usize) -> Result<TruePathEstimate, ScriptError> {
    let cfg = &trace.header.config;
    let ws = window_start(trace.header.stages, cfg.verify.window);
    let oracles = Arc::new(cfg.validate()?);
    let mut e = Engine::new(cfg.clone(), oracles);
    while e.stage() < ws && e.step().is_some() {}
    let before = e.child_ells();
    while e.stage() < trace.header.stages && e.step().is_some() {}
    let samples = EllSamples { before, after: e.child_ells() };
    Ok(infer_true_path_sampled(trace, depth, &samples))
}

/// ℓ of every candidate child at the window start and at the horizon.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EllSamples {
    pub before: HashMap<TreeAddress, u64>,
    pub after: HashMap<TreeAddress, u64>,
}

/// As [`infer_true_path`], with ℓ samples recorded during the run.
pub fn infer_true_path_sampled(trace: &RunTrace, depth: usize, samples: &EllSamples) -> TruePathEstimate {
    let cfg = &trace.header.config;
    let ws = window_start(trace.header.stages, cfg.verify.window);
    let released: HashSet<TreeAddress> = trace
        .events
        .iter()
        .filter(|ev| ev.stage() >= ws)
        .filter_map(|ev| match ev {
            TraceEvent::Release { from, .. } => Some(from.clone()),
            _ => None,
        })
        .collect();
    descend(cfg.mode, cfg, depth, &samples.before, &samples.after, &released, ws)
}

fn descend(
    mode: crate::addr::Mode,
    cfg: &crate::config::RunConfig,
    depth: usize,
    before: &HashMap<TreeAddress, u64>,
    after: &HashMap<TreeAddress, u64>,
    released: &HashSet<TreeAddress>,
    ws: u64,
) -> TruePathEstimate {
    let mut cur = TreeAddress::root();
    let mut nodes = Vec::new();
    let mut evidence = Vec::new();
    let limit = depth.min(cfg.max_len());
    while nodes.len() < limit {
        let next = match role_at(mode, cur.len()) {
            Role::Decision(_) | Role::Tree(_) => candidate_outcomes(mode, cur.len(), cfg.width, cfg.dn_order)
                .into_iter()
                .map(|o| cur.child(o))
                .find_map(|b| {
                    let (x, y) = (before.get(&b).copied().unwrap_or(0), after.get(&b).copied()?);
                    (y > x).then(|| {
                        let ev = format!("{}: ell grew {x} -> {y}", b.render());
                        (b, ev)
                    })
                }),
            Role::ParentSplit(_) => (0..cfg.split_width).map(|m| cur.child(Outcome::SplitChildIndex(m))).find_map(|b| {
                released.contains(&b).then(|| {
                    let ev = format!("{}: released after stage {ws}", b.render());
                    (b, ev)
                })
            }),
            Role::SplitChild(_) => {
                let b = cur.child(Outcome::ChildLink);
                let ev = format!("{}: unique child", b.render());
                Some((b, ev))
            }
        };
        let Some((b, ev)) = next else { break };
        nodes.push(b.clone());
        evidence.push(ev);
        cur = b;
    }
    let truncated = nodes.len() < depth;
    TruePathEstimate { nodes, evidence, truncated, window_start: ws }
}
