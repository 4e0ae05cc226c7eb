//! Deterministic re-execution of a trace.

use std::fmt;
use std::sync::Arc;

use crate::config::RunConfig;
use crate::engine::Engine;
use crate::trace::{RunTrace, TraceEvent};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReplayMismatch {
    pub stage: u64,
    pub detail: String,
}

impl fmt::Display for ReplayMismatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "replay diverges at stage {}: {}", self.stage, self.detail)
    }
}

fn stage_events(events: &[TraceEvent], stage: u64, from: &mut usize) -> Vec<TraceEvent> {
    let start = *from;
    while *from < events.len() && events[*from].stage() == stage {
        *from += 1;
    }
    events[start..*from].to_vec()
}

/// Replays the trace under its own header config.
pub fn replay(trace: &RunTrace) -> Result<(), ReplayMismatch> {
    replay_with(trace, &trace.header.config)
}

/// Replays the trace under `cfg`; reports the first divergent stage.
pub fn replay_with(trace: &RunTrace, cfg: &RunConfig) -> Result<(), ReplayMismatch> {
    if cfg.digest() != trace.header.digest {
        return Err(ReplayMismatch { stage: 0, detail: "config digest differs from the trace header".into() });
    }
    let oracles = cfg.validate().map_err(|e| ReplayMismatch { stage: 0, detail: e.to_string() })?;
    let mut e = Engine::new(cfg.clone(), Arc::new(oracles));
    let mut pos = 0;
    let mut snaps = trace.snapshots.iter().peekable();
    let stages = trace.header.stages;
    for s in 0..stages {
        while let Some(r) = snaps.peek() {
            if r.stage != s {
                break;
            }
            if r.hash != e.state_hash() {
                return Err(ReplayMismatch { stage: s, detail: "snapshot hash differs".into() });
            }
            snaps.next();
        }
        let Some(case) = e.step() else {
            return Err(ReplayMismatch { stage: s, detail: "engine halted early".into() });
        };
        if trace.cases.get(s as usize) != Some(&case) {
            return Err(ReplayMismatch { stage: s, detail: format!("case {case:?} differs from the recorded one") });
        }
        let expected = stage_events(&trace.events, s, &mut pos);
        let got = e.take_events();
        if expected != got {
            let i = expected.iter().zip(&got).take_while(|(a, b)| a == b).count();
            return Err(ReplayMismatch {
                stage: s,
                detail: format!("event {i} differs ({} recorded, {} replayed)", expected.len(), got.len()),
            });
        }
    }
    if pos != trace.events.len() {
        return Err(ReplayMismatch { stage: stages, detail: "trailing events after the last stage".into() });
    }
    if trace.cases.len() as u64 != stages {
        return Err(ReplayMismatch { stage: stages, detail: "case count differs from stage count".into() });
    }
    for r in snaps {
        if r.stage != stages || r.hash != e.state_hash() {
            return Err(ReplayMismatch { stage: r.stage, detail: "final snapshot differs".into() });
        }
    }
    Ok(())
}
