//! Trace events and their JSON-lines form.

use serde::{Deserialize, Serialize};

use crate::addr::{Mode, TreeAddress};
use crate::label::Label;

/// One construction action. `hash` is the state hash at the start of `stage`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "ev", rename_all = "kebab-case")]
pub enum TraceEvent {
    Pull {
        stage: u64,
        hash: u64,
        x: u64,
        from: TreeAddress,
        to: TreeAddress,
        label: Label,
    },
    Eliminate {
        stage: u64,
        hash: u64,
        x: u64,
        at: TreeAddress,
        by: TreeAddress,
        label: Label,
    },
    Release {
        stage: u64,
        hash: u64,
        alpha: TreeAddress,
        rho: Label,
        k: u64,
        from: TreeAddress,
        zero: Vec<u64>,
        one: Vec<u64>,
    },
    Reassign {
        stage: u64,
        hash: u64,
        alpha: TreeAddress,
        rho: Label,
        k: u64,
        to: TreeAddress,
    },
    Establish {
        stage: u64,
        hash: u64,
        alpha: TreeAddress,
        rho: Label,
        k: u64,
        f: u64,
        u: u64,
        at: TreeAddress,
    },
    Undefine {
        stage: u64,
        hash: u64,
        alpha: TreeAddress,
        rho: Label,
        k: u64,
        cause: u64,
    },
    NewBalls {
        stage: u64,
        hash: u64,
        n: u64,
        q_before: u64,
        q_after: u64,
        entered_a: Vec<u64>,
        placed: Vec<u64>,
    },
}

impl TraceEvent {
    pub fn stage(&self) -> u64 {
        match self {
            TraceEvent::Pull { stage, .. }
            | TraceEvent::Eliminate { stage, .. }
            | TraceEvent::Release { stage, .. }
            | TraceEvent::Reassign { stage, .. }
            | TraceEvent::Establish { stage, .. }
            | TraceEvent::Undefine { stage, .. }
            | TraceEvent::NewBalls { stage, .. } => *stage,
        }
    }

    pub fn hash(&self) -> u64 {
        match self {
            TraceEvent::Pull { hash, .. }
            | TraceEvent::Eliminate { hash, .. }
            | TraceEvent::Release { hash, .. }
            | TraceEvent::Reassign { hash, .. }
            | TraceEvent::Establish { hash, .. }
            | TraceEvent::Undefine { hash, .. }
            | TraceEvent::NewBalls { hash, .. } => *hash,
        }
    }

    /// Normalizes every address in the event under `mode`.
    pub fn normalize(&mut self, mode: Mode) {
        match self {
            TraceEvent::Pull { from, to, .. } => {
                from.normalize(mode);
                to.normalize(mode);
            }
            TraceEvent::Eliminate { at, by, .. } => {
                at.normalize(mode);
                by.normalize(mode);
            }
            TraceEvent::Release { alpha, from, .. } => {
                alpha.normalize(mode);
                from.normalize(mode);
            }
            TraceEvent::Reassign { alpha, to, .. } | TraceEvent::Establish { alpha, at: to, .. } => {
                alpha.normalize(mode);
                to.normalize(mode);
            }
            TraceEvent::Undefine { alpha, .. } => alpha.normalize(mode),
            TraceEvent::NewBalls { .. } => {}
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            TraceEvent::Pull { .. } => "pull",
            TraceEvent::Eliminate { .. } => "eliminate",
            TraceEvent::Release { .. } => "release",
            TraceEvent::Reassign { .. } => "reassign",
            TraceEvent::Establish { .. } => "establish",
            TraceEvent::Undefine { .. } => "undefine",
            TraceEvent::NewBalls { .. } => "new-balls",
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("event serializes")
    }
}

/// First line of a trace file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceHeader {
    pub format: String,
    pub mode: Mode,
    pub digest: String,
    pub seed: u64,
    pub budget: u64,
    pub stages: u64,
    pub config: crate::config::RunConfig,
}

pub const TRACE_FORMAT: &str = "pinball-trace/1";

/// A compact state summary stored every snapshot period.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SnapshotRecord {
    pub stage: u64,
    pub hash: u64,
    pub n: u64,
    pub on_machine: u64,
    pub removed: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunTrace {
    pub header: TraceHeader,
    pub events: Vec<TraceEvent>,
    pub snapshots: Vec<SnapshotRecord>,
    /// Case taken at each stage.
    pub cases: Vec<crate::machine::Case>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rec", rename_all = "kebab-case")]
enum Line {
    Header(Box<TraceHeader>),
    Event(TraceEvent),
    Snapshot(SnapshotRecord),
    Cases { cases: String },
}

fn case_char(c: crate::machine::Case) -> char {
    use crate::machine::Case::*;
    match c {
        Pull => 'a',
        Eliminate => 'b',
        Release => 'c',
        Establish => 'd',
        NewBalls => 'e',
    }
}

fn char_case(c: char) -> Option<crate::machine::Case> {
    use crate::machine::Case::*;
    Some(match c {
        'a' => Pull,
        'b' => Eliminate,
        'c' => Release,
        'd' => Establish,
        'e' => NewBalls,
        _ => return None,
    })
}

impl RunTrace {
    /// JSON lines: header, events, snapshots, then the case string.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        let mut push = |l: &Line| {
            out.push_str(&serde_json::to_string(l).expect("line serializes"));
            out.push('\n');
        };
        push(&Line::Header(Box::new(self.header.clone())));
        for e in &self.events {
            push(&Line::Event(e.clone()));
        }
        for s in &self.snapshots {
            push(&Line::Snapshot(s.clone()));
        }
        push(&Line::Cases { cases: self.cases.iter().map(|c| case_char(*c)).collect() });
        out
    }

    pub fn from_jsonl(text: &str) -> Result<RunTrace, String> {
        let mut header = None;
        let mut events = Vec::new();
        let mut snapshots = Vec::new();
        let mut cases = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let l: Line = serde_json::from_str(line).map_err(|e| format!("line {}: {e}", i + 1))?;
            match l {
                Line::Header(h) => header = Some(*h),
                Line::Event(e) => events.push(e),
                Line::Snapshot(s) => snapshots.push(s),
                Line::Cases { cases: c } => {
                    cases = c
                        .chars()
                        .map(|ch| char_case(ch).ok_or_else(|| format!("line {}: bad case {ch:?}", i + 1)))
                        .collect::<Result<_, _>>()?
                }
            }
        }
        let header: TraceHeader = header.ok_or("missing header")?;
        for e in &mut events {
            e.normalize(header.mode);
        }
        Ok(RunTrace { header, events, snapshots, cases })
    }

    pub fn events_jsonl(&self) -> String {
        let mut out = String::new();
        for e in &self.events {
            out.push_str(&e.to_json());
            out.push('\n');
        }
        out
    }
}
