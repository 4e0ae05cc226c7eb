//! Runs a configuration to its budget, producing a trace.

use std::sync::Arc;

use crate::config::RunConfig;
use crate::engine::Engine;
use crate::machine::Snapshot;
use crate::oracles::ScriptError;
use crate::trace::{RunTrace, SnapshotRecord, TraceHeader, TRACE_FORMAT};
use crate::verify::{check_stage_invariants, window_start, CheckContext, EllSamples, Violation};

#[derive(Clone, Copy, Debug, Default)]
pub struct RunOptions {
    /// Check every registered invariant at every stage.
    pub check_invariants: bool,
    /// Keep full snapshots at each snapshot period.
    pub keep_snapshots: bool,
    /// Sample ℓ of all candidate children at the window start and at the horizon.
    pub sample_ells: bool,
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub trace: RunTrace,
    pub engine: Engine,
    pub violations: Vec<Violation>,
    pub snapshots: Vec<Snapshot>,
    pub ells: Option<EllSamples>,
}

fn record(e: &Engine) -> SnapshotRecord {
    SnapshotRecord {
        stage: e.stage(),
        hash: e.state_hash(),
        n: e.enumeration().n(),
        on_machine: e.balls().iter().filter(|b| b.node().is_some()).count() as u64,
        removed: (0..e.oracles().universe).filter(|&x| e.in_h(x)).count() as u64,
    }
}

pub fn header(cfg: &RunConfig, stages: u64) -> TraceHeader {
    TraceHeader {
        format: TRACE_FORMAT.to_string(),
        mode: cfg.mode,
        digest: cfg.digest(),
        seed: cfg.seed,
        budget: cfg.budget,
        stages,
        config: cfg.clone(),
    }
}

/// Runs `cfg` from stage 0 to its budget.
pub fn execute(cfg: &RunConfig, opts: RunOptions) -> Result<RunOutcome, ScriptError> {
    let oracles = Arc::new(cfg.validate()?);
    let mut e = Engine::new(cfg.clone(), Arc::clone(&oracles));
    let period = cfg.snapshot_period.max(1);
    let mut records = Vec::new();
    let mut snapshots = Vec::new();
    let mut violations = Vec::new();
    let ws = window_start(cfg.budget, cfg.verify.window);
    let mut before = None;
    while !e.is_done() {
        if opts.sample_ells && e.stage() == ws {
            before = Some(e.child_ells());
        }
        let at_period = e.stage().is_multiple_of(period);
        let snap = (opts.check_invariants || (opts.keep_snapshots && at_period)).then(|| e.snapshot());
        if at_period {
            records.push(record(&e));
        }
        let case = e.step();
        if let Some(snap) = snap {
            if opts.check_invariants {
                let cx = CheckContext {
                    oracles: &oracles,
                    order: cfg.dn_order,
                    split_width: cfg.split_width,
                    next_case: case,
                };
                violations.extend(check_stage_invariants(&snap, &cx));
            }
            if opts.keep_snapshots && at_period {
                snapshots.push(snap);
            }
        }
    }
    let last = record(&e);
    if records.last().map(|r| r.stage) != Some(last.stage) {
        records.push(last);
    }
    if opts.check_invariants {
        let cx = CheckContext { oracles: &oracles, order: cfg.dn_order, split_width: cfg.split_width, next_case: None };
        violations.extend(check_stage_invariants(&e.snapshot(), &cx));
    }
    if opts.keep_snapshots {
        snapshots.push(e.snapshot());
    }
    let ells = opts.sample_ells.then(|| EllSamples { before: before.unwrap_or_default(), after: e.child_ells() });
    let trace = RunTrace {
        header: header(cfg, e.stage()),
        events: e.events().to_vec(),
        snapshots: records,
        cases: e.cases().to_vec(),
    };
    Ok(RunOutcome { trace, engine: e, violations, snapshots, ells })
}
