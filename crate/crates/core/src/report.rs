//! Plain-text run reports.

use std::collections::BTreeMap;
use std::fmt::Write;

use crate::addr::Mode;
use crate::balg::{build_ba_from_tree, compare_ba};
use crate::machine::{Case, OffReason};
use crate::oracles::Oracles;
use crate::trace::RunTrace;
use crate::verify::{
    check_kb_monotone, check_lattice, check_q_growth, check_release_split, check_interval_discipline, extract_z,
    fates, infer_true_path, infer_true_path_sampled, window_start, EllSamples, TraceViolation, Violation,
};

/// Extra inputs available when the report is written right after a run.
#[derive(Clone, Copy, Debug, Default)]
pub struct ReportInputs<'a> {
    /// Per-stage invariant violations, when the run checked them.
    pub violations: Option<&'a [Violation]>,
    /// ℓ samples from the run; without them the path is inferred by re-running.
    pub ells: Option<&'a EllSamples>,
}

const SHOWN: usize = 10;

fn removed_name(mode: Mode) -> &'static str {
    match mode {
        Mode::Maximal => "M",
        _ => "H",
    }
}

fn check_line(out: &mut String, name: &str, vs: &[TraceViolation]) {
    if vs.is_empty() {
        let _ = writeln!(out, "  {name}: pass");
        return;
    }
    let _ = writeln!(out, "  {name}: FAIL ({} violations)", vs.len());
    for v in vs.iter().take(SHOWN) {
        let _ = writeln!(out, "    stage {}: {}", v.stage, v.detail);
    }
}

/// The report for `trace`. Mode-gated: MAXIMAL runs have no Z-family, lattice or algebra sections.
pub fn render_report(trace: &RunTrace, oracles: &Oracles, inputs: ReportInputs<'_>) -> String {
    let h = &trace.header;
    let cfg = &h.config;
    let mut out = String::new();
    let ws = window_start(h.stages, cfg.verify.window);
    let _ = writeln!(out, "pinball report");
    let _ = writeln!(out, "  mode: {}", h.mode);
    let _ = writeln!(out, "  digest: {}", h.digest);
    let _ = writeln!(out, "  seed: {}", h.seed);
    let _ = writeln!(out, "  budget: {}", h.budget);
    let _ = writeln!(out, "  stages: {}", h.stages);
    let _ = writeln!(out, "  window: {} (window start {ws})", cfg.verify.window);
    let _ = writeln!(out, "  epsilon: {}", cfg.verify.epsilon);
    let _ = writeln!(out, "  note: permanence and the true path are estimates relative to the horizon");
    if h.stages == 0 {
        let _ = writeln!(out, "\n(empty trace)");
        return out;
    }
    let truncated = (trace.cases.len() as u64) < h.stages;
    if truncated {
        let _ = writeln!(out, "\nTRUNCATED: {} of {} stages present; partial report", trace.cases.len(), h.stages);
    }

    let _ = writeln!(out, "\n[stages by case]");
    let mut cases: BTreeMap<Case, u64> = BTreeMap::new();
    for c in &trace.cases {
        *cases.entry(*c).or_default() += 1;
    }
    for (c, n) in &cases {
        let _ = writeln!(out, "  {}: {n}", c.name());
    }
    let _ = writeln!(out, "\n[events]");
    let mut kinds: BTreeMap<&str, u64> = BTreeMap::new();
    for e in &trace.events {
        *kinds.entry(e.kind()).or_default() += 1;
    }
    for (k, n) in &kinds {
        let _ = writeln!(out, "  {k}: {n}");
    }

    let f = fates(trace);
    let mut on = 0;
    let mut permanent = 0;
    let mut off: BTreeMap<&str, u64> = BTreeMap::new();
    for b in &f {
        match (&b.at, b.off) {
            (Some(_), _) => {
                on += 1;
                if b.last_move.is_some_and(|s| s < ws) {
                    permanent += 1;
                }
            }
            (None, Some(OffReason::Eliminated)) => *off.entry("eliminated").or_default() += 1,
            (None, Some(OffReason::EnteredA)) => *off.entry("entered A").or_default() += 1,
            (None, _) => *off.entry("never placed").or_default() += 1,
        }
    }
    let _ = writeln!(out, "\n[ball census]");
    let _ = writeln!(out, "  universe: {}", cfg.script.universe);
    let _ = writeln!(out, "  on the machine: {on}");
    let _ = writeln!(out, "  permanent residents: {permanent}");
    let _ = writeln!(
        out,
        "  removed into {}: {}",
        removed_name(h.mode),
        off.get("eliminated").unwrap_or(&0) + off.get("entered A").unwrap_or(&0)
    );
    for (k, n) in &off {
        let _ = writeln!(out, "    {k}: {n}");
    }

    let _ = writeln!(out, "\n[checks]");
    check_line(&mut out, "kb-monotone", &check_kb_monotone(trace));
    check_line(&mut out, "q-growth", &check_q_growth(trace));
    check_line(&mut out, "release-split", &check_release_split(trace));
    check_line(&mut out, "interval-discipline", &check_interval_discipline(trace, oracles));
    match inputs.violations {
        None => {
            let _ = writeln!(out, "  stage invariants: not checked");
        }
        Some([]) => {
            let _ = writeln!(out, "  stage invariants: pass");
        }
        Some(vs) => {
            let mut by: BTreeMap<&str, usize> = BTreeMap::new();
            for v in vs {
                *by.entry(v.class.name()).or_default() += 1;
            }
            let _ = writeln!(out, "  stage invariants: FAIL ({} violations)", vs.len());
            for (c, n) in by {
                let _ = writeln!(out, "    {c}: {n}");
            }
            for v in vs.iter().take(SHOWN) {
                let _ = writeln!(out, "    {v}");
            }
        }
    }

    if truncated {
        return out;
    }

    let depth = cfg.max_len();
    let path = match inputs.ells {
        Some(s) => Some(infer_true_path_sampled(trace, depth, s)),
        None => infer_true_path(trace, depth).ok(),
    };
    let _ = writeln!(out, "\n[true path] (estimate)");
    match &path {
        None => {
            let _ = writeln!(out, "  unavailable: the configuration does not validate");
        }
        Some(p) => {
            let _ = writeln!(out, "  node: {}", p.last().render());
            let _ = writeln!(out, "  length: {} of {depth}{}", p.nodes.len(), if p.truncated { " (truncated)" } else { "" });
            for e in &p.evidence {
                let _ = writeln!(out, "    {e}");
            }
        }
    }

    if h.mode == Mode::Maximal {
        return out;
    }
    let zd = cfg.verify.z_depth;
    let z = extract_z(trace, zd);
    let _ = writeln!(out, "\n[z family] depth {zd}");
    for (rho, s) in &z.sets {
        let _ = writeln!(out, "  {:<6} {}", rho.to_string(), s.len());
    }
    let eps = cfg.verify.epsilon;
    let nodes = path.as_ref().map(|p| p.nodes.clone()).unwrap_or_default();
    let lat = check_lattice(&z, &oracles.w, &nodes, cfg.levels, eps);
    let _ = writeln!(out, "\n[lattice] epsilon {eps}");
    for s in &lat.siblings {
        let _ = writeln!(
            out,
            "  split {:<6} overlap {}  union exceptions {}",
            s.rho.to_string(),
            s.overlap.len(),
            s.union_exceptions
        );
    }
    for d in &lat.decisions {
        match (&d.d, &d.node, d.exceptions) {
            (Some(set), Some(node), Some(x)) => {
                let set: Vec<String> = set.iter().map(|l| l.to_string()).collect();
                let _ = writeln!(
                    out,
                    "  W{} ~ union of Z over {{{}}} below {}: residents {}  exceptions {x}",
                    d.e,
                    set.join(","),
                    node.render(),
                    d.residents
                );
            }
            _ => {
                let _ = writeln!(out, "  W{}: no decision on the inferred path", d.e);
            }
        }
    }
    let _ = writeln!(
        out,
        "  disjoint: {}  unions: {}  decisions: {}  min |Z|: {}",
        yes(lat.disjoint()),
        yes(lat.unions_ok()),
        yes(lat.decisions_ok()),
        lat.min_size()
    );

    if h.mode == Mode::Balg {
        let _ = writeln!(out, "\n[algebra]");
        match &oracles.tree {
            None => {
                let _ = writeln!(out, "  no scripted tree");
            }
            Some(t) => {
                let a = build_ba_from_tree(&z.tree(eps), zd);
                let b = build_ba_from_tree(t.members(), zd);
                let verdict = if compare_ba(&a, &b) { "match" } else { "mismatch" };
                let _ = writeln!(out, "  algebra@depth {zd}: {verdict}");
                let _ = writeln!(out, "    extracted: {:?}", a.signature());
                let _ = writeln!(out, "    scripted:  {:?}", b.signature());
            }
        }
    }
    out
}

fn yes(b: bool) -> &'static str {
    if b {
        "ok"
    } else {
        "FAIL"
    }
}
