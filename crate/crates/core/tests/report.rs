//! Report sections and their mode gating.

use pinball::report::{render_report, ReportInputs};
use pinball::run::{execute, RunOptions};
use pinball::scenarios::{golden_balg, golden_hhs, golden_maximal, GoldenTree};
use pinball::trace::RunTrace;
use pinball::RunConfig;

fn report(cfg: &RunConfig, edit: impl FnOnce(&mut RunTrace)) -> String {
    let out = execute(cfg, RunOptions { sample_ells: true, ..Default::default() }).expect("valid");
    let mut t = out.trace;
    edit(&mut t);
    render_report(&t, &cfg.validate().expect("valid"), ReportInputs { violations: None, ells: out.ells.as_ref() })
}

fn section<'a>(text: &'a str, name: &str) -> Vec<&'a str> {
    let head = format!("[{name}]");
    text.lines().skip_while(|l| !l.starts_with(&head)).skip(1).take_while(|l| !l.is_empty()).collect()
}

#[test]
fn golden_hhs_report_sections() {
    let r = report(&golden_hhs(), |_| {});
    assert!(r.contains("  mode: hhs\n"));
    assert_eq!(section(&r, "z family"), ["  _      514", "  0      229", "  1      284", "  00     108", "  01     120", "  10     106", "  11     177"]);
    let lattice = section(&r, "lattice");
    assert_eq!(lattice.last().copied(), Some("  disjoint: ok  unions: ok  decisions: ok  min |Z|: 106"));
    assert!(lattice.iter().any(|l| l.starts_with("  W1 ~ union of Z over {") && l.ends_with("residents 501  exceptions 0")));
    for name in ["stages by case", "events", "ball census", "checks", "true path"] {
        assert!(!section(&r, name).is_empty(), "{name}");
    }
    assert!(section(&r, "checks").iter().all(|l| l.ends_with("pass") || l.ends_with("not checked")));
    assert!(!r.contains("[algebra]"));
}

#[test]
fn maximal_report_has_no_z_sections() {
    let r = report(&golden_maximal(), |_| {});
    assert!(r.contains("removed into M"));
    assert!(section(&r, "true path").iter().any(|l| l == &"  node: inf0.fin0.fin0"));
    for name in ["z family", "lattice", "algebra"] {
        assert!(!r.contains(&format!("[{name}]")), "{name}");
    }
}

#[test]
fn balg_report_has_the_algebra_verdict() {
    let r = report(&golden_balg(GoldenTree::Branch), |_| {});
    assert!(r.contains("removed into H"));
    assert_eq!(section(&r, "algebra").first().copied(), Some("  algebra@depth 2: match"));
}

#[test]
fn empty_trace_has_only_the_header() {
    let r = report(&golden_maximal(), |t| {
        t.header.stages = 0;
        t.events.clear();
        t.cases.clear();
        t.snapshots.clear();
    });
    assert!(r.contains("  stages: 0\n"));
    assert!(r.trim_end().ends_with("(empty trace)"));
    assert!(!r.contains("[events]"));
}

#[test]
fn truncated_trace_is_flagged() {
    let r = report(&golden_hhs(), |t| {
        t.cases.truncate(4000);
        t.events.retain(|e| e.stage() < 4000);
    });
    assert!(r.contains("TRUNCATED: 4000 of 10000 stages present; partial report"));
    assert!(r.contains("[checks]"));
    assert!(!r.contains("[true path]"));
    assert!(!r.contains("[z family]"));
}
