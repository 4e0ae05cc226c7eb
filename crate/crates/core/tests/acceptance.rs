//! One line per acceptance criterion. Exits 0 unless `PINBALL_STRICT=1` is set and a criterion fails.

mod common;

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use pinball::balg::{build_ba_from_tree, compare_ba};
use pinball::run::{execute, RunOptions, RunOutcome};
use pinball::scenarios::{golden_balg, golden_hhs, golden_maximal, random_config, GoldenTree, Scale};
use pinball::verify::{
    brute_force_run, check_interval_discipline, check_kb_monotone, check_lattice, check_q_growth, check_release_split,
    extract_z, fates, first_divergence, infer_true_path_sampled, replay, InvariantClass, TraceViolation,
};
use pinball::{Label, Mode, RunConfig};

const RANDOM_RUNS: u64 = 20;
const BRUTE_RUNS: u64 = 50;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

struct Run {
    cfg: RunConfig,
    out: RunOutcome,
}

fn class_count(runs: &[Run], class: InvariantClass) -> usize {
    runs.iter().map(|r| r.out.violations.iter().filter(|v| v.class == class).count()).sum()
}

fn trace_count(runs: &[Run], f: impl Fn(&Run) -> Vec<TraceViolation>) -> usize {
    runs.iter().map(|r| f(r).len()).sum()
}

fn first_class(runs: &[Run], class: InvariantClass) -> String {
    runs.iter()
        .find_map(|r| {
            r.out.violations.iter().find(|v| v.class == class).map(|v| format!("{} seed {}: {v}", r.cfg.mode, r.cfg.seed))
        })
        .unwrap_or_default()
}

fn random_runs() -> (Vec<Run>, Duration) {
    let t = Instant::now();
    let mut runs = Vec::new();
    for mode in Mode::all() {
        for seed in 0..RANDOM_RUNS {
            let cfg = random_config(mode, 1000 + seed, Scale::MEDIUM);
            let out = execute(&cfg, RunOptions { check_invariants: true, ..Default::default() }).expect("valid config");
            runs.push(Run { cfg, out });
        }
    }
    (runs, t.elapsed())
}

fn golden_runs() -> Vec<Run> {
    let mut cfgs = vec![golden_maximal(), golden_hhs()];
    cfgs.extend(GoldenTree::ALL.iter().map(|&t| golden_balg(t)));
    cfgs.into_iter()
        .map(|cfg| {
            let out = execute(&cfg, RunOptions { sample_ells: true, ..Default::default() }).expect("valid config");
            Run { cfg, out }
        })
        .collect()
}

fn c1(runs: &[Run], took: Duration) -> Verdict {
    let n = class_count(runs, InvariantClass::RootView);
    let fast = took < Duration::from_secs(10);
    let detail = format!(
        "{} runs of {} stages, {n} violations, {:.2}s for all checked runs (limit 10s) {}",
        runs.len(),
        Scale::MEDIUM.budget,
        took.as_secs_f64(),
        first_class(runs, InvariantClass::RootView)
    );
    verdict(n == 0 && fast, detail)
}

fn c2(runs: &[Run]) -> Verdict {
    let n = trace_count(runs, |r| check_q_growth(&r.out.trace));
    let stages: usize = runs.iter().map(|r| r.out.trace.cases.iter().filter(|c| **c == pinball::Case::NewBalls).count()).sum();
    verdict(n == 0, format!("{stages} new-balls stages, {n} violations"))
}

fn c3(runs: &[Run]) -> Verdict {
    let kb = trace_count(runs, |r| check_kb_monotone(&r.out.trace));
    let depth = class_count(runs, InvariantClass::ResidencyDepth);
    verdict(kb == 0 && depth == 0, format!("kb-monotone {kb}, residency-depth {depth} violations"))
}

fn c4(runs: &[Run], goldens: &[Run]) -> Verdict {
    let split: Vec<&Run> = runs.iter().filter(|r| r.cfg.mode != Mode::Maximal).collect();
    let domain: usize = split.iter().map(|r| r.out.violations.iter().filter(|v| v.class == InvariantClass::IntervalDomain).count()).sum();
    let location: Vec<&Run> =
        split.iter().copied().filter(|r| r.out.violations.iter().any(|v| v.class == InvariantClass::IntervalLocation)).collect();
    let loc_count: usize =
        location.iter().map(|r| r.out.violations.iter().filter(|v| v.class == InvariantClass::IntervalLocation).count()).sum();
    let discipline: usize = split
        .iter()
        .copied()
        .chain(goldens.iter().filter(|r| r.cfg.mode != Mode::Maximal))
        .map(|r| check_interval_discipline(&r.out.trace, &r.cfg.validate().expect("valid")).len())
        .sum();
    let seeds: Vec<String> = location.iter().map(|r| format!("{}:{}", r.cfg.mode, r.cfg.seed)).collect();
    let detail = format!(
        "domain {domain}, discipline {discipline}, location {loc_count} in {} of {} runs [{}] {}",
        location.len(),
        split.len(),
        seeds.join(" "),
        location.first().map(|r| first_class(std::slice::from_ref(*r), InvariantClass::IntervalLocation)).unwrap_or_default()
    );
    verdict(domain == 0 && loc_count == 0 && discipline == 0, detail)
}

fn sibling_overlaps(r: &Run) -> usize {
    let z = extract_z(&r.out.trace, r.cfg.verify.z_depth);
    let mut n = 0;
    for e in 0..z.depth {
        for rho in Label::all_of_len(e) {
            n += z.get(&rho.push(0)).intersection(z.get(&rho.push(1))).count();
        }
    }
    n
}

fn c5(runs: &[Run], goldens: &[Run]) -> Verdict {
    let all: Vec<&Run> = runs.iter().chain(goldens).filter(|r| r.cfg.mode != Mode::Maximal).collect();
    let releases: usize = all
        .iter()
        .map(|r| r.out.trace.events.iter().filter(|e| matches!(e, pinball::TraceEvent::Release { .. })).count())
        .sum();
    let split: usize = all.iter().map(|r| check_release_split(&r.out.trace).len()).sum();
    let overlap: usize = all.iter().map(|r| sibling_overlaps(r)).sum();
    verdict(split == 0 && overlap == 0, format!("{releases} releases, {split} split violations, {overlap} sibling overlaps"))
}

fn c6() -> Verdict {
    let t = Instant::now();
    let cfg = golden_hhs();
    let out = execute(&cfg, RunOptions { sample_ells: true, ..Default::default() }).expect("valid config");
    let or = cfg.validate().expect("valid");
    let path = infer_true_path_sampled(&out.trace, cfg.max_len(), out.ells.as_ref().expect("sampled"));
    let z = extract_z(&out.trace, 2);
    let rep = check_lattice(&z, &or.w, &path.nodes, cfg.levels, 5);
    let took = t.elapsed();
    let decided = rep.decisions.iter().filter(|d| d.exceptions.is_some()).count();
    let detail = format!(
        "disjoint {}, unions {}, decisions {decided}/{} ok {}, min |Z| {}, {:.2}s (limit 5s)",
        rep.disjoint(),
        rep.unions_ok(),
        rep.decisions.len(),
        rep.decisions_ok(),
        rep.min_size(),
        took.as_secs_f64()
    );
    verdict(rep.passes(3) && decided == cfg.levels && took < Duration::from_secs(5), detail)
}

fn c7() -> Verdict {
    let t = Instant::now();
    let mut bad = Vec::new();
    let mut events = 0;
    for mode in Mode::all() {
        for seed in 0..BRUTE_RUNS {
            let cfg = random_config(mode, seed, Scale::TINY);
            let out = execute(&cfg, RunOptions::default()).expect("valid config");
            let b = brute_force_run(&cfg).expect("valid config");
            events += out.trace.events.len();
            let same = first_divergence(&out.trace.events, &b.events).is_none()
                && out.trace.events_jsonl() == events_jsonl(&b.events)
                && out.trace.cases == b.cases
                && fates(&out.trace) == b.fates;
            if !same {
                bad.push(format!("{mode}:{seed}"));
            }
        }
    }
    let took = t.elapsed();
    let detail = format!(
        "{} scenarios, {events} events, {} mismatches {:?}, {:.2}s (limit 30s)",
        3 * BRUTE_RUNS,
        bad.len(),
        bad,
        took.as_secs_f64()
    );
    verdict(bad.is_empty() && took < Duration::from_secs(30), detail)
}

fn events_jsonl(events: &[pinball::TraceEvent]) -> String {
    events.iter().map(|e| e.to_json() + "\n").collect()
}

fn c8(goldens: &[Run]) -> Verdict {
    let mut parts = Vec::new();
    let mut ok = true;
    for (tree, r) in GoldenTree::ALL.iter().zip(goldens.iter().filter(|r| r.cfg.mode == Mode::Balg)) {
        let or = r.cfg.validate().expect("valid");
        let z = extract_z(&r.out.trace, 2);
        let a = build_ba_from_tree(&z.tree(r.cfg.verify.epsilon), 2);
        let b = build_ba_from_tree(or.tree.as_ref().expect("scripted tree").members(), 2);
        let m = compare_ba(&a, &b);
        ok &= m;
        parts.push(format!("{} {}", tree.name(), if m { "match" } else { "mismatch" }));
    }
    verdict(ok && parts.len() == 3, parts.join(", "))
}

fn c9(goldens: &[Run]) -> Verdict {
    let mut cfgs: Vec<RunConfig> = Vec::new();
    for mode in Mode::all() {
        cfgs.extend((0..10).map(|s| random_config(mode, 500 + s, Scale::TINY)));
        cfgs.extend((0..2).map(|s| random_config(mode, 700 + s, Scale::MEDIUM)));
    }
    let mut bad = Vec::new();
    for cfg in &cfgs {
        let a = execute(cfg, RunOptions::default()).expect("valid config").trace.to_jsonl();
        let b = execute(cfg, RunOptions::default()).expect("valid config").trace.to_jsonl();
        if a != b {
            bad.push(format!("{}:{}", cfg.mode, cfg.seed));
        }
    }
    for r in goldens {
        if replay(&r.out.trace).is_err() {
            bad.push(format!("replay {}", r.cfg.mode));
        }
    }
    verdict(bad.is_empty(), format!("{} configs run twice, {} golden replays, differences {:?}", cfgs.len(), goldens.len(), bad))
}

fn c10() -> Verdict {
    let fx = common::hhs_fixture();
    let mut parts = Vec::new();
    let mut ok = fx.check(&fx.snap).is_empty();
    for (class, snap) in common::mutations(&fx) {
        let vs = fx.check(&snap);
        let hit = vs.iter().any(|v| v.class == class);
        ok &= hit;
        parts.push(format!("{class} {}", if hit { "flagged" } else { "MISSED" }));
    }
    verdict(ok && parts.len() == InvariantClass::ALL.len(), format!("clean base at stage {}; {}", fx.snap.stage, parts.join(", ")))
}

fn main() -> ExitCode {
    let start = Instant::now();
    let (runs, took) = random_runs();
    let goldens = golden_runs();
    let mut results: BTreeMap<u32, (&str, Verdict)> = BTreeMap::new();
    results.insert(1, ("root-view invariant", c1(&runs, took)));
    results.insert(2, ("q-growth arithmetic", c2(&runs)));
    results.insert(3, ("kb-monotone movement and residency depth", c3(&runs)));
    results.insert(4, ("interval discipline", c4(&runs, &goldens)));
    results.insert(5, ("release split law", c5(&runs, &goldens)));
    results.insert(6, ("lattice shadow", c6()));
    results.insert(7, ("oracle equivalence", c7()));
    results.insert(8, ("algebra check", c8(&goldens)));
    results.insert(9, ("determinism", c9(&goldens)));
    results.insert(10, ("fault injection", c10()));
    let mut failed = 0;
    for (n, (name, v)) in &results {
        if !v.pass {
            failed += 1;
        }
        println!("criterion {n:>2} {name}: {} ({})", if v.pass { "PASS" } else { "FAIL" }, v.detail);
    }
    println!("acceptance: {} of {} criteria pass in {:.2}s", results.len() - failed, results.len(), start.elapsed().as_secs_f64());
    let strict = std::env::var("PINBALL_STRICT").is_ok_and(|v| v == "1");
    if strict && failed > 0 {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
