//! Frozen values of the golden scenarios, cross-checked against the engine's own end state.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use pinball::balg::{build_ba_from_tree, compare_ba, Sig};
use pinball::run::{execute, RunOptions};
use pinball::scenarios::{golden_balg, golden_hhs, golden_maximal, random_config, GoldenTree, Scale};
use pinball::verify::{
    check_lattice, check_trace, extract_z, infer_true_path_sampled, window_start, InvariantClass, ZFamily,
};
use pinball::{Engine, Label, Mode, RunConfig, TreeAddress};

/// `Z(ρ)` from two engine snapshots: balls at the same place with the same label at the window start and at the horizon.
fn z_by_state(cfg: &RunConfig, depth: usize) -> BTreeMap<Label, BTreeSet<u64>> {
    let mut e = Engine::new(cfg.clone(), Arc::new(cfg.validate().expect("valid")));
    let ws = window_start(cfg.budget, cfg.verify.window);
    while e.stage() < ws {
        e.step();
    }
    let at = |e: &Engine| -> BTreeMap<u64, (TreeAddress, Label)> {
        (0..cfg.script.universe).filter_map(|x| e.ball_at(x).map(|(a, l)| (x, (a.clone(), l)))).collect()
    };
    let before = at(&e);
    e.run();
    let after = at(&e);
    let mut z: BTreeMap<Label, BTreeSet<u64>> = BTreeMap::new();
    for e in 0..=depth {
        for r in Label::all_of_len(e) {
            z.insert(r, BTreeSet::new());
        }
    }
    for (x, place) in &after {
        if before.get(x) != Some(place) {
            continue;
        }
        let l = place.1;
        for e in 0..=depth.min(l.len()) {
            z.get_mut(&l.prefix(e)).expect("present").insert(*x);
        }
    }
    z
}

fn sizes(z: &ZFamily) -> Vec<(String, usize)> {
    z.sets.iter().map(|(r, s)| (r.to_string(), s.len())).collect()
}

fn frozen(xs: &[(&str, usize)]) -> Vec<(String, usize)> {
    xs.iter().map(|(r, n)| (r.to_string(), *n)).collect()
}

#[test]
fn golden_hhs_lattice() {
    let cfg = golden_hhs();
    let out = execute(&cfg, RunOptions { sample_ells: true, ..Default::default() }).expect("valid");
    let or = cfg.validate().expect("valid");
    assert!(check_trace(&out.trace, &or).is_empty());
    let z = extract_z(&out.trace, 2);
    assert_eq!(z.sets, z_by_state(&cfg, 2));
    assert_eq!(
        sizes(&z),
        frozen(&[("_", 514), ("0", 229), ("1", 284), ("00", 108), ("01", 120), ("10", 106), ("11", 177)])
    );
    let path = infer_true_path_sampled(&out.trace, cfg.max_len(), out.ells.as_ref().expect("sampled"));
    let rep = check_lattice(&z, &or.w, &path.nodes, cfg.levels, 5);
    assert!(rep.passes(3));
    let decisions: Vec<(usize, Option<usize>)> = rep.decisions.iter().map(|d| (d.residents, d.exceptions)).collect();
    assert_eq!(decisions, vec![(513, Some(0)), (501, Some(0))]);
}

#[test]
fn golden_balg_algebras() {
    let expect = [
        (GoldenTree::Full, frozen(&[("_", 309), ("0", 129), ("1", 179), ("00", 62), ("01", 63), ("10", 57), ("11", 120)])),
        (GoldenTree::Branch, frozen(&[("_", 25), ("0", 23), ("1", 1), ("00", 19), ("01", 3), ("10", 0), ("11", 0)])),
        (GoldenTree::Mix, frozen(&[("_", 247), ("0", 67), ("1", 179), ("00", 62), ("01", 1), ("10", 57), ("11", 120)])),
    ];
    let join2 = Sig::Join(vec![Sig::Atom, Sig::Atom]);
    let sigs = [Sig::Join(vec![join2.clone(), join2.clone()]), Sig::Atom, Sig::Join(vec![Sig::Atom, join2])];
    for ((tree, want), sig) in expect.into_iter().zip(sigs) {
        let cfg = golden_balg(tree);
        let out = execute(&cfg, RunOptions::default()).expect("valid");
        let or = cfg.validate().expect("valid");
        assert!(check_trace(&out.trace, &or).is_empty(), "{}", tree.name());
        let z = extract_z(&out.trace, 2);
        assert_eq!(z.sets, z_by_state(&cfg, 2), "{}", tree.name());
        assert_eq!(sizes(&z), want, "{}", tree.name());
        let a = build_ba_from_tree(&z.tree(cfg.verify.epsilon), 2);
        let b = build_ba_from_tree(or.tree.as_ref().expect("tree").members(), 2);
        assert_eq!(a.signature(), sig, "{}", tree.name());
        assert!(compare_ba(&a, &b), "{}", tree.name());
    }
}

#[test]
fn golden_maximal_path() {
    let cfg = golden_maximal();
    let out = execute(&cfg, RunOptions { sample_ells: true, check_invariants: true, ..Default::default() }).expect("valid");
    assert!(out.violations.is_empty());
    let path = infer_true_path_sampled(&out.trace, cfg.max_len(), out.ells.as_ref().expect("sampled"));
    assert!(!path.truncated);
    assert_eq!(path.last().render(), "inf0.fin0.fin0");
    let deepest = (0..cfg.script.universe).filter(|&x| out.engine.ball_at(x).is_some_and(|(a, _)| *a == path.last())).count();
    assert_eq!(deepest, 396);
}

/// A waiting block found away from its assigned child; recorded as a conflict in the ledger.
#[test]
fn waiting_block_counterexample_is_reproducible() {
    let cfg = random_config(Mode::Hhs, 1011, Scale::MEDIUM);
    let out = execute(&cfg, RunOptions { check_invariants: true, ..Default::default() }).expect("valid");
    let first = out.violations.first().expect("the known violation");
    assert_eq!(first.class, InvariantClass::IntervalLocation);
    assert_eq!(first.stage, 46);
    assert_eq!(first.to_string(), "[interval-location] stage 46 node D{_}#0.s0 ball 49: waiting block 4 not at D{_}#0.s1");
    assert!(out.violations.iter().all(|v| v.class == InvariantClass::IntervalLocation && v.detail.starts_with("waiting block")));
}
