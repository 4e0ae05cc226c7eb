//! Scripted sets, the reindexed enumeration, guess streams, the dominator and scripted trees.

use std::sync::Arc;

use pinball::config::ASpec;
use pinball::oracles::{
    true_stage_reindex, tree_slice, DominatorApprox, DominatorSpec, EnumerationState, ScriptedSet, ScriptedTree, SetSpec,
    StreamOverride, StreamSpec, TreeSpec,
};
use pinball::{Engine, Label, Mode, RunConfig, Script, TreeAddress};

fn enumeration(universe: usize, entries: &[(u64, u64)], designated: &[u64]) -> pinball::oracles::Enumeration {
    let mut e = vec![None; universe];
    for &(x, t) in entries {
        e[x as usize] = Some(t);
    }
    true_stage_reindex(&ScriptedSet::new(e), designated, &[]).expect("consistent schedule")
}

fn labels(xs: &[&str]) -> Vec<Label> {
    xs.iter().map(|s| Label::parse(s).expect("label")).collect()
}

#[test]
fn q_is_the_first_n_squared_complement_elements() {
    let en = enumeration(40, &[], &[]);
    assert_eq!(EnumerationState::at(&en, 3).q_members(), (0..9).collect::<Vec<_>>());
    let en = enumeration(40, &[(0, 0), (2, 0)], &[]);
    assert_eq!(EnumerationState::at(&en, 2).q_members(), vec![1, 3, 4, 5]);
}

#[test]
fn q_grows_by_two_n_plus_one() {
    let en = enumeration(200, &[(1, 0), (7, 2), (30, 5)], &[]);
    let mut st = EnumerationState::start(&en);
    for _ in 0..10 {
        let n = st.n();
        let before = st.q_members().len() as u64;
        st.advance(&en, true);
        assert_eq!(st.q_members().len() as u64, before + 2 * n + 1);
        assert_eq!(st.q_size(), (n + 1) * (n + 1));
    }
    let n = st.n();
    st.advance(&en, false);
    assert_eq!(st.n(), n);
}

#[test]
fn empty_a_makes_every_index_true() {
    let en = enumeration(100, &[], &[]);
    assert!((0..10).all(|i| en.is_true_index(i)));
}

#[test]
fn reindexing_finalizes_the_window_at_designated_indexes() {
    // 5 enters at raw index 3, already inside A-tilde_4: nothing moves.
    let en = enumeration(30, &[(5, 3)], &[4]);
    assert_eq!(en.entry(5), Some(3));
    assert!(en.is_true_index(4));
    let window: Vec<u64> = (0..30).filter(|&x| !en.in_stage(x, 4)).take(16).collect();
    assert_eq!(window, (0..17).filter(|&x| x != 5).collect::<Vec<_>>());
    assert!(window.iter().all(|&x| !en.in_final(x)));

    // 5 enters late at raw index 10: it is pulled forward to index 3.
    let en = enumeration(30, &[(5, 10)], &[4]);
    assert_eq!(en.entry(5), Some(3));
    assert!(en.is_true_index(4));
    let raw = enumeration(30, &[(5, 10)], &[]);
    assert!(!raw.is_true_index(4));
}

#[test]
fn pinned_entries_that_would_move_are_rejected() {
    let mut e = vec![None; 30];
    e[5] = Some(10);
    assert!(true_stage_reindex(&ScriptedSet::new(e), &[4], &[5]).is_err());
}

#[test]
fn cofinite_a_is_rejected() {
    for set in [SetSpec::Cofinite { from: 3 }, SetSpec::All { lag: 1 }, SetSpec::Residue { modulus: 1, offset: 0, lag: 0 }] {
        let script = Script { a: ASpec { set, ..ASpec::default() }, ..Script::default() };
        let err = script.build(Mode::Maximal, 100, 1).expect_err("cofinite A");
        assert_eq!(err.section, "a");
    }
}

#[test]
fn phi_is_zero_at_stage_zero() {
    for spec in [
        DominatorSpec::default(),
        DominatorSpec::Adaptive { start: 2, every: 3, scale: 50 },
        DominatorSpec::Capped { cap: 9 },
        DominatorSpec::Table { raises: vec![(0, 0, 40), (5, 2, 90)] },
    ] {
        let d = DominatorApprox::new(spec);
        assert!((0..20).all(|n| d.phi(0, n) == 0));
        assert!((1..50).all(|s| (0..5).all(|n| d.phi(s, n) <= d.phi(s + 1, n))));
    }
}

#[test]
fn tree_slices() {
    let full = ScriptedTree::from_spec(&TreeSpec::Full { depth: 3 }).expect("tree");
    assert_eq!(tree_slice(&full, 2).expect("slice").iter().collect::<Vec<_>>(), labels(&["00", "01", "10", "11"]));
    let branch = ScriptedTree::from_spec(&TreeSpec::Branch { depth: 3 }).expect("tree");
    assert_eq!(tree_slice(&branch, 2).expect("slice").iter().collect::<Vec<_>>(), labels(&["00"]));
    assert!(tree_slice(&branch, 4).is_err());
    let mix = ScriptedTree::from_spec(&TreeSpec::Mix { depth: 2 }).expect("tree");
    assert_eq!(tree_slice(&mix, 2).expect("slice").iter().collect::<Vec<_>>(), labels(&["00", "10", "11"]));
}

#[test]
fn trees_must_be_downward_closed() {
    let spec = TreeSpec::Explicit { depth: 2, members: vec!["_".into(), "01".into()], extend: Default::default() };
    assert!(ScriptedTree::from_spec(&spec).is_err());
    assert!(ScriptedTree::from_members(2, labels(&["_", "1", "10"])).is_ok());
    assert!(ScriptedTree::from_members(2, labels(&["_", "10"])).is_err());
}

fn engine(cfg: RunConfig) -> Engine {
    let or = cfg.validate().expect("valid config");
    Engine::new(cfg, Arc::new(or))
}

#[test]
fn ell_is_the_minimum_along_the_path() {
    let script = Script {
        universe: 50,
        w: vec![SetSpec::All { lag: 0 }, SetSpec::All { lag: 0 }],
        guesser: pinball::oracles::GuesserSpec {
            overrides: vec![
                StreamOverride { addr: "inf0".into(), stream: StreamSpec::Const { value: 4 } },
                StreamOverride { addr: "inf0.inf0".into(), stream: StreamSpec::Const { value: 7 } },
            ],
            ..Default::default()
        },
        ..Script::default()
    };
    let mut cfg = RunConfig::new(Mode::Maximal, 50, script);
    cfg.levels = 2;
    let e = engine(cfg);
    let beta = TreeAddress::parse(Mode::Maximal, "inf0.inf0").expect("address");
    assert_eq!(e.ell(&beta), Ok(4));
    assert_eq!(e.ell(&beta.parent().expect("parent")), Ok(4));
    assert!(e.ell(&TreeAddress::root()).is_err());
}

#[test]
fn finite_guess_streams() {
    // W_0 has three members: fin3 is a correct guess and grows, fin1 undercounts and stays put.
    let script = Script {
        universe: 200,
        w: vec![SetSpec::Explicit { entries: vec![(10, 0), (20, 0), (30, 0)] }],
        ..Script::default()
    };
    let mut cfg = RunConfig::new(Mode::Maximal, 1500, script);
    cfg.levels = 1;
    let mut e = engine(cfg);
    let at = |e: &Engine, s: &str| e.ell(&TreeAddress::parse(Mode::Maximal, s).expect("address")).expect("ell");
    while e.stage() < 300 {
        e.step();
    }
    let early = (at(&e, "inf0"), at(&e, "fin1"), at(&e, "fin3"));
    while e.step().is_some() {}
    let late = (at(&e, "inf0"), at(&e, "fin1"), at(&e, "fin3"));
    assert!(late.2 > early.2 && late.2 >= 100, "{early:?} {late:?}");
    assert_eq!(late.1, early.1, "{early:?} {late:?}");
}
