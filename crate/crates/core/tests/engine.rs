//! Stage-level behavior of the engine through its public queries.

use std::sync::Arc;

use pinball::addr::stronger_with;
use pinball::scenarios::{random_config, Scale};
use pinball::{Case, Engine, Label, Mode, RunConfig, Script, TraceEvent, TreeAddress};

fn engine(cfg: &RunConfig) -> Engine {
    Engine::new(cfg.clone(), Arc::new(cfg.validate().expect("valid config")))
}

#[test]
fn stage_zero_places_the_first_balls_at_the_root() {
    for mode in Mode::all() {
        let mut script = Script::default();
        if mode == Mode::Balg {
            script.tree = Some(pinball::oracles::TreeSpec::Full { depth: 2 });
        }
        let mut cfg = RunConfig::new(mode, 10, script);
        cfg.levels = 1;
        let mut e = engine(&cfg);
        assert_eq!(e.step(), Some(Case::NewBalls), "{mode}");
        match e.events() {
            [TraceEvent::NewBalls { stage: 0, n: 0, placed, entered_a, .. }] => {
                assert_eq!(placed, &vec![0], "{mode}");
                assert!(entered_a.is_empty());
            }
            other => panic!("{mode}: {other:?}"),
        }
        assert_eq!(e.ball_at(0), Some((&TreeAddress::root(), Label::EMPTY)));
    }
}

#[test]
fn budget_exhaustion_halts() {
    let cfg = RunConfig::new(Mode::Maximal, 3, Script::default());
    let mut e = engine(&cfg);
    for _ in 0..3 {
        assert!(e.step().is_some());
    }
    assert!(e.is_done());
    assert_eq!(e.step(), None);
    assert_eq!(e.stage(), 3);
}

#[test]
fn pulls_take_precedence_and_come_from_the_strongest_node() {
    for mode in Mode::all() {
        for seed in 0..4 {
            let cfg = random_config(mode, seed, Scale::TINY);
            let mut e = engine(&cfg);
            while !e.is_done() {
                let sampled = e.stage().is_multiple_of(4);
                let mut any_pull = false;
                let mut any_elim = false;
                if sampled {
                    let on: Vec<u64> = e.balls().iter().enumerate().filter(|(_, b)| b.node().is_some()).map(|(x, _)| x as u64).collect();
                    let nodes: Vec<TreeAddress> = (0..e.arena().len() as u32).map(|i| e.arena().addr(i).clone()).collect();
                    for &x in &on {
                        let puller = e.strongest_puller(x);
                        any_pull |= puller.is_some();
                        any_elim |= e.strongest_eliminator(x).is_some();
                        let Some(p) = puller else { continue };
                        assert_eq!(e.pullable_by(x, &p), Ok(true), "{mode} seed {seed} stage {} ball {x}", e.stage());
                        for a in nodes.iter().filter(|a| !a.is_root()) {
                            if e.pullable_by(x, a) == Ok(true) {
                                assert!(
                                    !stronger_with(a, &p, cfg.dn_order),
                                    "{mode} seed {seed} stage {}: {a} pulls {x} and beats {p}",
                                    e.stage()
                                );
                            }
                        }
                    }
                }
                let stage = e.stage();
                let case = e.step().expect("not done");
                if sampled {
                    assert_eq!(case == Case::Pull, any_pull, "{mode} seed {seed} stage {stage}");
                    if !any_pull {
                        assert_eq!(case == Case::Eliminate, any_elim, "{mode} seed {seed} stage {stage}");
                    }
                }
            }
        }
    }
}

#[test]
fn each_stage_does_one_kind_of_thing() {
    for mode in Mode::all() {
        for seed in 0..20 {
            let cfg = random_config(mode, seed, Scale::TINY);
            let mut e = engine(&cfg);
            e.run();
            for ev in e.events() {
                let case = e.cases()[ev.stage() as usize];
                let ok = match ev {
                    TraceEvent::Pull { .. } => case == Case::Pull,
                    TraceEvent::Eliminate { .. } => case == Case::Eliminate,
                    TraceEvent::Release { .. } => case == Case::Release,
                    TraceEvent::Reassign { .. } => matches!(case, Case::Pull | Case::Release),
                    TraceEvent::Establish { .. } => case == Case::Establish,
                    TraceEvent::Undefine { .. } | TraceEvent::NewBalls { .. } => case == Case::NewBalls,
                };
                assert!(ok, "{mode} seed {seed}: {ev:?} in a {case:?} stage");
            }
        }
    }
}
