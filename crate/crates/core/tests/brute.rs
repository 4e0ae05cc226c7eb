//! The engine against the naive re-implementation.

use pinball::addr::DnOrder;
use pinball::run::{execute, RunOptions};
use pinball::scenarios::{random_config, Scale};
use pinball::verify::{brute_force_fate, brute_force_run, fates, first_divergence};
use pinball::{Mode, RunConfig};

fn same(engine_cfg: &RunConfig, brute_cfg: &RunConfig) -> bool {
    let out = execute(engine_cfg, RunOptions::default()).expect("valid");
    let b = brute_force_run(brute_cfg).expect("valid");
    first_divergence(&out.trace.events, &b.events).is_none() && out.trace.cases == b.cases && fates(&out.trace) == b.fates
}

#[test]
fn identical_on_fresh_tiny_scenarios() {
    for mode in Mode::all() {
        for seed in 5000..5040 {
            let cfg = random_config(mode, seed, Scale::TINY);
            assert!(same(&cfg, &cfg), "{mode} seed {seed}");
            assert_eq!(brute_force_fate(&cfg).expect("valid"), fates(&execute(&cfg, RunOptions::default()).expect("valid").trace));
        }
    }
}

#[test]
fn comparison_is_sensitive_to_the_rules() {
    let flipped = |cfg: &RunConfig| {
        let mut c = cfg.clone();
        c.dn_order = match c.dn_order {
            DnOrder::NMajor => DnOrder::SetMajor,
            DnOrder::SetMajor => DnOrder::NMajor,
        };
        c
    };
    for mode in [Mode::Hhs, Mode::Balg] {
        let differs = (0..40).map(|s| random_config(mode, s, Scale::TINY)).any(|cfg| !same(&cfg, &flipped(&cfg)));
        assert!(differs, "{mode}: tie-break order never mattered");
    }
    let alt = |cfg: &RunConfig| {
        let mut c = cfg.clone();
        c.flags.alt_eliminable = !c.flags.alt_eliminable;
        c
    };
    let differs = (0..40).map(|s| random_config(Mode::Maximal, s, Scale::TINY)).any(|cfg| !same(&cfg, &alt(&cfg)));
    assert!(differs, "maximal: the alternative elimination clause never mattered");
}

#[test]
fn first_divergence_points_at_the_first_difference() {
    let cfg = random_config(Mode::Hhs, 1, Scale::TINY);
    let events = execute(&cfg, RunOptions::default()).expect("valid").trace.events;
    assert_eq!(first_divergence(&events, &events), None);
    let mut cut = events.clone();
    cut.truncate(events.len() - 1);
    let (i, a, b) = first_divergence(&events, &cut).expect("differs");
    assert_eq!(i, events.len() - 1);
    assert!(a.is_some() && b.is_none());
}
