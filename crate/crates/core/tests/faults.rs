//! Each invariant checker flags its own mutated snapshot.

mod common;

use pinball::verify::InvariantClass;

#[test]
fn base_snapshot_is_clean() {
    let fx = common::hhs_fixture();
    assert_eq!(fx.check(&fx.snap), vec![]);
}

#[test]
fn every_class_flags_its_mutation() {
    let fx = common::hhs_fixture();
    let ms = common::mutations(&fx);
    let classes: Vec<InvariantClass> = ms.iter().map(|(c, _)| *c).collect();
    assert_eq!(classes, InvariantClass::ALL);
    for (class, snap) in ms {
        let vs = fx.check(&snap);
        assert!(vs.iter().any(|v| v.class == class), "{class} missed: {vs:?}");
    }
}

#[test]
fn label_and_domain_mutations_are_isolated() {
    let fx = common::hhs_fixture();
    for (class, snap) in common::mutations(&fx) {
        if matches!(class, InvariantClass::LabelLength | InvariantClass::IntervalDomain | InvariantClass::IntervalLocation) {
            let vs = fx.check(&snap);
            assert!(vs.iter().all(|v| v.class == class), "{class}: {vs:?}");
        }
    }
}
