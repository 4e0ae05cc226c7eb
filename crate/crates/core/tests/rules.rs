//! Clause-level rules of the three constructions.

mod maximal {
    use pinball::maximal::*;

    #[test]
    fn ball_equal_to_length_is_not_pullable() {
        assert!(!pullable(1, 1, 0, 10, false, false));
        assert!(pullable(2, 1, 0, 10, false, false));
    }

    #[test]
    fn inf_child_needs_w_membership() {
        assert!(!pullable(5, 1, 0, 10, true, false));
        assert!(pullable(5, 1, 0, 10, true, true));
    }

    #[test]
    fn sated_child_does_not_pull() {
        assert!(!pullable(5, 1, 10, 10, false, false));
    }

    #[test]
    fn minimum_is_exempt_from_elimination() {
        assert!(!eliminable(3, Some(3), 10));
        assert!(!eliminable(12, Some(3), 10));
        assert!(eliminable(5, Some(3), 10));
    }

    #[test]
    fn alternative_clause_needs_inf_and_outside_w() {
        assert!(!eliminable_alt(5, Some(3), 10, false, false));
        assert!(!eliminable_alt(5, Some(3), 10, true, true));
        assert!(eliminable_alt(5, Some(3), 10, true, false));
    }
}

mod hhs {
    use pinball::hhs::*;
    use pinball::machine::{IntervalEntry, IntervalStatus, IntervalTable};

    fn entry(f: u64, beta: u32, status: IntervalStatus) -> IntervalEntry {
        IntervalEntry { f, u: 0, beta, status, defined_at: 0 }
    }

    #[test]
    fn second_disjunct_lets_sated_child_pull_smaller_balls() {
        let y = YView { count: 1, max: Some(9) };
        assert!(decision_pullable(4, 1, y, 1, false, false));
        assert!(!decision_pullable(12, 1, y, 1, false, false));
    }

    #[test]
    fn w_clause_applies_only_to_labels_in_d() {
        let y = YView::default();
        assert!(!decision_pullable(5, 1, y, 3, true, false));
        assert!(decision_pullable(5, 1, y, 3, false, false));
    }

    #[test]
    fn split_child_pull_disjuncts() {
        let t = IntervalTable {
            entries: vec![entry(10, 0, IntervalStatus::Released), entry(31, 2, IntervalStatus::Waiting)],
        };
        assert!(splitchild_pullable(Some(&t), 1, 40));
        assert!(splitchild_pullable(Some(&t), 2, 12));
        assert!(!splitchild_pullable(Some(&t), 2, 40));
    }

    #[test]
    fn readiness() {
        let t = IntervalTable { entries: vec![entry(10, 0, IntervalStatus::Released)] };
        assert_eq!(ready_for_definition(Some(&t), 1, 4), Some(2));
        assert!(is_ready(Some(&t), 1, 4, 2));
        assert!(!is_ready(Some(&t), 1, 3, 2));
        assert!(!is_ready(Some(&t), 1, 10, 3));
    }

    #[test]
    fn certification_examples() {
        let mut t0 = IntervalTable::default();
        for f in [5, 8] {
            t0.entries.push(entry(f, 9, IntervalStatus::Released));
        }
        t0.entries.push(entry(40, 1, IntervalStatus::Waiting));
        let mut t1 = IntervalTable::default();
        t1.entries.push(entry(6, 9, IntervalStatus::Released));
        t1.entries.push(entry(37, 1, IntervalStatus::Waiting));
        let phi = |k: u64| if k == 3 { 45 } else { 50 };
        assert!(is_certified([Some(&t0), Some(&t1)], 1, phi));
        let phi_tight = |k: u64| if k == 3 { 40 } else { 50 };
        assert!(!is_certified([Some(&t0), Some(&t1)], 1, phi_tight));
        let t1_none = IntervalTable { entries: vec![entry(6, 9, IntervalStatus::Released)] };
        assert!(!is_certified([Some(&t0), Some(&t1_none)], 1, phi));
    }

    #[test]
    fn grandchild_needs_released_interval() {
        let t = IntervalTable {
            entries: vec![entry(10, 0, IntervalStatus::Released), entry(31, 0, IntervalStatus::Waiting)],
        };
        assert!(grandchild_pullable(Some(&t), 0, 4));
        assert!(!grandchild_pullable(Some(&t), 0, 12));
    }

    #[test]
    fn establish_formula() {
        let s = [4, 7, 9, 12, 15];
        assert_eq!(establish_values(30, &s, 2), (31, 13));
        assert_eq!(establish_values(30, &s, 1), (31, 8));
    }

    #[test]
    fn release_split_keeps_k_least() {
        let (zero, one) = release_split(&[12, 15, 18, 20, 22], 2);
        assert_eq!(zero, vec![12, 15]);
        assert_eq!(one, vec![18, 20, 22]);
        let (zero, one) = release_split(&[], 3);
        assert!(zero.is_empty() && one.is_empty());
    }
}

mod balg {
    use pinball::balg::*;
    use pinball::hhs::YView;
    use pinball::{Label, LabelSet, TreeAddress};

    fn labels(xs: &[&str]) -> Vec<Label> {
        xs.iter().map(|s| Label::parse(s).unwrap()).collect()
    }

    #[test]
    fn predicates() {
        let y = YView { count: 3, max: Some(20) };
        assert!(!tree_pullable(false, y, 10, 5));
        assert!(tree_pullable(true, y, 10, 5));
        assert!(tree_pullable(true, y, 1, 5));
        assert!(!tree_eliminable(true, 5, Some(1), 10));
        assert!(!tree_eliminable(false, 1, Some(1), 10));
        assert!(tree_eliminable(false, 5, Some(1), 10));
    }

    #[test]
    fn full_depth_two_has_four_atoms() {
        let t = labels(&["_", "0", "1", "00", "01", "10", "11"]);
        let ba = build_ba_from_tree(&t, 2);
        assert_eq!(ba.atoms().len(), 4);
        assert_eq!(ba.signature(), Sig::Join(vec![Sig::Join(vec![Sig::Atom, Sig::Atom]); 2]));
    }

    #[test]
    fn single_branch_collapses_to_one_atom() {
        let ba = build_ba_from_tree(&labels(&["_", "0", "00"]), 2);
        assert_eq!(ba.signature(), Sig::Atom);
        assert!(!ba.is_nonzero(&Label::parse("1").unwrap()));
    }

    #[test]
    fn empty_tree_is_degenerate() {
        let ba = build_ba_from_tree(&[], 2);
        assert_eq!(ba.signature(), Sig::Zero);
    }

    #[test]
    fn leaves_collapse_to_zero() {
        let with_leaf = build_ba_from_tree(&labels(&["_", "0", "1", "00"]), 2);
        let branch = build_ba_from_tree(&labels(&["_", "0", "00"]), 2);
        assert!(compare_ba(&with_leaf, &branch));
    }

    #[test]
    fn full_versus_branch_differ() {
        let full = build_ba_from_tree(&labels(&["_", "0", "1", "00", "01", "10", "11"]), 2);
        let branch = build_ba_from_tree(&labels(&["_", "0", "00"]), 2);
        assert!(!compare_ba(&full, &branch));
        assert!(compare_ba(&full, &full.clone()));
    }

    #[test]
    fn e_of_root_is_empty_label() {
        assert_eq!(e_of(&TreeAddress::root()), LabelSet::full(0));
    }
}
