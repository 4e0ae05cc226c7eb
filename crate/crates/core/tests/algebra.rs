//! `compare_ba` against a brute-force bijection search over atoms.

use std::collections::BTreeSet;

use pinball::balg::{build_ba_from_tree, compare_ba, Sig};
use pinball::Label;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Every downward-closed set of strings of length at most `depth`.
fn all_trees(depth: usize) -> Vec<BTreeSet<Label>> {
    fn grow(depth: usize, frontier: Vec<Label>, acc: BTreeSet<Label>, out: &mut Vec<BTreeSet<Label>>) {
        let kids: Vec<Label> = frontier.iter().filter(|l| l.len() < depth).flat_map(|l| [l.push(0), l.push(1)]).collect();
        if kids.is_empty() {
            out.push(acc);
            return;
        }
        for mask in 0..(1u32 << kids.len()) {
            let chosen: Vec<Label> = kids.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, l)| *l).collect();
            let mut next = acc.clone();
            next.extend(chosen.iter().copied());
            grow(depth, chosen, next, out);
        }
    }
    let mut out = vec![BTreeSet::new()];
    grow(depth, vec![Label::EMPTY], BTreeSet::from([Label::EMPTY]), &mut out);
    out
}

/// Atoms at full depth and the atom set below each member that reaches full depth.
fn set_system(tree: &BTreeSet<Label>, depth: usize) -> (usize, BTreeSet<BTreeSet<usize>>) {
    let atoms: Vec<Label> = tree.iter().filter(|l| l.len() == depth).copied().collect();
    let mut sys = BTreeSet::new();
    for t in tree {
        let below: BTreeSet<usize> =
            atoms.iter().enumerate().filter(|(_, a)| a.prefix(t.len()) == *t).map(|(i, _)| i).collect();
        if !below.is_empty() {
            sys.insert(below);
        }
    }
    (atoms.len(), sys)
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..n {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out
}

fn isomorphic(a: &BTreeSet<Label>, b: &BTreeSet<Label>, depth: usize) -> bool {
    let (na, sa) = set_system(a, depth);
    let (nb, sb) = set_system(b, depth);
    if na != nb || sa.len() != sb.len() {
        return false;
    }
    permutations(na).iter().any(|p| {
        let mapped: BTreeSet<BTreeSet<usize>> = sa.iter().map(|s| s.iter().map(|&i| p[i]).collect()).collect();
        mapped == sb
    })
}

fn mirror(t: &BTreeSet<Label>) -> BTreeSet<Label> {
    t.iter().map(|l| Label::new(l.len() as u8, !l.code() & ((1u64 << l.len()) - 1))).collect()
}

fn agrees(a: &BTreeSet<Label>, b: &BTreeSet<Label>, depth: usize) -> bool {
    compare_ba(&build_ba_from_tree(a, depth), &build_ba_from_tree(b, depth)) == isomorphic(a, b, depth)
}

#[test]
fn agrees_with_bijection_search_on_all_pairs_up_to_depth_two() {
    for depth in 0..=2 {
        let trees = all_trees(depth);
        for a in &trees {
            for b in &trees {
                assert!(agrees(a, b, depth), "depth {depth}: {a:?} vs {b:?}");
            }
        }
    }
}

#[test]
fn agrees_with_bijection_search_at_depth_three() {
    let trees = all_trees(3);
    assert_eq!(trees.len(), 677);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..3000 {
        let a = &trees[rng.gen_range(0..trees.len())];
        let b = &trees[rng.gen_range(0..trees.len())];
        assert!(agrees(a, b, 3), "{a:?} vs {b:?}");
    }
    // Pairs with the same number of atoms are the informative ones.
    let by_atoms = |n: usize| -> Vec<&BTreeSet<Label>> { trees.iter().filter(|t| t.iter().filter(|l| l.len() == 3).count() == n).collect() };
    for n in 3..=5 {
        let group = by_atoms(n);
        for a in group.iter().take(40) {
            for b in group.iter().take(40) {
                assert!(agrees(a, b, 3), "{a:?} vs {b:?}");
            }
        }
    }
}

#[test]
fn mirror_images_are_isomorphic() {
    for depth in 0..=3 {
        for t in all_trees(depth) {
            let m = mirror(&t);
            assert!(isomorphic(&t, &m, depth));
            assert!(compare_ba(&build_ba_from_tree(&t, depth), &build_ba_from_tree(&m, depth)), "{t:?}");
        }
    }
}

#[test]
fn examples() {
    let labels = |xs: &[&str]| -> BTreeSet<Label> { xs.iter().map(|s| Label::parse(s).expect("label")).collect() };
    let full = labels(&["_", "0", "1", "00", "01", "10", "11"]);
    let branch = labels(&["_", "0", "00"]);
    assert!(compare_ba(&build_ba_from_tree(&full, 2), &build_ba_from_tree(&full, 2)));
    assert!(!compare_ba(&build_ba_from_tree(&full, 2), &build_ba_from_tree(&branch, 2)));
    assert_eq!(build_ba_from_tree(&branch, 2).signature(), Sig::Atom);
    assert_eq!(build_ba_from_tree(&BTreeSet::new(), 2).signature(), Sig::Zero);
}
