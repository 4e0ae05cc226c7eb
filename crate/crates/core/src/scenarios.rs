//! Scenario constructors: seeded random scripts and the golden configurations.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::addr::{DnOrder, Mode};
use crate::config::{ASpec, RunConfig, Script, TreeEllReading};
use crate::oracles::{DominatorSpec, Gain, GuesserSpec, SetSpec, TreeSpec};

/// Size parameters for random scenarios.
#[derive(Clone, Copy, Debug)]
pub struct Scale {
    pub universe: (u64, u64),
    pub budget: u64,
}

impl Scale {
    /// At most 30 balls and 200 stages.
    pub const TINY: Scale = Scale { universe: (8, 30), budget: 200 };
    pub const MEDIUM: Scale = Scale { universe: (100, 400), budget: 2000 };
}

fn random_set(rng: &mut ChaCha8Rng, horizon: u64) -> SetSpec {
    let lag = if rng.gen_bool(0.5) { 0 } else { rng.gen_range(1..4) };
    match rng.gen_range(0..7) {
        0 => SetSpec::Empty,
        1 => SetSpec::All { lag },
        2 => SetSpec::Evens { lag },
        3 => SetSpec::Odds { lag },
        4 => {
            let modulus = rng.gen_range(2..5);
            SetSpec::Residue { modulus, offset: rng.gen_range(0..modulus), lag }
        }
        5 => SetSpec::Cofinite { from: rng.gen_range(0..20) },
        _ => SetSpec::Random { density: rng.gen_range(0.2..0.9), max_entry: horizon.max(1), seed: rng.gen() },
    }
}

fn random_a(rng: &mut ChaCha8Rng, universe: u64, horizon: u64) -> ASpec {
    let set = match rng.gen_range(0..4) {
        0 => SetSpec::Empty,
        1 => {
            let k = rng.gen_range(1..4);
            let entries = (0..k).map(|_| (rng.gen_range(0..universe), rng.gen_range(0..horizon / 4 + 1))).collect();
            SetSpec::Explicit { entries }
        }
        2 => SetSpec::Random { density: rng.gen_range(0.05..0.3), max_entry: horizon / 2 + 1, seed: rng.gen() },
        _ => SetSpec::Residue { modulus: rng.gen_range(3..7), offset: 1, lag: rng.gen_range(0..3) },
    };
    ASpec { set, true_indexes: Vec::new(), true_every: Some(rng.gen_range(1..5)), pinned: Vec::new() }
}

fn random_tree(rng: &mut ChaCha8Rng, depth: usize) -> TreeSpec {
    match rng.gen_range(0..4) {
        0 => TreeSpec::Full { depth },
        1 => TreeSpec::Branch { depth },
        2 => TreeSpec::Mix { depth },
        _ => {
            let mut members = vec!["_".to_string()];
            let mut frontier = vec![String::new()];
            for _ in 0..depth {
                let mut next = Vec::new();
                for p in &frontier {
                    for b in ["0", "1"] {
                        if rng.gen_bool(0.7) {
                            let c = format!("{p}{b}");
                            members.push(c.clone());
                            next.push(c);
                        }
                    }
                }
                frontier = next;
            }
            TreeSpec::Explicit { depth, members, extend: Default::default() }
        }
    }
}

fn random_dominator(rng: &mut ChaCha8Rng, budget: u64) -> DominatorSpec {
    match rng.gen_range(0..3) {
        0 => DominatorSpec::Adaptive { start: rng.gen_range(0..5), every: rng.gen_range(1..4), scale: rng.gen_range(1..20) },
        1 => DominatorSpec::Capped { cap: rng.gen_range(1..budget.max(2)) },
        _ => {
            let k = rng.gen_range(1..5);
            let raises = (0..k).map(|_| (rng.gen_range(0..budget), rng.gen_range(0..4), rng.gen_range(1..budget * 2))).collect();
            DominatorSpec::Table { raises }
        }
    }
}

/// A random valid configuration for `mode`, determined by `seed`.
pub fn random_config(mode: Mode, seed: u64, scale: Scale) -> RunConfig {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ ((mode as u64) << 40));
    let universe = rng.gen_range(scale.universe.0..=scale.universe.1);
    let budget = scale.budget;
    let levels = match mode {
        Mode::Maximal => rng.gen_range(1..5),
        _ => rng.gen_range(1..3),
    };
    let w = (0..levels + 1).map(|_| random_set(&mut rng, budget)).collect();
    let tree = (mode == Mode::Balg).then(|| random_tree(&mut rng, levels + 1));
    let script = Script {
        universe,
        a: random_a(&mut rng, universe, budget),
        w,
        tree,
        dominator: random_dominator(&mut rng, budget),
        guesser: GuesserSpec { gain: if rng.gen_bool(0.5) { Gain::Square } else { Gain::Identity }, overrides: Vec::new() },
    };
    let mut cfg = RunConfig::new(mode, budget, script);
    cfg.seed = seed;
    cfg.levels = levels;
    cfg.width = rng.gen_range(1..4);
    cfg.split_width = rng.gen_range(2..6);
    cfg.dn_order = if rng.gen_bool(0.7) { DnOrder::NMajor } else { DnOrder::SetMajor };
    match mode {
        Mode::Maximal => {
            cfg.flags.alt_eliminable = rng.gen_bool(0.2);
        }
        Mode::Balg => {
            cfg.flags.tree_ell = if rng.gen_bool(0.2) { TreeEllReading::Parent } else { TreeEllReading::Child };
        }
        Mode::Hhs => {}
    }
    cfg
}

/// A = ∅, W₀ = ℕ, W₁ = evens, 10⁴ stages.
pub fn golden_hhs() -> RunConfig {
    let script = Script {
        universe: 4096,
        a: ASpec::default(),
        w: vec![SetSpec::All { lag: 0 }, SetSpec::Evens { lag: 0 }],
        tree: None,
        dominator: DominatorSpec::Adaptive { start: 0, every: 1, scale: 1000 },
        guesser: GuesserSpec::default(),
    };
    let mut cfg = RunConfig::new(Mode::Hhs, 10_000, script);
    cfg.levels = 2;
    cfg.width = 4;
    cfg.verify.window = 0.97;
    cfg
}

/// The scripted trees of the algebra check.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GoldenTree {
    /// Full binary tree.
    Full,
    /// A single branch: one atom.
    Branch,
    /// One atom below `0` and the full tree below `1`.
    Mix,
}

impl GoldenTree {
    pub const ALL: [GoldenTree; 3] = [GoldenTree::Full, GoldenTree::Branch, GoldenTree::Mix];

    pub fn name(&self) -> &'static str {
        match self {
            GoldenTree::Full => "full",
            GoldenTree::Branch => "branch",
            GoldenTree::Mix => "mix",
        }
    }

    pub fn spec(&self) -> TreeSpec {
        match self {
            GoldenTree::Full => TreeSpec::Full { depth: 3 },
            GoldenTree::Branch => TreeSpec::Branch { depth: 3 },
            GoldenTree::Mix => TreeSpec::Mix { depth: 3 },
        }
    }
}

/// A = ∅, W₀ = W₂ = ℕ, W₁ = evens, scripted tree of depth 3.
pub fn golden_balg(tree: GoldenTree) -> RunConfig {
    let script = Script {
        universe: 4096,
        a: ASpec::default(),
        w: vec![SetSpec::All { lag: 0 }, SetSpec::Evens { lag: 0 }, SetSpec::All { lag: 0 }],
        tree: Some(tree.spec()),
        dominator: DominatorSpec::Adaptive { start: 0, every: 1, scale: 1000 },
        guesser: GuesserSpec::default(),
    };
    let mut cfg = RunConfig::new(Mode::Balg, 6000, script);
    cfg.levels = 2;
    cfg.verify.window = 0.95;
    cfg
}

/// A = ∅, W₀ = ℕ.
pub fn golden_maximal() -> RunConfig {
    let script = Script {
        universe: 400,
        a: ASpec::default(),
        w: vec![SetSpec::All { lag: 0 }],
        tree: None,
        dominator: DominatorSpec::default(),
        guesser: GuesserSpec::default(),
    };
    let mut cfg = RunConfig::new(Mode::Maximal, 1000, script);
    cfg.levels = 3;
    cfg.verify.window = 0.99;
    cfg
}
