//! Ball fates reconstructed from events, the `Z(ρ)` family and the lattice checks.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::addr::{Outcome, TreeAddress};
use crate::label::Label;
use crate::machine::OffReason;
use crate::oracles::ScriptedFamily;
use crate::trace::{RunTrace, TraceEvent};

/// Final whereabouts of one ball.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BallFate {
    pub x: u64,
    /// Final address, `None` when off the machine.
    pub at: Option<TreeAddress>,
    pub off: Option<OffReason>,
    pub label: Label,
    /// Stage of the last placement, move or relabel.
    pub last_move: Option<u64>,
    pub moves: u64,
}

/// Folds the events of a trace into per-ball fates for the balls below `universe`.
pub fn fates_from_events(events: &[TraceEvent], universe: u64) -> Vec<BallFate> {
    let mut f: Vec<BallFate> = (0..universe)
        .map(|x| BallFate { x, at: None, off: Some(OffReason::NeverPlaced), label: Label::EMPTY, last_move: None, moves: 0 })
        .collect();
    for ev in events {
        match ev {
            TraceEvent::NewBalls { stage, entered_a, placed, .. } => {
                for &y in entered_a {
                    let b = &mut f[y as usize];
                    b.at = None;
                    b.off = Some(OffReason::EnteredA);
                }
                for &x in placed {
                    let b = &mut f[x as usize];
                    b.at = Some(TreeAddress::root());
                    b.off = None;
                    b.label = Label::EMPTY;
                    b.last_move = Some(*stage);
                }
            }
            TraceEvent::Pull { stage, x, to, label, .. } => {
                let b = &mut f[*x as usize];
                b.at = Some(to.clone());
                b.label = *label;
                b.last_move = Some(*stage);
                b.moves += 1;
            }
            TraceEvent::Eliminate { x, .. } => {
                let b = &mut f[*x as usize];
                b.at = None;
                b.off = Some(OffReason::Eliminated);
            }
            TraceEvent::Release { stage, rho, from, zero, one, .. } => {
                let to = from.child(Outcome::ChildLink);
                for (xs, bit) in [(zero, 0u8), (one, 1u8)] {
                    for &x in xs {
                        let b = &mut f[x as usize];
                        b.at = Some(to.clone());
                        b.label = rho.push(bit);
                        b.last_move = Some(*stage);
                        b.moves += 1;
                    }
                }
            }
            _ => {}
        }
    }
    f
}

pub fn fates(trace: &RunTrace) -> Vec<BallFate> {
    fates_from_events(&trace.events, trace.header.config.script.universe)
}

/// First stage of the final window.
pub fn window_start(stages: u64, window: f64) -> u64 {
    stages - ((stages as f64) * window).floor() as u64
}

/// `Z(ρ)` for all `ρ` up to `depth`: permanent residents whose final label extends `ρ`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ZFamily {
    pub depth: usize,
    pub window_start: u64,
    pub sets: BTreeMap<Label, BTreeSet<u64>>,
    /// Final address and label of each permanent resident.
    pub placed: BTreeMap<u64, (TreeAddress, Label)>,
}

impl ZFamily {
    pub fn get(&self, rho: &Label) -> &BTreeSet<u64> {
        static EMPTY: BTreeSet<u64> = BTreeSet::new();
        self.sets.get(rho).unwrap_or(&EMPTY)
    }

    /// All permanent residents.
    pub fn residents(&self) -> &BTreeSet<u64> {
        self.get(&Label::EMPTY)
    }

    /// `{ρ : |Z(ρ)| > eps}`.
    pub fn tree(&self, eps: usize) -> BTreeSet<Label> {
        self.sets.iter().filter(|(_, z)| z.len() > eps).map(|(r, _)| *r).collect()
    }

    /// Permanent residents at or below `alpha`.
    pub fn below(&self, alpha: &TreeAddress) -> BTreeSet<u64> {
        self.placed.iter().filter(|(_, (a, _))| alpha.is_prefix_of(a)).map(|(x, _)| *x).collect()
    }

    /// Permanent residents at or below `alpha` whose label extends `rho`.
    pub fn below_with(&self, alpha: &TreeAddress, rho: &Label) -> BTreeSet<u64> {
        self.placed
            .iter()
            .filter(|(_, (a, l))| alpha.is_prefix_of(a) && l.extends(rho))
            .map(|(x, _)| *x)
            .collect()
    }
}

/// A ball is permanent if it is on the machine at the horizon and unmoved since `window_start`.
pub fn extract_z_from_fates(fates: &[BallFate], depth: usize, window_start: u64) -> ZFamily {
    let mut sets: BTreeMap<Label, BTreeSet<u64>> = BTreeMap::new();
    let mut placed = BTreeMap::new();
    for e in 0..=depth {
        for r in Label::all_of_len(e) {
            sets.insert(r, BTreeSet::new());
        }
    }
    for b in fates {
        if b.at.is_none() || b.last_move.is_some_and(|s| s >= window_start) {
            continue;
        }
        for e in 0..=depth.min(b.label.len()) {
            sets.get_mut(&b.label.prefix(e)).expect("prefix present").insert(b.x);
        }
        if let Some(a) = &b.at {
            placed.insert(b.x, (a.clone(), b.label));
        }
    }
    ZFamily { depth, window_start, sets, placed }
}

pub fn extract_z(trace: &RunTrace, depth: usize) -> ZFamily {
    let ws = window_start(trace.header.stages, trace.header.config.verify.window);
    extract_z_from_fates(&fates(trace), depth, ws)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SiblingCheck {
    pub rho: Label,
    pub overlap: Vec<u64>,
    pub union_exceptions: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DecisionCheck {
    pub e: usize,
    /// The guessed set on the inferred path, if the path reaches level `e`.
    pub d: Option<Vec<Label>>,
    /// The decision child on the path at level `e`.
    pub node: Option<TreeAddress>,
    /// Permanent residents at or below `node`.
    pub residents: usize,
    pub exceptions: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LatticeReport {
    pub epsilon: usize,
    pub sizes: BTreeMap<Label, usize>,
    pub siblings: Vec<SiblingCheck>,
    pub decisions: Vec<DecisionCheck>,
}

impl LatticeReport {
    pub fn disjoint(&self) -> bool {
        self.siblings.iter().all(|s| s.overlap.is_empty())
    }

    pub fn unions_ok(&self) -> bool {
        self.siblings.iter().all(|s| s.union_exceptions <= self.epsilon)
    }

    pub fn min_size(&self) -> usize {
        self.sizes.values().copied().min().unwrap_or(0)
    }

    pub fn decisions_ok(&self) -> bool {
        self.decisions.iter().all(|d| d.exceptions.is_some_and(|x| x <= self.epsilon))
    }

    pub fn passes(&self, min_size: usize) -> bool {
        self.disjoint() && self.unions_ok() && self.decisions_ok() && self.min_size() >= min_size
    }
}

/// The guessed set and decision child of each decision outcome along a path, by level.
pub fn decisions_on_path(path: &[TreeAddress]) -> BTreeMap<usize, (Vec<Label>, TreeAddress)> {
    let mut out = BTreeMap::new();
    if let Some(last) = path.last() {
        for (i, o) in last.outcomes().iter().enumerate() {
            if let Outcome::DecisionGuess(d, _) = o {
                out.insert(d.width(), (d.iter().collect(), last.prefix(i + 1)));
            }
        }
    }
    out
}

/// Sibling disjointness (exact), `Z(ρ) =ε Z(ρ0) ∪ Z(ρ1)`, and, below the level-`e` decision
/// child `α` on the path, `W_e` against the union of the `ρ ∈ D` parts.
pub fn check_lattice(z: &ZFamily, w: &ScriptedFamily, path: &[TreeAddress], levels: usize, eps: usize) -> LatticeReport {
    let sizes = z.sets.iter().map(|(r, s)| (*r, s.len())).collect();
    let mut siblings = Vec::new();
    for e in 0..z.depth {
        for rho in Label::all_of_len(e) {
            let (a, b) = (z.get(&rho.push(0)), z.get(&rho.push(1)));
            let overlap: Vec<u64> = a.intersection(b).copied().collect();
            let union: BTreeSet<u64> = a.union(b).copied().collect();
            let union_exceptions = z.get(&rho).symmetric_difference(&union).count();
            siblings.push(SiblingCheck { rho, overlap, union_exceptions });
        }
    }
    let ds = decisions_on_path(path);
    let mut decisions = Vec::new();
    for e in 0..levels.min(w.len()).min(z.depth + 1) {
        let Some((d, alpha)) = ds.get(&e).cloned() else {
            decisions.push(DecisionCheck { e, d: None, node: None, residents: 0, exceptions: None });
            continue;
        };
        let below = z.below(&alpha);
        let lhs: BTreeSet<u64> = below.iter().copied().filter(|&x| w.contains(e, x)).collect();
        let rhs: BTreeSet<u64> = d.iter().flat_map(|r| z.below_with(&alpha, r)).collect();
        let exceptions = Some(lhs.symmetric_difference(&rhs).count());
        decisions.push(DecisionCheck { e, d: Some(d), node: Some(alpha), residents: below.len(), exceptions });
    }
    LatticeReport { epsilon: eps, sizes, siblings, decisions }
}
