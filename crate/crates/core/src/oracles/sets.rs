use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::ScriptError;

/// Declarative description of a scripted c.e. set.
/// Entry stages are stages for `W`-sets and raw enumeration indexes for `A`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SetSpec {
    Empty,
    /// Every number; `x` enters at `lag * x`.
    All {
        #[serde(default)]
        lag: u64,
    },
    /// Multiples of `modulus` shifted by `offset`; `x` enters at `lag * x`.
    Residue {
        modulus: u64,
        offset: u64,
        #[serde(default)]
        lag: u64,
    },
    Evens {
        #[serde(default)]
        lag: u64,
    },
    Odds {
        #[serde(default)]
        lag: u64,
    },
    /// Every number from `from` on.
    Cofinite { from: u64 },
    /// Listed `(number, entry)` pairs.
    Explicit { entries: Vec<(u64, u64)> },
    /// Each number is a member with probability `density`, entering at a uniform stage below `max_entry`.
    Random {
        density: f64,
        max_entry: u64,
        seed: u64,
    },
}

impl SetSpec {
    /// Whether the described set is cofinite in the unbounded universe.
    pub fn is_cofinite(&self) -> bool {
        match self {
            SetSpec::All { .. } | SetSpec::Cofinite { .. } => true,
            SetSpec::Residue { modulus, .. } => *modulus <= 1,
            SetSpec::Random { density, .. } => *density >= 1.0,
            _ => false,
        }
    }

    pub fn validate(&self, what: &str, horizon: u64) -> Result<(), ScriptError> {
        match self {
            SetSpec::Residue { modulus, offset, .. } if *modulus == 0 || offset >= modulus => {
                Err(ScriptError::invalid(what, "residue needs modulus > offset"))
            }
            SetSpec::Random { density, .. } if !(0.0..=1.0).contains(density) => {
                Err(ScriptError::invalid(what, "density must lie in [0,1]"))
            }
            SetSpec::Explicit { entries } => {
                for (i, (x, t)) in entries.iter().enumerate() {
                    if *t >= horizon {
                        return Err(ScriptError::invalid(
                            what,
                            &format!("entry #{i} ({x} at {t}) is not below the horizon {horizon}"),
                        ));
                    }
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Entry stage of every number below `universe`; `None` means never.
    pub fn materialize(&self, universe: u64) -> Vec<Option<u64>> {
        let u = universe as usize;
        let mut out = vec![None; u];
        match self {
            SetSpec::Empty => {}
            SetSpec::All { lag } => {
                for (x, slot) in out.iter_mut().enumerate() {
                    *slot = Some(lag * x as u64);
                }
            }
            SetSpec::Residue { modulus, offset, lag } => {
                for (x, slot) in out.iter_mut().enumerate() {
                    if x as u64 % modulus == *offset {
                        *slot = Some(lag * x as u64);
                    }
                }
            }
            SetSpec::Evens { lag } => {
                for (x, slot) in out.iter_mut().enumerate() {
                    if x % 2 == 0 {
                        *slot = Some(lag * x as u64);
                    }
                }
            }
            SetSpec::Odds { lag } => {
                for (x, slot) in out.iter_mut().enumerate() {
                    if x % 2 == 1 {
                        *slot = Some(lag * x as u64);
                    }
                }
            }
            SetSpec::Cofinite { from } => {
                for (x, slot) in out.iter_mut().enumerate() {
                    if x as u64 >= *from {
                        *slot = Some(0);
                    }
                }
            }
            SetSpec::Explicit { entries } => {
                for &(x, t) in entries {
                    if (x as usize) < u {
                        let slot = &mut out[x as usize];
                        *slot = Some(slot.map_or(t, |old| old.min(t)));
                    }
                }
            }
            SetSpec::Random { density, max_entry, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                for slot in out.iter_mut() {
                    let member = rng.gen_bool(*density);
                    let t = rng.gen_range(0..(*max_entry).max(1));
                    if member {
                        *slot = Some(t);
                    }
                }
            }
        }
        out
    }
}

/// A materialized scripted set: entry stage per number below the universe.
#[derive(Clone, Debug, PartialEq)]
pub struct ScriptedSet {
    entry: Vec<Option<u64>>,
}

impl ScriptedSet {
    pub fn new(entry: Vec<Option<u64>>) -> ScriptedSet {
        ScriptedSet { entry }
    }

    pub fn from_spec(spec: &SetSpec, universe: u64) -> ScriptedSet {
        ScriptedSet::new(spec.materialize(universe))
    }

    pub fn universe(&self) -> u64 {
        self.entry.len() as u64
    }

    pub fn entry(&self, x: u64) -> Option<u64> {
        self.entry.get(x as usize).copied().flatten()
    }

    /// Membership by stage `s` (entry at or before `s`).
    pub fn contains_at(&self, x: u64, s: u64) -> bool {
        self.entry(x).is_some_and(|t| t <= s)
    }

    /// Final membership.
    pub fn contains(&self, x: u64) -> bool {
        self.entry(x).is_some()
    }

    pub fn entries(&self) -> &[Option<u64>] {
        &self.entry
    }
}

/// The scripted family `W_0, W_1, ...`; indexes past the script are empty.
#[derive(Clone, Debug, PartialEq)]
pub struct ScriptedFamily {
    sets: Vec<ScriptedSet>,
}

impl ScriptedFamily {
    pub fn new(sets: Vec<ScriptedSet>) -> ScriptedFamily {
        ScriptedFamily { sets }
    }

    pub fn from_specs(specs: &[SetSpec], universe: u64) -> ScriptedFamily {
        ScriptedFamily::new(specs.iter().map(|s| ScriptedSet::from_spec(s, universe)).collect())
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    /// `x ∈ W_{e,s}`.
    pub fn contains_at(&self, e: usize, x: u64, s: u64) -> bool {
        self.sets.get(e).is_some_and(|w| w.contains_at(x, s))
    }

    pub fn contains(&self, e: usize, x: u64) -> bool {
        self.sets.get(e).is_some_and(|w| w.contains(x))
    }

    pub fn get(&self, e: usize) -> Option<&ScriptedSet> {
        self.sets.get(e)
    }
}
