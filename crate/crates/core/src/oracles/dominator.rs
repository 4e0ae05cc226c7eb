use serde::{Deserialize, Serialize};

use super::ScriptError;

/// Policy producing the approximation `φ_s(n)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DominatorSpec {
    /// At every release stage `t` of the schedule, `φ_{t+1}(n) = scale·t` for all `n`.
    Adaptive {
        #[serde(default)]
        start: u64,
        #[serde(default = "one")]
        every: u64,
        #[serde(default = "one")]
        scale: u64,
    },
    /// `φ_s(n) = min(s, cap)`.
    Capped { cap: u64 },
    /// Raises `(stage, from_n, value)`: `φ_s(n)` is the largest value raised at a stage `≤ s`
    /// for some `from_n ≤ n`, capped by `s`.
    Table { raises: Vec<(u64, u64, u64)> },
}

fn one() -> u64 {
    1
}

impl Default for DominatorSpec {
    fn default() -> DominatorSpec {
        DominatorSpec::Adaptive { start: 0, every: 1, scale: 1 }
    }
}

impl DominatorSpec {
    pub fn validate(&self) -> Result<(), ScriptError> {
        match self {
            DominatorSpec::Adaptive { every: 0, .. } => Err(ScriptError::invalid("dominator", "every must be positive")),
            DominatorSpec::Adaptive { scale: 0, .. } => Err(ScriptError::invalid("dominator", "scale must be positive")),
            _ => Ok(()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DominatorApprox {
    spec: DominatorSpec,
}

impl DominatorApprox {
    pub fn new(spec: DominatorSpec) -> DominatorApprox {
        DominatorApprox { spec }
    }

    pub fn spec(&self) -> &DominatorSpec {
        &self.spec
    }

    /// Whether `t` is a release stage of the adaptive schedule.
    pub fn is_release_stage(&self, t: u64) -> bool {
        match self.spec {
            DominatorSpec::Adaptive { start, every, .. } => t >= start && (t - start).is_multiple_of(every),
            _ => false,
        }
    }

    pub fn phi(&self, s: u64, n: u64) -> u64 {
        match &self.spec {
            DominatorSpec::Adaptive { start, every, scale } => {
                if s <= *start {
                    0
                } else {
                    let t = s - 1;
                    (start + (t - start) / every * every).saturating_mul(*scale)
                }
            }
            DominatorSpec::Capped { cap } => s.min(*cap),
            DominatorSpec::Table { raises } => raises
                .iter()
                .filter(|(t, m, _)| *t <= s && *m <= n)
                .map(|(_, _, v)| *v)
                .max()
                .unwrap_or(0)
                .min(s),
        }
    }
}
