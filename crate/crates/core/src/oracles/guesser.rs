use serde::{Deserialize, Serialize};

use super::ScriptError;
use crate::addr::{Mode, Outcome};
use crate::label::LabelSet;

/// Monotone map applied to the unbounded side of the default guesser.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Gain {
    Identity,
    #[default]
    Square,
}

impl Gain {
    pub fn apply(&self, k: u64) -> u64 {
        match self {
            Gain::Identity => k,
            Gain::Square => k.saturating_mul(k),
        }
    }
}

/// A scripted raw stream.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum StreamSpec {
    Const { value: u64 },
    Linear { slope: u64 },
    /// `(stage, value)` points; the value at `s` is the largest value of a point at or before `s`.
    Steps { points: Vec<(u64, u64)> },
}

impl StreamSpec {
    pub fn value(&self, s: u64) -> u64 {
        match self {
            StreamSpec::Const { value } => *value,
            StreamSpec::Linear { slope } => slope.saturating_mul(s),
            StreamSpec::Steps { points } => points.iter().filter(|(t, _)| *t <= s).map(|(_, v)| *v).max().unwrap_or(0),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StreamOverride {
    /// Canonical address of the node whose raw stream is replaced.
    pub addr: String,
    pub stream: StreamSpec,
}

#[derive(Clone, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GuesserSpec {
    #[serde(default)]
    pub gain: Gain,
    #[serde(default)]
    pub overrides: Vec<StreamOverride>,
}

impl GuesserSpec {
    pub fn validate(&self, mode: Mode) -> Result<(), ScriptError> {
        for (i, o) in self.overrides.iter().enumerate() {
            let a = crate::addr::TreeAddress::parse(mode, &o.addr)
                .map_err(|e| ScriptError::invalid("guesser", &format!("override #{i}: {e}")))?;
            if !crate::addr::has_stream(mode, a.len()) {
                return Err(ScriptError::invalid("guesser", &format!("override #{i}: node {} has no stream", o.addr)));
            }
        }
        Ok(())
    }
}

/// Running statistics of one measured quantity at a node, for one label.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RhoStats {
    runmax: u64,
    /// `reach[k]` is the first stage at which the running max reached `k + 1`.
    reach: Vec<u64>,
}

impl RhoStats {
    pub fn record(&mut self, size: u64, stage: u64) {
        while self.runmax < size {
            self.runmax += 1;
            self.reach.push(stage);
        }
    }

    pub fn runmax(&self) -> u64 {
        self.runmax
    }

    /// First stage at which the running max exceeded `n`.
    pub fn exceeded_at(&self, n: u64) -> Option<u64> {
        self.reach.get(n as usize).copied()
    }
}

/// Statistics of a deciding node: per-label running maxima and its checkpoint stages.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct NodeStats {
    pub rho: Vec<RhoStats>,
    checkpoints: Vec<u64>,
}

impl NodeStats {
    pub fn new(labels: usize) -> NodeStats {
        NodeStats { rho: vec![RhoStats::default(); labels], checkpoints: Vec::new() }
    }

    pub fn add_checkpoint(&mut self, stage: u64) {
        self.checkpoints.push(stage);
    }

    pub fn checkpoints(&self) -> &[u64] {
        &self.checkpoints
    }

    /// Checkpoints `t < s` at which the running max for `code` was still at most `n`.
    pub fn count_le(&self, code: usize, n: u64, s: u64) -> u64 {
        let bound = match self.rho[code].exceeded_at(n) {
            Some(t) => t.min(s),
            None => s,
        };
        self.checkpoints.partition_point(|&t| t < bound) as u64
    }

    pub fn count_all(&self, s: u64) -> u64 {
        self.checkpoints.partition_point(|&t| t < s) as u64
    }
}

/// Raw value of the default guesser for the child of a deciding node reached by `o`.
/// `slice` is the scripted tree slice, used for tree children only.
pub fn default_raw(gain: Gain, o: &Outcome, stats: &NodeStats, s: u64, slice: Option<LabelSet>) -> u64 {
    match o {
        Outcome::Inf(_) => gain.apply(stats.rho[0].runmax()),
        Outcome::Fin(n) => stats.count_le(0, *n as u64, s),
        Outcome::DecisionGuess(d, n) => {
            let mut v = u64::MAX;
            for code in 0..d.universe_size() {
                let x = if (d.index() >> code) & 1 == 1 {
                    gain.apply(stats.rho[code].runmax())
                } else {
                    stats.count_le(code, *n as u64, s)
                };
                v = v.min(x);
            }
            v
        }
        Outcome::TreeGuess(e, _) => {
            if slice != Some(*e) {
                return 0;
            }
            if e.is_empty() {
                return stats.count_all(s);
            }
            e.iter().map(|l| gain.apply(stats.rho[l.code() as usize].runmax())).min().unwrap_or(0)
        }
        Outcome::SplitChildIndex(_) | Outcome::ChildLink => 0,
    }
}
