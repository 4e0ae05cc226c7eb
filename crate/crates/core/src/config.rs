//! Run configuration and script files.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::addr::{DnOrder, Mode, TreeAddress};
use crate::oracles::{
    designated_indexes, true_stage_reindex, DominatorApprox, DominatorSpec, GuesserSpec, Oracles, ScriptError,
    ScriptedFamily, ScriptedSet, ScriptedTree, SetSpec, TreeSpec,
};

pub const MAX_UNIVERSE: u64 = 1 << 20;

/// Script for the set `A`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ASpec {
    #[serde(default = "empty_set")]
    pub set: SetSpec,
    /// Explicit designated true indexes.
    #[serde(default)]
    pub true_indexes: Vec<u64>,
    /// Designate every `k`-th index as true.
    #[serde(default = "default_true_every")]
    pub true_every: Option<u64>,
    /// Elements whose entry may not be moved by the reindexing.
    #[serde(default)]
    pub pinned: Vec<u64>,
}

fn empty_set() -> SetSpec {
    SetSpec::Empty
}

fn default_true_every() -> Option<u64> {
    Some(3)
}

impl Default for ASpec {
    fn default() -> ASpec {
        ASpec { set: SetSpec::Empty, true_indexes: Vec::new(), true_every: default_true_every(), pinned: Vec::new() }
    }
}

/// All scripted oracle inputs of a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Script {
    /// Balls are the numbers below `universe`.
    pub universe: u64,
    #[serde(default)]
    pub a: ASpec,
    #[serde(default)]
    pub w: Vec<SetSpec>,
    #[serde(default)]
    pub tree: Option<TreeSpec>,
    #[serde(default)]
    pub dominator: DominatorSpec,
    #[serde(default)]
    pub guesser: GuesserSpec,
}

impl Default for Script {
    fn default() -> Script {
        Script {
            universe: 64,
            a: ASpec::default(),
            w: Vec::new(),
            tree: None,
            dominator: DominatorSpec::default(),
            guesser: GuesserSpec::default(),
        }
    }
}

/// Which `ℓ` bounds elimination by tree children.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TreeEllReading {
    /// `ℓ` of the eliminating child.
    #[default]
    Child,
    /// `ℓ` of the tree node itself, inherited from its nearest streamed ancestors.
    Parent,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Flags {
    /// Maximal mode: eliminate non-pullable balls in the same stage as pulls.
    #[serde(default)]
    pub simultaneous: bool,
    /// Maximal mode: `∞`-children eliminate only balls outside `W`.
    #[serde(default)]
    pub alt_eliminable: bool,
    #[serde(default)]
    pub tree_ell: TreeEllReading,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyParams {
    /// Fraction of the run treated as the final window.
    #[serde(default = "half")]
    pub window: f64,
    #[serde(default = "five")]
    pub epsilon: usize,
    /// Label depth of the extracted `Z` family.
    #[serde(default = "two")]
    pub z_depth: usize,
}

fn half() -> f64 {
    0.5
}
fn five() -> usize {
    5
}
fn two() -> usize {
    2
}

impl Default for VerifyParams {
    fn default() -> VerifyParams {
        VerifyParams { window: 0.5, epsilon: 5, z_depth: 2 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub mode: Mode,
    pub budget: u64,
    #[serde(default)]
    pub seed: u64,
    /// Depth of the materialized tree, counted in levels.
    #[serde(default = "default_levels")]
    pub levels: usize,
    /// Decision and tree outcomes use `n < width`.
    #[serde(default = "default_width")]
    pub width: u32,
    /// Parent splitting nodes have children `0..split_width`.
    #[serde(default = "default_split_width")]
    pub split_width: u32,
    #[serde(default)]
    pub dn_order: DnOrder,
    #[serde(default)]
    pub flags: Flags,
    #[serde(default = "default_snapshot_period")]
    pub snapshot_period: u64,
    #[serde(default)]
    pub verify: VerifyParams,
    pub script: Script,
}

fn default_levels() -> usize {
    2
}
fn default_width() -> u32 {
    4
}
fn default_split_width() -> u32 {
    32
}
fn default_snapshot_period() -> u64 {
    500
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ConfigError {
    #[error("{0}")]
    Script(#[from] ScriptError),
    #[error("cannot parse configuration: {0}")]
    Parse(String),
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
}

/// 1-based line of the first header or key naming `section`.
fn line_of(source: &str, section: &str) -> Option<usize> {
    let head = section.split('.').next().unwrap_or(section);
    source.lines().position(|l| {
        let t = l.trim_start();
        t.starts_with(&format!("[{head}]"))
            || t.starts_with(&format!("[{head}."))
            || t.starts_with(&format!("[[{head}]]"))
            || t.starts_with(&format!("[script.{head}"))
            || t.starts_with(&format!("[[script.{head}"))
            || t.split('=').next().is_some_and(|k| k.trim() == head)
    })
    .map(|i| i + 1)
}

fn parse_error(source: &str, e: toml::de::Error) -> ConfigError {
    let line = e.span().map(|sp| source[..sp.start.min(source.len())].lines().count().max(1));
    let msg = e.message().to_string();
    match line {
        Some(l) => ConfigError::Parse(format!("line {l}: {msg}")),
        None => ConfigError::Parse(msg),
    }
}

fn locate(source: &str, err: ScriptError) -> ScriptError {
    match line_of(source, &err.section) {
        Some(l) if err.line.is_none() => err.at_line(l),
        _ => err,
    }
}

impl Script {
    pub fn from_toml_str(source: &str) -> Result<Script, ConfigError> {
        let s: Script = toml::from_str(source).map_err(|e| parse_error(source, e))?;
        Ok(s)
    }

    /// Validates against a mode and horizon, and builds the oracles.
    pub fn build(&self, mode: Mode, horizon: u64, levels: usize) -> Result<Oracles, ScriptError> {
        if self.universe == 0 || self.universe > MAX_UNIVERSE {
            return Err(ScriptError::invalid("universe", &format!("universe must lie in 1..={MAX_UNIVERSE}")));
        }
        if self.a.set.is_cofinite() {
            return Err(ScriptError::invalid("a", "A must be coinfinite"));
        }
        self.a.set.validate("a", horizon)?;
        for (e, w) in self.w.iter().enumerate() {
            w.validate(&format!("w.{e}"), horizon.max(1)).map_err(|mut err| {
                err.section = "w".to_string();
                err.message = format!("W_{e}: {}", err.message);
                err
            })?;
        }
        self.dominator.validate()?;
        self.guesser.validate(mode)?;
        let raw = ScriptedSet::from_spec(&self.a.set, self.universe);
        let designated = designated_indexes(&self.a.true_indexes, self.a.true_every, horizon);
        let a = true_stage_reindex(&raw, &designated, &self.a.pinned)?;
        let w = ScriptedFamily::from_specs(&self.w, self.universe);
        let tree = match (&self.tree, mode) {
            (Some(t), _) => Some(ScriptedTree::from_spec(t)?),
            (None, Mode::Balg) => return Err(ScriptError::invalid("tree", "balg mode needs a scripted tree")),
            (None, _) => None,
        };
        if let (Some(t), Mode::Balg) = (&tree, mode) {
            if t.depth() < levels {
                return Err(ScriptError::invalid(
                    "tree",
                    &format!("tree depth {} is below the {levels} levels of the run", t.depth()),
                ));
            }
        }
        let mut overrides = HashMap::new();
        for o in &self.guesser.overrides {
            let addr = TreeAddress::parse(mode, &o.addr).map_err(|e| ScriptError::invalid("guesser", &e.to_string()))?;
            overrides.insert(addr, o.stream.clone());
        }
        Ok(Oracles {
            mode,
            universe: self.universe,
            a,
            w,
            dominator: DominatorApprox::new(self.dominator.clone()),
            tree,
            gain: self.guesser.gain,
            overrides,
        })
    }
}

impl RunConfig {
    pub fn new(mode: Mode, budget: u64, script: Script) -> RunConfig {
        RunConfig {
            mode,
            budget,
            seed: 0,
            levels: default_levels(),
            width: default_width(),
            split_width: default_split_width(),
            dn_order: DnOrder::default(),
            flags: Flags::default(),
            snapshot_period: default_snapshot_period(),
            verify: VerifyParams::default(),
            script,
        }
    }

    pub fn from_toml_str(source: &str) -> Result<RunConfig, ConfigError> {
        let c: RunConfig = toml::from_str(source).map_err(|e| parse_error(source, e))?;
        c.validate().map_err(|e| ConfigError::Script(locate(source, e)))?;
        Ok(c)
    }

    pub fn max_levels(mode: Mode) -> usize {
        match mode {
            Mode::Maximal => 60,
            _ => 4,
        }
    }

    pub fn validate(&self) -> Result<Oracles, ScriptError> {
        if self.budget == 0 {
            return Err(ScriptError::invalid("budget", "budget must be positive"));
        }
        if self.levels == 0 || self.levels > RunConfig::max_levels(self.mode) {
            return Err(ScriptError::invalid(
                "levels",
                &format!("levels must lie in 1..={} for {} mode", RunConfig::max_levels(self.mode), self.mode),
            ));
        }
        if self.width == 0 || self.split_width == 0 {
            return Err(ScriptError::invalid("width", "widths must be positive"));
        }
        if !(0.0..=1.0).contains(&self.verify.window) || self.verify.window == 0.0 {
            return Err(ScriptError::invalid("verify", "window must lie in (0,1]"));
        }
        self.script.build(self.mode, self.budget, self.levels)
    }

    /// Hex SHA-256 of the canonical JSON form.
    pub fn digest(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        hex::encode(Sha256::digest(json.as_bytes()))
    }

    /// Length of the longest materialized address.
    pub fn max_len(&self) -> usize {
        match self.mode {
            Mode::Maximal => self.levels,
            Mode::Hhs => 3 * self.levels,
            Mode::Balg => 4 * self.levels + 1,
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}
