//! Priority-free pinball constructions on a finitely branching tree of strategies.

pub mod addr;
pub mod balg;
pub mod config;
pub mod engine;
pub mod hhs;
pub mod label;
pub mod machine;
pub mod maximal;
pub mod oracles;
pub mod report;
pub mod run;
pub mod scenarios;
pub mod trace;
pub mod verify;

pub use addr::{Mode, NodeKind, Outcome, StructuralError, TreeAddress};
pub use config::{RunConfig, Script};
pub use engine::Engine;
pub use label::{Label, LabelSet};
pub use machine::Case;
pub use trace::TraceEvent;
