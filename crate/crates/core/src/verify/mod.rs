//! Post-hoc and in-loop verification.

mod brute;
mod invariants;
mod replay;
mod trace_checks;
mod truepath;
mod zfamily;

pub use brute::{brute_force_fate, brute_force_run, first_divergence, BruteRun};
pub use invariants::{check_stage_invariants, CheckContext, InvariantClass, Violation};
pub use replay::{replay, replay_with, ReplayMismatch};
pub use trace_checks::{
    check_interval_discipline, check_kb_monotone, check_q_growth, check_release_split, check_trace, TraceViolation,
};
pub use truepath::{infer_true_path, infer_true_path_sampled, EllSamples, TruePathEstimate};
pub use zfamily::{
    check_lattice, decisions_on_path, extract_z, extract_z_from_fates, fates, fates_from_events, window_start, BallFate,
    DecisionCheck, LatticeReport, SiblingCheck, ZFamily,
};
