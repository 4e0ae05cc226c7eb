//! Pull and elimination rules of the maximal-superset construction.
//!
//! The location clause (`x ∈ Y(β⁻) ∖ Y(≤β)`) is checked by the engine; these functions
//! evaluate the remaining clauses from the start-of-stage view.

/// Remaining pull clauses for `β` of length `beta_len`: `x > |β|`, `|Y(β)| < ℓ(β)`,
/// and `x ∈ W_{|β⁻|,s}` when `β` is an `∞`-node.
pub fn pullable(x: u64, beta_len: usize, y_beta_count: usize, ell: u64, is_inf: bool, in_w: bool) -> bool {
    x > beta_len as u64 && (y_beta_count as u64) < ell && (!is_inf || in_w)
}

/// Remaining elimination clauses: `x ≠ min Y(β⁻)` and `x < ℓ(β)`.
pub fn eliminable(x: u64, min_parent: Option<u64>, ell: u64) -> bool {
    min_parent != Some(x) && x < ell
}

/// The alternative elimination clause: only `∞`-children eliminate, and only balls outside `W`.
pub fn eliminable_alt(x: u64, min_parent: Option<u64>, ell: u64, is_inf: bool, in_w: bool) -> bool {
    eliminable(x, min_parent, ell) && is_inf && !in_w
}
