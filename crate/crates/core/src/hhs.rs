//! Rules of the atomless hyperhypersimple-superset construction: labeled pulls, intervals,
//! certification and release. Location clauses are checked by the engine.

use crate::machine::{IntervalStatus, IntervalTable};
use crate::oracles::Enumeration;

/// Size and maximum of `Y(β,ρ,s)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct YView {
    pub count: usize,
    pub max: Option<u64>,
}

impl YView {
    pub fn of(balls: &[u64]) -> YView {
        YView { count: balls.len(), max: balls.iter().copied().max() }
    }

    /// `|Y| < ℓ`, or `Y ≠ ∅` and `x < max Y`.
    pub fn wants(&self, x: u64, ell: u64) -> bool {
        (self.count as u64) < ell || self.max.is_some_and(|m| x < m)
    }
}

/// Remaining pull clauses for a decision child `β = α⌢D_n` and label `ρ`.
pub fn decision_pullable(x: u64, beta_len: usize, y: YView, ell: u64, rho_in_d: bool, in_w: bool) -> bool {
    x > beta_len as u64 && y.wants(x, ell) && (!rho_in_d || in_w)
}

/// Remaining elimination clauses: `x ≠ min Y(α,ρ)` and `x < ℓ(β)`.
pub fn decision_eliminable(x: u64, min_parent: Option<u64>, ell: u64) -> bool {
    min_parent != Some(x) && x < ell
}

/// Split child `m` of `α` may pull `x` for `(α,ρ)`: nothing waits at `m`,
/// or `x` lies in an interval assigned to `m`.
pub fn splitchild_pullable(table: Option<&IntervalTable>, m: u32, x: u64) -> bool {
    let Some(t) = table else { return true };
    if !t.waiting_at(m) {
        return true;
    }
    t.interval_of(x).is_some_and(|k| t.entries[k - 1].beta == m)
}

/// The `k` for which `(β,ρ,k)` is ready at split child `m`, if any.
pub fn ready_for_definition(table: Option<&IntervalTable>, m: u32, s_count: usize) -> Option<usize> {
    let k = table.map_or(1, |t| t.next_k());
    if table.is_some_and(|t| t.waiting_at(m)) {
        return None;
    }
    (s_count >= 2 * k).then_some(k)
}

/// Whether a specific `k` is ready: `f(k)↑`, `f(k-1)↓`, nothing waiting at `m`, `|S| ≥ 2k`.
pub fn is_ready(table: Option<&IntervalTable>, m: u32, s_count: usize, k: usize) -> bool {
    k >= 1 && ready_for_definition(table, m, s_count) == Some(k)
}

/// Certification of split child `m` over the given labels' tables.
/// Every table needs a waiting interval at `m` whose least `k` has `φ_s(k) > f(k)`.
pub fn is_certified<'a>(tables: impl IntoIterator<Item = Option<&'a IntervalTable>>, m: u32, phi: impl Fn(u64) -> u64) -> bool {
    let mut any = false;
    for t in tables {
        any = true;
        let Some(t) = t else { return false };
        let Some(k) = t.least_waiting(m) else { return false };
        if phi(k as u64) <= t.entries[k - 1].f {
            return false;
        }
    }
    any
}

/// The grandchild of `α` through split child `m` may pull `x ∈ S(β,ρ)` with label `ρ0`.
pub fn grandchild_pullable(table: Option<&IntervalTable>, m: u32, x: u64) -> bool {
    let Some(t) = table else { return false };
    t.interval_of(x).is_some_and(|k| {
        let e = &t.entries[k - 1];
        e.beta == m && e.status == IntervalStatus::Released
    })
}

/// `f = 1 + max({s} ∪ S)` and the least use `u` with `|S ∩ [0,u)| ≥ 2k`. `s_sorted` ascending.
pub fn establish_values(s: u64, s_sorted: &[u64], k: usize) -> (u64, u64) {
    assert!(k >= 1 && s_sorted.len() >= 2 * k, "establishing needs at least 2k balls");
    let f = 1 + s_sorted.last().copied().unwrap_or(0).max(s);
    let u = 1 + s_sorted[2 * k - 1];
    (f, u)
}

/// The `k` least balls of a block keep `ρ0`; the rest get `ρ1`. `block` ascending.
pub fn release_split(block: &[u64], k: usize) -> (Vec<u64>, Vec<u64>) {
    let cut = k.min(block.len());
    (block[..cut].to_vec(), block[cut..].to_vec())
}

/// The final `A` agrees with `A_s` below `u` (harness-side check).
pub fn a_correct(en: &Enumeration, n: u64, u: u64) -> bool {
    (0..u.min(en.universe())).all(|y| en.in_stage(y, n) == en.in_final(y))
}
