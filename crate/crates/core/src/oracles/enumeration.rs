use super::sets::ScriptedSet;
use super::ScriptError;

/// The reindexed enumeration `Ã` of `A`: `Ã_i = { x : entry(x) < i }`.
#[derive(Clone, Debug, PartialEq)]
pub struct Enumeration {
    entry: Vec<Option<u64>>,
    designated: Vec<u64>,
}

/// Designated true indexes up to `horizon` for a script.
pub fn designated_indexes(explicit: &[u64], every: Option<u64>, horizon: u64) -> Vec<u64> {
    let mut out: Vec<u64> = explicit.iter().copied().filter(|&i| i < horizon).collect();
    if let Some(k) = every.filter(|&k| k > 0) {
        out.extend((k..horizon).step_by(k as usize));
    }
    out.sort_unstable();
    out.dedup();
    out
}

/// First `count` elements of the complement of `{ x : entry(x) < i }` below the universe.
fn complement_window(entry: &[Option<u64>], i: u64, count: u64) -> impl Iterator<Item = usize> + '_ {
    entry
        .iter()
        .enumerate()
        .filter(move |(_, e)| e.is_none_or(|t| t >= i))
        .take(count as usize)
        .map(|(x, _)| x)
}

/// Moves entries so that at each designated index `i` the first `i²` complement elements are final.
/// Entries listed in `pinned` may not move.
pub fn true_stage_reindex(raw: &ScriptedSet, designated: &[u64], pinned: &[u64]) -> Result<Enumeration, ScriptError> {
    let mut entry = raw.entries().to_vec();
    let mut designated = designated.to_vec();
    designated.sort_unstable();
    designated.dedup();
    for &i in &designated {
        if i == 0 {
            continue;
        }
        loop {
            let late: Vec<usize> = complement_window(&entry, i, i * i).filter(|&x| entry[x].is_some()).collect();
            if late.is_empty() {
                break;
            }
            for x in late {
                if pinned.contains(&(x as u64)) {
                    return Err(ScriptError::invalid(
                        "a",
                        &format!("pinned entry of {x} at {} contradicts designated true index {i}", entry[x].unwrap_or(0)),
                    ));
                }
                entry[x] = Some(i - 1);
            }
        }
    }
    Ok(Enumeration { entry, designated })
}

impl Enumeration {
    pub fn entry(&self, x: u64) -> Option<u64> {
        self.entry.get(x as usize).copied().flatten()
    }

    pub fn universe(&self) -> u64 {
        self.entry.len() as u64
    }

    pub fn designated(&self) -> &[u64] {
        &self.designated
    }

    /// `x ∈ Ã_i`.
    pub fn in_stage(&self, x: u64, i: u64) -> bool {
        self.entry(x).is_some_and(|t| t < i)
    }

    /// Final membership in `A`.
    pub fn in_final(&self, x: u64) -> bool {
        self.entry(x).is_some()
    }

    /// Whether the first `i²` complement elements of `Ã_i` are final.
    pub fn is_true_index(&self, i: u64) -> bool {
        complement_window(&self.entry, i, i * i).all(|x| self.entry[x].is_none())
    }

    pub fn entries(&self) -> &[Option<u64>] {
        &self.entry
    }
}

/// Per-stage view of the enumeration: `n(s)`, `A_s`, `Q_s` and `C_s`, restricted to the universe.
#[derive(Clone, Debug, PartialEq)]
pub struct EnumerationState {
    n: u64,
    a_now: Vec<bool>,
    q_end: u64,
    c_end: u64,
}

impl EnumerationState {
    pub fn start(en: &Enumeration) -> EnumerationState {
        EnumerationState::at(en, 0)
    }

    /// Recomputes the state for `n(s) = n` from scratch.
    pub fn at(en: &Enumeration, n: u64) -> EnumerationState {
        let u = en.universe();
        let a_now: Vec<bool> = (0..u).map(|x| en.in_stage(x, n)).collect();
        let mut st = EnumerationState { n, a_now, q_end: 0, c_end: 0 };
        st.recompute(en);
        st
    }

    fn recompute(&mut self, en: &Enumeration) {
        let u = en.universe();
        let want = self.n * self.n;
        let mut seen = 0u64;
        let mut q_end = u;
        if want == 0 {
            q_end = 0;
        } else {
            for x in 0..u {
                if !self.a_now[x as usize] {
                    seen += 1;
                    if seen == want {
                        q_end = x + 1;
                        break;
                    }
                }
            }
        }
        self.q_end = q_end;
        self.c_end = (0..u).find(|&y| en.in_final(y) && !self.a_now[y as usize]).unwrap_or(u);
    }

    /// Advances one step; only new-balls stages move the enumeration.
    pub fn advance(&mut self, en: &Enumeration, is_new_balls_stage: bool) {
        if !is_new_balls_stage {
            return;
        }
        self.n += 1;
        for x in 0..en.universe() {
            if en.in_stage(x, self.n) {
                self.a_now[x as usize] = true;
            }
        }
        self.recompute(en);
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    /// Abstract size of `Q_s`.
    pub fn q_size(&self) -> u64 {
        self.n * self.n
    }

    pub fn in_a(&self, x: u64) -> bool {
        self.a_now.get(x as usize).copied().unwrap_or(false)
    }

    pub fn in_q(&self, x: u64) -> bool {
        x < self.q_end && !self.in_a(x)
    }

    pub fn in_c(&self, x: u64) -> bool {
        self.in_q(x) && x < self.c_end
    }

    /// Materialized members of `Q_s`, ascending.
    pub fn q_members(&self) -> Vec<u64> {
        (0..self.q_end).filter(|&x| !self.in_a(x)).collect()
    }

    pub fn a_members(&self) -> Vec<u64> {
        (0..self.a_now.len() as u64).filter(|&x| self.in_a(x)).collect()
    }

    /// Every member of `Q_s` below the universe lies outside the final `A`.
    pub fn is_a_true(&self) -> bool {
        self.c_end >= self.q_end
    }

    /// `C_s = Q_s ∩ [0, c_end)`.
    pub fn c_end(&self) -> u64 {
        self.c_end
    }

    pub fn q_end(&self) -> u64 {
        self.q_end
    }
}
