//! A naive re-implementation of the three constructions for tiny scenarios.
//!
//! Nothing is cached between stages except the guesser statistics. Every `Y`-set, `ℓ` value
//! and candidate node is recomputed from the definitions, and the strongest acting node is the
//! leftmost of all qualifying nodes rather than the first hit of an ancestor scan.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::addr::{has_stream, kind_at, label_len_at, left_of_with, role_at, Mode, NodeKind, Outcome, Role, TreeAddress};
use crate::config::{RunConfig, TreeEllReading};
use crate::label::{Label, LabelSet};
use crate::machine::{addr_cmp, address_hash, state_hash, Case, IntervalEntry, IntervalStatus, IntervalTable, OffReason};
use crate::oracles::{default_raw, EnumerationState, NodeStats, Oracles, ScriptError};
use crate::trace::TraceEvent;
use crate::verify::BallFate;

/// Result of a brute-force run.
#[derive(Clone, Debug)]
pub struct BruteRun {
    pub events: Vec<TraceEvent>,
    pub cases: Vec<Case>,
    pub fates: Vec<BallFate>,
}

struct Brute {
    cfg: RunConfig,
    or: Oracles,
    max_len: usize,
    stage: u64,
    en: EnumerationState,
    on: BTreeMap<u64, (TreeAddress, Label)>,
    h: BTreeSet<u64>,
    fates: Vec<BallFate>,
    nodes: Vec<TreeAddress>,
    tables: Vec<(TreeAddress, u64, Vec<IntervalEntry>)>,
    stats: HashMap<TreeAddress, NodeStats>,
    events: Vec<TraceEvent>,
}

fn ext(l: &Label, r: &Label) -> bool {
    l.len() >= r.len() && l.prefix(r.len()) == *r
}

fn under(a: &TreeAddress, b: &TreeAddress) -> bool {
    a.is_prefix_of(b)
}

fn set_of(o: &Outcome) -> Option<LabelSet> {
    match o {
        Outcome::DecisionGuess(d, _) | Outcome::TreeGuess(d, _) => Some(*d),
        _ => None,
    }
}

fn split_m(o: &Outcome) -> u32 {
    match o {
        Outcome::SplitChildIndex(m) => *m,
        _ => u32::MAX,
    }
}

/// `x ∈ [f(k-1), f(k))`, 1-based.
fn interval(t: &[IntervalEntry], x: u64) -> Option<usize> {
    let mut lo = 0;
    for (i, e) in t.iter().enumerate() {
        if lo <= x && x < e.f {
            return Some(i + 1);
        }
        lo = e.f;
    }
    None
}

fn waits(t: &[IntervalEntry], m: u32) -> bool {
    t.iter().any(|e| e.beta == m && e.status == IntervalStatus::Waiting)
}

impl Brute {
    fn new(cfg: &RunConfig) -> Result<Brute, ScriptError> {
        let or = cfg.validate()?;
        let u = or.universe;
        let fates = (0..u)
            .map(|x| BallFate { x, at: None, off: Some(OffReason::NeverPlaced), label: Label::EMPTY, last_move: None, moves: 0 })
            .collect();
        Ok(Brute {
            max_len: cfg.max_len(),
            en: EnumerationState::start(&or.a),
            cfg: cfg.clone(),
            or,
            stage: 0,
            on: BTreeMap::new(),
            h: BTreeSet::new(),
            fates,
            nodes: vec![TreeAddress::root()],
            tables: Vec::new(),
            stats: HashMap::new(),
            events: Vec::new(),
        })
    }

    fn mode(&self) -> Mode {
        self.cfg.mode
    }

    fn deciding(&self, len: usize) -> bool {
        len < self.max_len && matches!(role_at(self.mode(), len), Role::Decision(_) | Role::Tree(_))
    }

    fn w(&self, e: usize, x: u64) -> bool {
        self.or.w.contains_at(e, x, self.stage)
    }

    /// `Y(α,ρ)`: balls at or below `α` whose label extends `ρ`, ascending.
    fn y(&self, alpha: &TreeAddress, rho: &Label) -> Vec<u64> {
        self.on.iter().filter(|(_, (a, l))| under(alpha, a) && ext(l, rho)).map(|(x, _)| *x).collect()
    }

    fn table(&self, alpha: &TreeAddress, code: u64) -> Option<&Vec<IntervalEntry>> {
        self.tables.iter().find(|(a, c, _)| a == alpha && *c == code).map(|(_, _, t)| t)
    }

    fn table_mut(&mut self, alpha: &TreeAddress, code: u64) -> &mut Vec<IntervalEntry> {
        if let Some(i) = self.tables.iter().position(|(a, c, _)| a == alpha && *c == code) {
            return &mut self.tables[i].2;
        }
        self.tables.push((alpha.clone(), code, Vec::new()));
        &mut self.tables.last_mut().expect("pushed").2
    }

    fn hash(&self) -> u64 {
        let tables: Vec<(u64, u64, IntervalTable)> = self
            .tables
            .iter()
            .filter(|(_, _, t)| !t.is_empty())
            .map(|(a, c, t)| (address_hash(a), *c, IntervalTable { entries: t.clone() }))
            .collect();
        state_hash(
            self.stage,
            self.en.n(),
            self.on.iter().map(|(x, (a, l))| (*x, address_hash(a), *l)),
            self.h.iter().copied(),
            tables.iter().map(|(a, c, t)| (*a, *c, t)),
        )
    }

    fn outcomes(&self, len: usize) -> Vec<Outcome> {
        let width = self.cfg.width;
        let mut out = Vec::new();
        match (self.mode(), role_at(self.mode(), len)) {
            (Mode::Maximal, _) => {
                for n in 0..width {
                    out.push(Outcome::Inf(n));
                    out.push(Outcome::Fin(n));
                }
            }
            (_, Role::Decision(e)) => {
                for d in LabelSet::all_subsets(e) {
                    for n in 0..width {
                        out.push(Outcome::DecisionGuess(d, n));
                    }
                }
            }
            (_, Role::Tree(e)) => {
                for d in LabelSet::all_subsets(e) {
                    for n in 0..width {
                        out.push(Outcome::TreeGuess(d, n));
                    }
                }
            }
            _ => {}
        }
        out
    }

    fn measured(&self, len: usize, x: u64) -> bool {
        match (self.mode(), role_at(self.mode(), len)) {
            (Mode::Maximal, _) => self.w(len, x),
            (_, Role::Decision(e)) => self.w(e, x) && self.en.in_c(x),
            (_, Role::Tree(_)) => self.en.in_c(x),
            _ => false,
        }
    }

    /// Deciding nodes with a nonempty `Y`.
    fn occupied_deciding(&self) -> Vec<TreeAddress> {
        let mut out: Vec<TreeAddress> = Vec::new();
        for (a, _) in self.on.values() {
            for i in 0..=a.len() {
                let p = a.prefix(i);
                if self.deciding(i) && !out.contains(&p) {
                    out.push(p);
                }
            }
        }
        out
    }

    fn record_stats(&mut self) {
        if self.mode() == Mode::Maximal && !self.en.is_a_true() {
            return;
        }
        for alpha in self.occupied_deciding() {
            let e = label_len_at(self.mode(), alpha.len());
            let sizes: Vec<u64> = Label::all_of_len(e)
                .map(|rho| self.y(&alpha, &rho).into_iter().filter(|&x| self.measured(alpha.len(), x)).count() as u64)
                .collect();
            let st = self.stats.entry(alpha).or_insert_with(|| NodeStats::new(1 << e));
            for (code, n) in sizes.into_iter().enumerate() {
                st.rho[code].record(n, self.stage);
            }
        }
    }

    fn raw(&self, alpha: &TreeAddress, o: &Outcome) -> u64 {
        if let Some(sp) = self.or.override_for(&alpha.child(*o)) {
            return sp.value(self.stage);
        }
        let slice = match role_at(self.mode(), alpha.len()) {
            Role::Tree(e) => self.or.tree.as_ref().and_then(|t| t.slice(e).ok()),
            _ => None,
        };
        let fresh = NodeStats::new(1 << label_len_at(self.mode(), alpha.len()));
        let st = self.stats.get(alpha).unwrap_or(&fresh);
        default_raw(self.or.gain, o, st, self.stage, slice)
    }

    /// ℓ of `beta`: the least raw value along its streamed prefixes; `None` if there are none.
    fn ell_opt(&self, beta: &TreeAddress) -> Option<u64> {
        (1..=beta.len())
            .filter(|&i| has_stream(self.mode(), i))
            .map(|i| self.raw(&beta.prefix(i - 1), &beta.outcomes()[i - 1]))
            .min()
    }

    fn ell(&self, beta: &TreeAddress) -> u64 {
        self.ell_opt(beta).unwrap_or(u64::MAX)
    }

    /// Candidate children of `alpha` in the order they are listed (not necessarily left to right).
    fn children_of(&self, alpha: &TreeAddress) -> Vec<Outcome> {
        let len = alpha.len();
        if len >= self.max_len {
            return Vec::new();
        }
        match role_at(self.mode(), len) {
            Role::Decision(_) | Role::Tree(_) => self.outcomes(len),
            Role::ParentSplit(_) => (0..self.cfg.split_width).map(Outcome::SplitChildIndex).collect(),
            Role::SplitChild(_) => vec![Outcome::ChildLink],
        }
    }

    /// `x ∈ Y(β⁻) ∖ Y(≤β)` for a ball at `at`.
    fn located(&self, at: &TreeAddress, beta: &TreeAddress) -> bool {
        let parent = beta.prefix(beta.len() - 1);
        under(&parent, at) && !under(beta, at) && !left_of_with(at, beta, self.cfg.dn_order)
    }

    fn candidates(&self, at: &TreeAddress) -> Vec<TreeAddress> {
        let mut out = Vec::new();
        for i in 0..=at.len() {
            let alpha = at.prefix(i);
            for o in self.children_of(&alpha) {
                let beta = alpha.child(o);
                if self.located(at, &beta) {
                    out.push(beta);
                }
            }
        }
        out
    }

    fn leftmost(&self, mut v: Vec<(TreeAddress, Label)>) -> Option<(TreeAddress, Label)> {
        let order = self.cfg.dn_order;
        v.sort_by(|a, b| addr_cmp(&a.0, &b.0, order));
        v.into_iter().next()
    }

    /// The pull of `x` by its strongest puller, as `(target, new label)`.
    fn pull_of(&self, x: u64, at: &TreeAddress, lam: &Label) -> Option<(TreeAddress, Label)> {
        let mut ok = Vec::new();
        for beta in self.candidates(at) {
            let alpha = beta.prefix(beta.len() - 1);
            let o = *beta.last().expect("child");
            let rho = lam.prefix(label_len_at(self.mode(), alpha.len()));
            let pulls = match (self.mode(), role_at(self.mode(), alpha.len())) {
                (Mode::Maximal, _) => {
                    let inf = matches!(o, Outcome::Inf(_));
                    x > beta.len() as u64
                        && (self.y(&beta, &Label::EMPTY).len() as u64) < self.ell(&beta)
                        && (!inf || self.w(alpha.len(), x))
                }
                (_, Role::Decision(e)) => {
                    let in_d = set_of(&o).is_some_and(|d| d.contains(&rho));
                    let yb = self.y(&beta, &rho);
                    let wants = (yb.len() as u64) < self.ell(&beta) || yb.last().is_some_and(|&m| x < m);
                    x > beta.len() as u64 && wants && (!in_d || self.w(e, x))
                }
                (_, Role::Tree(_)) => {
                    let in_e = set_of(&o).is_some_and(|d| d.contains(&rho));
                    let yb = self.y(&beta, &rho);
                    in_e && ((yb.len() as u64) < self.ell(&beta) || yb.last().is_some_and(|&m| x < m))
                }
                (_, Role::ParentSplit(_)) => {
                    let m = split_m(&o);
                    match self.table(&alpha, rho.code()) {
                        None => true,
                        Some(t) => {
                            !waits(t, m) || interval(t, x).is_some_and(|k| t[k - 1].beta == m)
                        }
                    }
                }
                (_, Role::SplitChild(_)) => {
                    let grand = alpha.prefix(alpha.len() - 1);
                    let m = split_m(alpha.last().expect("split child"));
                    *at == alpha
                        && self.table(&grand, lam.code()).is_some_and(|t| {
                            interval(t, x).is_some_and(|k| t[k - 1].beta == m && t[k - 1].status == IntervalStatus::Released)
                        })
                }
            };
            if pulls {
                let label = match role_at(self.mode(), alpha.len()) {
                    Role::SplitChild(_) => lam.push(0),
                    _ => rho,
                };
                ok.push((beta, label));
            }
        }
        self.leftmost(ok)
    }

    fn elimination_of(&self, x: u64, at: &TreeAddress, lam: &Label) -> Option<TreeAddress> {
        let mut ok = Vec::new();
        for beta in self.candidates(at) {
            let alpha = beta.prefix(beta.len() - 1);
            let o = *beta.last().expect("child");
            let rho = lam.prefix(label_len_at(self.mode(), alpha.len()));
            let not_min = self.y(&alpha, &rho).first() != Some(&x);
            let elim = match (self.mode(), role_at(self.mode(), alpha.len())) {
                (Mode::Maximal, _) => {
                    let base = not_min && x < self.ell(&beta);
                    if self.cfg.flags.alt_eliminable {
                        base && matches!(o, Outcome::Inf(_)) && !self.w(alpha.len(), x)
                    } else {
                        base
                    }
                }
                (_, Role::Decision(_)) => not_min && x < self.ell(&beta),
                (_, Role::Tree(_)) => {
                    let in_e = set_of(&o).is_some_and(|d| d.contains(&rho));
                    let bound = match self.cfg.flags.tree_ell {
                        TreeEllReading::Child => self.ell(&beta),
                        TreeEllReading::Parent => self.ell_opt(&alpha).unwrap_or(0),
                    };
                    !in_e && not_min && x < bound
                }
                _ => false,
            };
            if elim {
                ok.push((beta, Label::EMPTY));
            }
        }
        self.leftmost(ok).map(|(b, _)| b)
    }

    fn ensure(&mut self, a: &TreeAddress) {
        for i in 0..=a.len() {
            let p = a.prefix(i);
            if !self.nodes.contains(&p) {
                self.nodes.push(p);
            }
        }
    }

    fn sorted_nodes(&self, kind: NodeKind) -> Vec<TreeAddress> {
        let mut v: Vec<TreeAddress> = self.nodes.iter().filter(|a| kind_at(self.mode(), a.len()) == kind).cloned().collect();
        let order = self.cfg.dn_order;
        v.sort_by(|a, b| addr_cmp(a, b, order));
        v
    }

    fn touch(&mut self, x: u64, at: &TreeAddress, label: Label, moved: bool) {
        self.on.insert(x, (at.clone(), label));
        let f = &mut self.fates[x as usize];
        f.at = Some(at.clone());
        f.off = None;
        f.label = label;
        f.last_move = Some(self.stage);
        if moved {
            f.moves += 1;
        }
    }

    fn take_off(&mut self, x: u64, why: OffReason) {
        self.on.remove(&x);
        self.h.insert(x);
        let f = &mut self.fates[x as usize];
        f.at = None;
        f.off = Some(why);
    }

    fn step(&mut self) -> Case {
        let hash = self.hash();
        self.record_stats();
        let s = self.stage;
        let start: Vec<(u64, TreeAddress, Label)> = self.on.iter().map(|(x, (a, l))| (*x, a.clone(), *l)).collect();

        let pulls: Vec<(u64, TreeAddress, TreeAddress, Label)> = start
            .iter()
            .filter_map(|(x, a, l)| self.pull_of(*x, a, l).map(|(to, lab)| (*x, a.clone(), to, lab)))
            .collect();
        if !pulls.is_empty() {
            let mut elims = Vec::new();
            if self.mode() == Mode::Maximal && self.cfg.flags.simultaneous {
                for (x, a, l) in &start {
                    if pulls.iter().any(|p| p.0 == *x) {
                        continue;
                    }
                    if let Some(by) = self.elimination_of(*x, a, l) {
                        elims.push((*x, a.clone(), by, *l));
                    }
                }
            }
            let mut rider: Vec<(TreeAddress, u64, u32)> = Vec::new();
            for (_, _, to, lab) in &pulls {
                if let Some(Outcome::SplitChildIndex(m)) = to.last() {
                    let alpha = to.prefix(to.len() - 1);
                    if self.table(&alpha, lab.code()).is_some_and(|t| waits(t, *m)) {
                        continue;
                    }
                    match rider.iter_mut().find(|(a, c, _)| *a == alpha && *c == lab.code()) {
                        Some(r) => r.2 = r.2.min(*m),
                        None => rider.push((alpha, lab.code(), *m)),
                    }
                }
            }
            for (x, from, to, lab) in &pulls {
                self.ensure(to);
                self.touch(*x, to, *lab, true);
                self.events.push(TraceEvent::Pull { stage: s, hash, x: *x, from: from.clone(), to: to.clone(), label: *lab });
            }
            let order = self.cfg.dn_order;
            rider.sort_by(|a, b| addr_cmp(&a.0, &b.0, order).then(a.1.cmp(&b.1)));
            for (alpha, code, m) in rider {
                if self.table(&alpha, code).is_none() {
                    continue;
                }
                let t = self.table_mut(&alpha, code);
                let mut moved = Vec::new();
                for (i, e) in t.iter_mut().enumerate() {
                    if e.beta > m {
                        e.beta = m;
                        e.status = IntervalStatus::Waiting;
                        moved.push(i as u64 + 1);
                    }
                }
                let rho = Label::new(label_len_at(self.mode(), alpha.len()) as u8, code);
                for k in moved {
                    self.events.push(TraceEvent::Reassign {
                        stage: s,
                        hash,
                        alpha: alpha.clone(),
                        rho,
                        k,
                        to: alpha.child(Outcome::SplitChildIndex(m)),
                    });
                }
            }
            self.eliminate(elims, hash);
            return Case::Pull;
        }

        let elims: Vec<(u64, TreeAddress, TreeAddress, Label)> = start
            .iter()
            .filter_map(|(x, a, l)| self.elimination_of(*x, a, l).map(|by| (*x, a.clone(), by, *l)))
            .collect();
        if !elims.is_empty() {
            self.eliminate(elims, hash);
            return Case::Eliminate;
        }

        if self.mode() != Mode::Maximal {
            if self.release(&start, hash) {
                return Case::Release;
            }
            if self.establish(&start, hash) {
                return Case::Establish;
            }
        }
        self.new_balls(&start, hash);
        Case::NewBalls
    }

    fn eliminate(&mut self, elims: Vec<(u64, TreeAddress, TreeAddress, Label)>, hash: u64) {
        for (x, at, by, label) in elims {
            self.take_off(x, OffReason::Eliminated);
            self.events.push(TraceEvent::Eliminate { stage: self.stage, hash, x, at, by, label });
        }
    }

    fn cert_labels(&self, beta: &TreeAddress) -> Vec<u64> {
        let e = label_len_at(self.mode(), beta.len());
        if self.mode() == Mode::Balg {
            let set = beta
                .outcomes()
                .iter()
                .rev()
                .find_map(|o| match o {
                    Outcome::TreeGuess(d, _) => Some(*d),
                    _ => None,
                })
                .unwrap_or_else(|| LabelSet::full(0));
            set.iter().map(|l| l.code()).collect()
        } else {
            (0..1u64 << e).collect()
        }
    }

    fn certified(&self, beta: &TreeAddress) -> bool {
        let alpha = beta.prefix(beta.len() - 1);
        let m = split_m(beta.last().expect("split child"));
        let labels = self.cert_labels(beta);
        !labels.is_empty()
            && labels.iter().all(|&c| {
                self.table(&alpha, c).is_some_and(|t| {
                    t.iter()
                        .position(|e| e.beta == m && e.status == IntervalStatus::Waiting)
                        .is_some_and(|i| self.or.dominator.phi(self.stage, i as u64 + 1) > t[i].f)
                })
            })
    }

    fn release(&mut self, start: &[(u64, TreeAddress, Label)], hash: u64) -> bool {
        let s = self.stage;
        let certified: Vec<TreeAddress> = self
            .sorted_nodes(NodeKind::SplitChild)
            .into_iter()
            .filter(|b| b.len() < self.max_len && self.certified(b))
            .collect();
        if certified.is_empty() {
            return false;
        }
        for beta in certified {
            let alpha = beta.prefix(beta.len() - 1);
            let m = split_m(beta.last().expect("split child"));
            let e = label_len_at(self.mode(), beta.len());
            let plus = beta.child(Outcome::ChildLink);
            self.ensure(&plus);
            for code in 0..1u64 << e {
                let Some(t) = self.table(&alpha, code).cloned() else { continue };
                let rho = Label::new(e as u8, code);
                for (i, en) in t.iter().enumerate() {
                    if en.status != IntervalStatus::Waiting || en.beta != m {
                        continue;
                    }
                    let k = i + 1;
                    let lo = if i == 0 { 0 } else { t[i - 1].f };
                    let block: Vec<u64> = start
                        .iter()
                        .filter(|(x, a, l)| *a == beta && *l == rho && *x >= lo && *x < en.f)
                        .map(|(x, _, _)| *x)
                        .collect();
                    let zero: Vec<u64> = block.iter().copied().take(k).collect();
                    let one: Vec<u64> = block.iter().copied().skip(k).collect();
                    for &x in &zero {
                        self.touch(x, &plus, rho.push(0), true);
                    }
                    for &x in &one {
                        self.touch(x, &plus, rho.push(1), true);
                    }
                    self.table_mut(&alpha, code)[i].status = IntervalStatus::Released;
                    self.events.push(TraceEvent::Release {
                        stage: s,
                        hash,
                        alpha: alpha.clone(),
                        rho,
                        k: k as u64,
                        from: beta.clone(),
                        zero,
                        one,
                    });
                }
            }
        }
        true
    }

    fn establish(&mut self, start: &[(u64, TreeAddress, Label)], hash: u64) -> bool {
        let s = self.stage;
        let mut done = false;
        let parents: Vec<TreeAddress> = self
            .sorted_nodes(NodeKind::DecisionChild)
            .into_iter()
            .filter(|a| a.len() < self.max_len && matches!(role_at(self.mode(), a.len()), Role::ParentSplit(_)))
            .collect();
        for alpha in parents {
            let e = label_len_at(self.mode(), alpha.len());
            let order = self.cfg.dn_order;
            let mut kids: Vec<TreeAddress> =
                self.nodes.iter().filter(|b| b.len() == alpha.len() + 1 && alpha.is_prefix_of(b)).cloned().collect();
            kids.sort_by(|a, b| addr_cmp(a, b, order));
            for code in 0..1u64 << e {
                let rho = Label::new(e as u8, code);
                let t = self.table(&alpha, code).cloned().unwrap_or_default();
                let k = t.len() + 1;
                let mut chosen = None;
                for beta in &kids {
                    let m = split_m(beta.last().expect("split child"));
                    if waits(&t, m) {
                        continue;
                    }
                    let members: Vec<u64> =
                        start.iter().filter(|(_, a, l)| a == beta && *l == rho).map(|(x, _, _)| *x).collect();
                    if members.len() >= 2 * k {
                        chosen = Some((beta.clone(), m, members));
                        break;
                    }
                }
                let Some((beta, m, members)) = chosen else { continue };
                let f = 1 + members.iter().copied().max().unwrap_or(0).max(s);
                let u = 1 + members[2 * k - 1];
                self.table_mut(&alpha, code).push(IntervalEntry { f, u, beta: m, status: IntervalStatus::Waiting, defined_at: s });
                self.events.push(TraceEvent::Establish { stage: s, hash, alpha: alpha.clone(), rho, k: k as u64, f, u, at: beta });
                done = true;
            }
        }
        done
    }

    fn new_balls(&mut self, start: &[(u64, TreeAddress, Label)], hash: u64) {
        let s = self.stage;
        let n = self.en.n();
        let q_before = self.en.q_size();
        let a_true = self.mode() != Mode::Maximal || self.en.is_a_true();
        let u = self.or.universe;
        let least = (0..u).find(|&y| self.or.a.in_stage(y, n + 1) && !self.en.in_a(y));
        if let Some(least) = least {
            let order = self.cfg.dn_order;
            let mut keys: Vec<(TreeAddress, u64)> = self.tables.iter().map(|(a, c, _)| (a.clone(), *c)).collect();
            keys.sort_by(|a, b| addr_cmp(&a.0, &b.0, order).then(a.1.cmp(&b.1)));
            for (alpha, code) in keys {
                let t = self.table_mut(&alpha, code);
                let Some(i) = t.iter().position(|e| least < e.u) else { continue };
                let len = t.len();
                t.truncate(i);
                let rho = Label::new(label_len_at(self.mode(), alpha.len()) as u8, code);
                for k in i + 1..=len {
                    self.events.push(TraceEvent::Undefine { stage: s, hash, alpha: alpha.clone(), rho, k: k as u64, cause: s });
                }
            }
        }
        self.en.advance(&self.or.a, true);
        let mut entered = Vec::new();
        for y in 0..u {
            if self.en.in_a(y) && !self.h.contains(&y) {
                self.take_off(y, OffReason::EnteredA);
                entered.push(y);
            }
        }
        let mut placed = Vec::new();
        for x in 0..u {
            if self.en.in_q(x) && !self.h.contains(&x) && self.fates[x as usize].off == Some(OffReason::NeverPlaced) {
                self.touch(x, &TreeAddress::root(), Label::EMPTY, false);
                placed.push(x);
            }
        }
        if a_true {
            let mut occupied: Vec<TreeAddress> = Vec::new();
            for (_, a, _) in start {
                for i in 0..=a.len() {
                    let p = a.prefix(i);
                    if self.deciding(i) && !occupied.contains(&p) {
                        occupied.push(p);
                    }
                }
            }
            for alpha in occupied {
                let labels = 1 << label_len_at(self.mode(), alpha.len());
                self.stats.entry(alpha).or_insert_with(|| NodeStats::new(labels)).add_checkpoint(s);
            }
        }
        let q_after = self.en.q_size();
        self.events.push(TraceEvent::NewBalls { stage: s, hash, n, q_before, q_after, entered_a: entered, placed });
    }
}

/// Runs `cfg` to its budget with the naive implementation.
pub fn brute_force_run(cfg: &RunConfig) -> Result<BruteRun, ScriptError> {
    let mut b = Brute::new(cfg)?;
    let mut cases = Vec::new();
    while b.stage < cfg.budget {
        cases.push(b.step());
        b.stage += 1;
    }
    Ok(BruteRun { events: b.events, cases, fates: b.fates })
}

/// Per-ball fate table of the naive implementation.
pub fn brute_force_fate(cfg: &RunConfig) -> Result<Vec<BallFate>, ScriptError> {
    brute_force_run(cfg).map(|r| r.fates)
}

/// First index at which two event sequences differ, with both sides.
pub fn first_divergence<'a>(a: &'a [TraceEvent], b: &'a [TraceEvent]) -> Option<(usize, Option<&'a TraceEvent>, Option<&'a TraceEvent>)> {
    let n = a.len().max(b.len());
    (0..n).find(|&i| a.get(i) != b.get(i)).map(|i| (i, a.get(i), b.get(i)))
}
