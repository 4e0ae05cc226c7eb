//! The stage loop shared by the three modes.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use crate::addr::{has_stream, kind_at, label_len_at, outcome_order_with, role_at, Mode, NodeKind, Outcome, Role, StructuralError, TreeAddress};
use crate::balg;
use crate::config::{RunConfig, TreeEllReading};
use crate::hhs::{self, YView};
use crate::label::{Label, LabelSet};
use crate::machine::{
    addr_cmp, state_hash, Arena, Ball, BallRecord, Case, IntervalEntry, IntervalKey, IntervalStatus, IntervalTable, Loc,
    NodeId, OffReason, Snapshot, ROOT,
};
use crate::maximal;
use crate::oracles::{default_raw, EnumerationState, NodeStats, Oracles};
use crate::trace::TraceEvent;

fn stats_slot(stats: &mut Vec<Option<NodeStats>>, a: usize, labels: usize) -> &mut NodeStats {
    if stats.len() <= a {
        stats.resize(a + 1, None);
    }
    stats[a].get_or_insert_with(|| NodeStats::new(labels))
}

/// Children considered at a deciding node of length `len`, in outcome order.
pub fn candidate_outcomes(mode: Mode, len: usize, width: u32, order: crate::addr::DnOrder) -> Vec<Outcome> {
    let mut out = Vec::new();
    match (mode, role_at(mode, len)) {
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
    out.sort_by(|a, b| outcome_order_with(a, b, order).unwrap_or(Ordering::Equal));
    out
}

#[derive(Clone, Copy, Debug)]
struct Agg {
    count: u32,
    min: u64,
    max: u64,
    measure: u32,
}

impl Default for Agg {
    fn default() -> Agg {
        Agg { count: 0, min: u64::MAX, max: 0, measure: 0 }
    }
}

impl Agg {
    fn y(&self) -> YView {
        YView { count: self.count as usize, max: (self.count > 0).then_some(self.max) }
    }

    fn min(&self) -> Option<u64> {
        (self.count > 0).then_some(self.min)
    }
}

#[derive(Clone, Debug)]
struct Cand {
    o: Outcome,
    ell: u64,
    node: Option<NodeId>,
    set: u64,
}

/// Start-of-stage view of the machine.
#[derive(Clone, Debug, Default)]
pub struct View {
    residents: Vec<Vec<(u64, Label)>>,
    agg: Vec<Vec<Agg>>,
    total: Vec<u32>,
    chain: Vec<u64>,
    cands: Vec<Option<Vec<Cand>>>,
    /// `prefix_max[a][i]`: largest ℓ among the first `i` candidates at `a`.
    prefix_max: Vec<Vec<u64>>,
    /// Per parent-split node and label code: leftmost child with nothing waiting, and the table.
    split: Vec<Vec<(u32, Option<IntervalTable>)>>,
}

/// Where a ball is pulled to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct PullTarget {
    parent: NodeId,
    o: Outcome,
    label: Label,
}

#[derive(Clone, Debug)]
pub struct Engine {
    cfg: RunConfig,
    or: Arc<Oracles>,
    stage: u64,
    en: EnumerationState,
    arena: Arena,
    balls: Vec<Ball>,
    h: Vec<bool>,
    intervals: BTreeMap<IntervalKey, IntervalTable>,
    stats: Vec<Option<NodeStats>>,
    outcomes: HashMap<usize, Arc<Vec<Outcome>>>,
    /// Position of each node's outcome in its parent's candidate list.
    rank: Vec<u32>,
    paths: Vec<Arc<[NodeId]>>,
    events: Vec<TraceEvent>,
    cases: Vec<Case>,
    last_case: Option<Case>,
    max_len: usize,
}

impl Engine {
    pub fn new(cfg: RunConfig, or: Arc<Oracles>) -> Engine {
        let u = or.universe as usize;
        let en = EnumerationState::start(&or.a);
        let max_len = cfg.max_len();
        Engine {
            arena: Arena::new(cfg.mode, cfg.dn_order),
            cfg,
            stage: 0,
            en,
            balls: vec![Ball { loc: Loc::Off(OffReason::NeverPlaced), label: Label::EMPTY }; u],
            h: vec![false; u],
            intervals: BTreeMap::new(),
            stats: Vec::new(),
            outcomes: HashMap::new(),
            rank: Vec::new(),
            paths: Vec::new(),
            events: Vec::new(),
            cases: Vec::new(),
            last_case: None,
            max_len,
            or,
        }
    }

    pub fn mode(&self) -> Mode {
        self.cfg.mode
    }

    pub fn config(&self) -> &RunConfig {
        &self.cfg
    }

    pub fn oracles(&self) -> &Oracles {
        &self.or
    }

    pub fn stage(&self) -> u64 {
        self.stage
    }

    pub fn enumeration(&self) -> &EnumerationState {
        &self.en
    }

    pub fn arena(&self) -> &Arena {
        &self.arena
    }

    pub fn balls(&self) -> &[Ball] {
        &self.balls
    }

    pub fn in_h(&self, x: u64) -> bool {
        self.h.get(x as usize).copied().unwrap_or(false)
    }

    pub fn intervals(&self) -> &BTreeMap<IntervalKey, IntervalTable> {
        &self.intervals
    }

    pub fn events(&self) -> &[TraceEvent] {
        &self.events
    }

    pub fn take_events(&mut self) -> Vec<TraceEvent> {
        std::mem::take(&mut self.events)
    }

    pub fn cases(&self) -> &[Case] {
        &self.cases
    }

    pub fn last_case(&self) -> Option<Case> {
        self.last_case
    }

    pub fn is_done(&self) -> bool {
        self.stage >= self.cfg.budget
    }

    /// Location and label of a ball on the machine.
    pub fn ball_at(&self, x: u64) -> Option<(&TreeAddress, Label)> {
        let b = self.balls.get(x as usize)?;
        b.node().map(|n| (self.arena.addr(n), b.label))
    }

    pub fn state_hash(&self) -> u64 {
        let arena = &self.arena;
        state_hash(
            self.stage,
            self.en.n(),
            self.balls.iter().enumerate().filter_map(|(x, b)| b.node().map(|n| (x as u64, arena.hash(n), b.label))),
            self.h.iter().enumerate().filter(|(_, m)| **m).map(|(x, _)| x as u64),
            self.intervals.iter().map(|((a, rho), t)| (arena.hash(*a), *rho, t)),
        )
    }

    pub fn snapshot(&self) -> Snapshot {
        Snapshot {
            mode: self.cfg.mode,
            stage: self.stage,
            n: self.en.n(),
            nodes: self.arena.addrs(),
            balls: self
                .balls
                .iter()
                .enumerate()
                .filter_map(|(x, b)| b.node().map(|n| BallRecord { x: x as u64, node: n, label: b.label }))
                .collect(),
            h: self.h.iter().enumerate().filter(|(_, m)| **m).map(|(x, _)| x as u64).collect(),
            intervals: self.intervals.clone(),
            last_case: self.last_case,
        }
    }

    fn outcomes_at(&mut self, len: usize) -> Arc<Vec<Outcome>> {
        let (mode, width, order) = (self.cfg.mode, self.cfg.width, self.cfg.dn_order);
        Arc::clone(self.outcomes.entry(len).or_insert_with(|| Arc::new(candidate_outcomes(mode, len, width, order))))
    }

    fn w(&self, e: usize, x: u64) -> bool {
        self.or.w.contains_at(e, x, self.stage)
    }

    fn is_deciding(&self, len: usize) -> bool {
        len < self.max_len && matches!(role_at(self.cfg.mode, len), Role::Decision(_) | Role::Tree(_))
    }

    fn slice(&self, e: usize) -> Option<LabelSet> {
        self.or.tree.as_ref().and_then(|t| t.slice(e).ok())
    }

    fn raw_of(&self, alpha: NodeId, o: &Outcome) -> u64 {
        if !self.or.overrides.is_empty() {
            let a = self.arena.addr(alpha).child(*o);
            if let Some(sp) = self.or.override_for(&a) {
                return sp.value(self.stage);
            }
        }
        let slice = match role_at(self.cfg.mode, self.arena.depth(alpha)) {
            Role::Tree(e) => self.slice(e),
            _ => None,
        };
        let empty;
        let stats = match self.stats.get(alpha as usize).and_then(|s| s.as_ref()) {
            Some(s) => s,
            None => {
                let labels = 1usize << label_len_at(self.cfg.mode, self.arena.depth(alpha));
                empty = NodeStats::new(labels);
                &empty
            }
        };
        default_raw(self.or.gain, o, stats, self.stage, slice)
    }

    /// Measured quantity of the guesser at deciding node of length `len`.
    fn measure(&self, len: usize, x: u64) -> bool {
        match (self.cfg.mode, role_at(self.cfg.mode, len)) {
            (Mode::Maximal, _) => self.w(len, x),
            (_, Role::Decision(e)) => self.w(e, x) && self.en.in_c(x),
            (_, Role::Tree(_)) => self.en.in_c(x),
            _ => false,
        }
    }

    /// Builds the start-of-stage view and records the guesser's measurements for this stage.
    fn prepare(&mut self) -> View {
        let mode = self.cfg.mode;
        let nn = self.arena.len();
        let mut v = View {
            residents: vec![Vec::new(); nn],
            agg: (0..nn).map(|i| vec![Agg::default(); 1 << label_len_at(mode, self.arena.depth(i as NodeId))]).collect(),
            total: vec![0; nn],
            chain: vec![u64::MAX; nn],
            cands: vec![None; nn],
            prefix_max: vec![Vec::new(); nn],
            split: vec![Vec::new(); nn],
        };
        for i in self.paths.len()..nn {
            let id = i as NodeId;
            let mut p: Vec<NodeId> = match self.arena.parent(id) {
                Some(q) => self.paths[q as usize].to_vec(),
                None => Vec::new(),
            };
            p.push(id);
            self.paths.push(p.into());
            let mut rank = u32::MAX;
            if let (Some(q), Some(o)) = (self.arena.parent(id), self.arena.last_outcome(id)) {
                let len = self.arena.depth(q);
                if self.is_deciding(len) {
                    let outs = self.outcomes_at(len);
                    let order = self.cfg.dn_order;
                    if let Ok(r) = outs.binary_search_by(|c| outcome_order_with(c, &o, order).unwrap_or(Ordering::Less)) {
                        rank = r as u32;
                    }
                }
            }
            self.rank.push(rank);
        }
        let deciding: Vec<bool> = (0..nn).map(|i| self.is_deciding(self.arena.depth(i as NodeId))).collect();
        for (x, b) in self.balls.iter().enumerate() {
            let Some(node) = b.node() else { continue };
            let x = x as u64;
            v.residents[node as usize].push((x, b.label));
            let mut cur = Some(node);
            while let Some(a) = cur {
                let d = self.arena.depth(a);
                let code = b.label.prefix(label_len_at(mode, d)).code() as usize;
                let g = &mut v.agg[a as usize][code];
                g.count += 1;
                g.min = g.min.min(x);
                g.max = g.max.max(x);
                if deciding[a as usize] && self.measure(d, x) {
                    g.measure += 1;
                }
                v.total[a as usize] += 1;
                cur = self.arena.parent(a);
            }
        }
        let record = mode != Mode::Maximal || self.en.is_a_true();
        if record {
            for a in 0..nn {
                if !deciding[a] || v.total[a] == 0 {
                    continue;
                }
                let labels = v.agg[a].len();
                let st = stats_slot(&mut self.stats, a, labels);
                for (code, g) in v.agg[a].iter().enumerate() {
                    st.rho[code].record(g.measure as u64, self.stage);
                }
            }
        }
        for a in 1..nn {
            let id = a as NodeId;
            let p = self.arena.parent(id).expect("non-root");
            let d = self.arena.depth(id);
            v.chain[a] = if has_stream(mode, d) {
                let o = self.arena.last_outcome(id).expect("non-root");
                v.chain[p as usize].min(self.raw_of(p, &o))
            } else {
                v.chain[p as usize]
            };
        }
        for a in 0..nn {
            if !deciding[a] || v.total[a] == 0 {
                continue;
            }
            let id = a as NodeId;
            let outs = self.outcomes_at(self.arena.depth(id));
            let mut list = Vec::with_capacity(outs.len());
            let mut pm = Vec::with_capacity(outs.len() + 1);
            pm.push(0);
            for o in outs.iter() {
                let c = self.make_cand(&v, id, *o);
                pm.push(pm[pm.len() - 1].max(c.ell));
                list.push(c);
            }
            v.cands[a] = Some(list);
            v.prefix_max[a] = pm;
        }
        for a in 0..nn {
            if let Role::ParentSplit(e) = role_at(mode, self.arena.depth(a as NodeId)) {
                v.split[a] = vec![(0, None); 1 << e];
            }
        }
        for (&(a, code), t) in &self.intervals {
            let mut m = 0;
            while t.waiting_at(m) {
                m += 1;
            }
            v.split[a as usize][code as usize] = (m, Some(t.clone()));
        }
        v
    }

    /// Pull check for one decision or tree candidate.
    fn cand_pulls(&self, v: &View, x: u64, alpha: NodeId, rho: Label, c: &Cand) -> bool {
        let mode = self.cfg.mode;
        let len_a = self.arena.depth(alpha);
        let agg = c.node.map(|b| v.agg[b as usize][rho.code() as usize]).unwrap_or_default();
        match (mode, role_at(mode, len_a)) {
            (Mode::Maximal, _) => maximal::pullable(x, len_a + 1, agg.count as usize, c.ell, c.o.is_inf(), self.w(len_a, x)),
            (_, Role::Decision(e)) => {
                let in_d = (c.set >> rho.code()) & 1 == 1;
                hhs::decision_pullable(x, len_a + 1, agg.y(), c.ell, in_d, in_d && self.w(e, x))
            }
            (_, Role::Tree(_)) => balg::tree_pullable((c.set >> rho.code()) & 1 == 1, agg.y(), c.ell, x),
            _ => false,
        }
    }

    fn tree_parent_ell(&self, v: &View, alpha: NodeId) -> u64 {
        let c = v.chain[alpha as usize];
        if c == u64::MAX {
            0
        } else {
            c
        }
    }

    fn cand_eliminates(&self, v: &View, x: u64, alpha: NodeId, rho: Label, c: &Cand, min: Option<u64>) -> bool {
        let mode = self.cfg.mode;
        let len_a = self.arena.depth(alpha);
        match (mode, role_at(mode, len_a)) {
            (Mode::Maximal, _) => {
                if self.cfg.flags.alt_eliminable {
                    maximal::eliminable_alt(x, min, c.ell, c.o.is_inf(), self.w(len_a, x))
                } else {
                    maximal::eliminable(x, min, c.ell)
                }
            }
            (_, Role::Decision(_)) => hhs::decision_eliminable(x, min, c.ell),
            (_, Role::Tree(_)) => {
                let bound = match self.cfg.flags.tree_ell {
                    TreeEllReading::Child => c.ell,
                    TreeEllReading::Parent => self.tree_parent_ell(v, alpha),
                };
                balg::tree_eliminable((c.set >> rho.code()) & 1 == 1, x, min, bound)
            }
            _ => false,
        }
    }

    fn split_index(o: &Outcome) -> u32 {
        match o {
            Outcome::SplitChildIndex(m) => *m,
            _ => u32::MAX,
        }
    }

    /// The strongest pull available to ball `x`, scanning ancestors from the root.
    fn find_pull(&self, v: &View, x: u64, node: NodeId, lam: Label) -> Option<PullTarget> {
        let mode = self.cfg.mode;
        let path = &self.paths[node as usize];
        for (i, &alpha) in path.iter().enumerate() {
            let len_a = self.arena.depth(alpha);
            if len_a >= self.max_len {
                continue;
            }
            let c_out = path.get(i + 1).and_then(|c| self.arena.last_outcome(*c));
            let rho = lam.prefix(label_len_at(mode, len_a));
            match role_at(mode, len_a) {
                Role::Decision(_) | Role::Tree(_) => {
                    let cands = v.cands[alpha as usize].as_ref().expect("candidates for occupied node");
                    let limit = path.get(i + 1).map_or(cands.len(), |c| (self.rank[*c as usize] as usize).min(cands.len()));
                    for c in &cands[..limit] {
                        if self.cand_pulls(v, x, alpha, rho, c) {
                            return Some(PullTarget { parent: alpha, o: c.o, label: rho });
                        }
                    }
                }
                Role::ParentSplit(_) => {
                    let limit = c_out.map_or(self.cfg.split_width, |o| Engine::split_index(&o));
                    let (m0, table) = &v.split[alpha as usize][rho.code() as usize];
                    let m0 = *m0;
                    let mk = table.as_ref().and_then(|t| t.interval_of(x).map(|k| t.entries[k - 1].beta));
                    let best = [Some(m0), mk].into_iter().flatten().filter(|m| *m < limit && *m < self.cfg.split_width).min();
                    if let Some(m) = best {
                        return Some(PullTarget { parent: alpha, o: Outcome::SplitChildIndex(m), label: rho });
                    }
                }
                Role::SplitChild(_) => {
                    if c_out.is_some() {
                        continue;
                    }
                    let parent = self.arena.parent(alpha).expect("split child has parent");
                    let m = Engine::split_index(&self.arena.last_outcome(alpha).expect("non-root"));
                    if hhs::grandchild_pullable(v.split[parent as usize][lam.code() as usize].1.as_ref(), m, x) {
                        return Some(PullTarget { parent: alpha, o: Outcome::ChildLink, label: lam.push(0) });
                    }
                }
            }
        }
        None
    }

    /// The strongest node eliminating `x`, as `(parent, outcome)`.
    fn find_elimination(&self, v: &View, x: u64, node: NodeId, lam: Label) -> Option<(NodeId, Outcome)> {
        let mode = self.cfg.mode;
        let path = &self.paths[node as usize];
        for (i, &alpha) in path.iter().enumerate() {
            let len_a = self.arena.depth(alpha);
            if len_a >= self.max_len || !matches!(role_at(mode, len_a), Role::Decision(_) | Role::Tree(_)) {
                continue;
            }
            let rho = lam.prefix(label_len_at(mode, len_a));
            let min = v.agg[alpha as usize][rho.code() as usize].min();
            if min == Some(x) {
                continue;
            }
            let parent_reading =
                matches!(role_at(mode, len_a), Role::Tree(_)) && self.cfg.flags.tree_ell == TreeEllReading::Parent;
            let cands = v.cands[alpha as usize].as_ref().expect("candidates for occupied node");
            let limit = path.get(i + 1).map_or(cands.len(), |c| (self.rank[*c as usize] as usize).min(cands.len()));
            if !parent_reading && x >= v.prefix_max[alpha as usize][limit] {
                continue;
            }
            for c in &cands[..limit] {
                if self.cand_eliminates(v, x, alpha, rho, c, min) {
                    return Some((alpha, c.o));
                }
            }
        }
        None
    }

    fn sorted_keys(&self) -> Vec<IntervalKey> {
        let mut keys: Vec<IntervalKey> = self.intervals.keys().copied().collect();
        keys.sort_by(|a, b| addr_cmp(self.arena.addr(a.0), self.arena.addr(b.0), self.cfg.dn_order).then(a.1.cmp(&b.1)));
        keys
    }

    fn nodes_of_kind(&self, kind: NodeKind) -> Vec<NodeId> {
        let mut ids: Vec<NodeId> = (0..self.arena.len() as NodeId)
            .filter(|&id| kind_at(self.cfg.mode, self.arena.depth(id)) == kind)
            .collect();
        ids.sort_by(|a, b| addr_cmp(self.arena.addr(*a), self.arena.addr(*b), self.cfg.dn_order));
        ids
    }

    fn phi(&self, k: u64) -> u64 {
        self.or.dominator.phi(self.stage, k)
    }

    /// Labels quantified over by certification at a split child.
    fn certification_labels(&self, beta: NodeId) -> Vec<u64> {
        let e = label_len_at(self.cfg.mode, self.arena.depth(beta));
        match self.cfg.mode {
            Mode::Balg => balg::e_of(self.arena.addr(beta)).iter().map(|l| l.code()).collect(),
            _ => (0..(1u64 << e)).collect(),
        }
    }

    fn emit(&mut self, ev: TraceEvent) {
        self.events.push(ev);
    }

    /// Balls residing at or below `addr` whose label extends `rho` (`None` for all labels).
    pub fn residents(&self, addr: &TreeAddress, rho: Option<Label>) -> Vec<u64> {
        let Some(id) = self.arena.find(addr) else { return Vec::new() };
        self.balls
            .iter()
            .enumerate()
            .filter(|(_, b)| b.node().is_some_and(|n| self.arena.is_ancestor(id, n)))
            .filter(|(_, b)| rho.is_none_or(|r| b.label.extends(&r)))
            .map(|(x, _)| x as u64)
            .collect()
    }

    /// Balls residing exactly at `addr` with label `rho`.
    pub fn s_view(&self, addr: &TreeAddress, rho: Label) -> Vec<u64> {
        let Some(id) = self.arena.find(addr) else { return Vec::new() };
        self.balls
            .iter()
            .enumerate()
            .filter(|(_, b)| b.node() == Some(id) && b.label == rho)
            .map(|(x, _)| x as u64)
            .collect()
    }

    /// Balls residing at nodes left of `addr`.
    pub fn residents_left_of(&self, addr: &TreeAddress) -> Vec<u64> {
        self.balls
            .iter()
            .enumerate()
            .filter(|(_, b)| {
                b.node().is_some_and(|n| crate::addr::left_of_with(self.arena.addr(n), addr, self.cfg.dn_order))
            })
            .map(|(x, _)| x as u64)
            .collect()
    }

    fn probe(&self) -> (Engine, View) {
        let mut e = self.clone();
        let v = e.prepare();
        (e, v)
    }

    fn check_addr(&self, beta: &TreeAddress) -> Result<(), StructuralError> {
        beta.validate(self.cfg.mode)?;
        if beta.is_root() {
            return Err(StructuralError::RootHasNoParent);
        }
        Ok(())
    }

    /// `x ∈ Y(β⁻) ∖ Y(≤β)` together with the ball's label, `None` if the location clause fails.
    fn located(&self, x: u64, beta: &TreeAddress) -> Option<(NodeId, NodeId, Label)> {
        let (addr, lam) = self.ball_at(x)?;
        let alpha = self.arena.find(&beta.parent()?)?;
        let node = self.balls[x as usize].node()?;
        if !self.arena.is_ancestor(alpha, node) || beta.is_prefix_of(addr) {
            return None;
        }
        if crate::addr::left_of_with(addr, beta, self.cfg.dn_order) {
            return None;
        }
        Some((alpha, node, lam))
    }

    /// ℓ(β,s) at the current stage.
    pub fn ell(&self, beta: &TreeAddress) -> Result<u64, StructuralError> {
        self.check_addr(beta)?;
        if !has_stream(self.cfg.mode, beta.len()) {
            return Err(StructuralError::NoStream(beta.render()));
        }
        let (e, _) = self.probe();
        let mut best = u64::MAX;
        for i in 1..=beta.len() {
            if !has_stream(e.cfg.mode, i) {
                continue;
            }
            let p = beta.prefix(i - 1);
            let o = beta.outcomes()[i - 1];
            let raw = match e.arena.find(&p) {
                Some(pid) => e.raw_of(pid, &o),
                None => {
                    let mut tmp = e.clone();
                    let pid = tmp.arena.ensure(&p);
                    tmp.raw_of(pid, &o)
                }
            };
            best = best.min(raw);
        }
        Ok(best)
    }

    /// Whether `x` is pullable by `β` at the current stage.
    pub fn pullable_by(&self, x: u64, beta: &TreeAddress) -> Result<bool, StructuralError> {
        self.check_addr(beta)?;
        let Some((alpha, node, lam)) = self.located(x, beta) else { return Ok(false) };
        let mode = self.cfg.mode;
        let o = *beta.last().expect("non-root");
        let len_a = beta.len() - 1;
        if len_a >= self.max_len {
            return Ok(false);
        }
        let rho = lam.prefix(label_len_at(mode, len_a));
        Ok(match role_at(mode, len_a) {
            Role::Decision(_) | Role::Tree(_) => {
                let (e, v) = self.probe();
                let c = e.make_cand(&v, alpha, o);
                e.cand_pulls(&v, x, alpha, rho, &c)
            }
            Role::ParentSplit(_) => {
                let m = Engine::split_index(&o);
                m < self.cfg.split_width && hhs::splitchild_pullable(self.intervals.get(&(alpha, rho.code())), m, x)
            }
            Role::SplitChild(_) => {
                node == alpha && {
                    let parent = self.arena.parent(alpha).expect("split child has parent");
                    let m = Engine::split_index(&self.arena.last_outcome(alpha).expect("non-root"));
                    hhs::grandchild_pullable(self.intervals.get(&(parent, lam.code())), m, x)
                }
            }
        })
    }

    /// Whether `x` is eliminable by `β` at the current stage.
    pub fn eliminable_by(&self, x: u64, beta: &TreeAddress) -> Result<bool, StructuralError> {
        self.check_addr(beta)?;
        let Some((alpha, _, lam)) = self.located(x, beta) else { return Ok(false) };
        let mode = self.cfg.mode;
        let len_a = beta.len() - 1;
        if len_a >= self.max_len || !matches!(role_at(mode, len_a), Role::Decision(_) | Role::Tree(_)) {
            return Ok(false);
        }
        let rho = lam.prefix(label_len_at(mode, len_a));
        let (e, v) = self.probe();
        let c = e.make_cand(&v, alpha, *beta.last().expect("non-root"));
        let min = v.agg[alpha as usize][rho.code() as usize].min();
        Ok(e.cand_eliminates(&v, x, alpha, rho, &c, min))
    }

    /// The strongest node by which `x` is pullable.
    pub fn strongest_puller(&self, x: u64) -> Option<TreeAddress> {
        let b = self.balls.get(x as usize)?;
        let node = b.node()?;
        let (e, v) = self.probe();
        e.find_pull(&v, x, node, b.label).map(|t| e.arena.addr(t.parent).child(t.o))
    }

    /// The strongest node by which `x` is eliminable.
    pub fn strongest_eliminator(&self, x: u64) -> Option<TreeAddress> {
        let b = self.balls.get(x as usize)?;
        let node = b.node()?;
        let (e, v) = self.probe();
        e.find_elimination(&v, x, node, b.label).map(|(p, o)| e.arena.addr(p).child(o))
    }

    /// Certification of split child `β` at the current stage.
    pub fn is_certified(&self, beta: &TreeAddress) -> bool {
        let Some(id) = self.arena.find(beta) else { return false };
        if kind_at(self.cfg.mode, beta.len()) != NodeKind::SplitChild {
            return false;
        }
        let alpha = self.arena.parent(id).expect("split child has parent");
        let m = Engine::split_index(&self.arena.last_outcome(id).expect("non-root"));
        let labels = self.certification_labels(id);
        hhs::is_certified(labels.iter().map(|r| self.intervals.get(&(alpha, *r))), m, |k| self.phi(k))
    }

    /// ℓ of every candidate child of every materialized deciding node.
    pub fn child_ells(&self) -> HashMap<TreeAddress, u64> {
        let (mut e, v) = self.probe();
        let mut out = HashMap::new();
        for id in 0..e.arena.len() as NodeId {
            let len = e.arena.depth(id);
            if !e.is_deciding(len) {
                continue;
            }
            let outs = e.outcomes_at(len);
            for o in outs.iter() {
                let c = e.make_cand(&v, id, *o);
                out.insert(e.arena.addr(id).child(*o), c.ell);
            }
        }
        out
    }

    fn make_cand(&self, v: &View, alpha: NodeId, o: Outcome) -> Cand {
        let ell = self.raw_of(alpha, &o).min(v.chain[alpha as usize]);
        Cand { o, ell, node: self.arena.child(alpha, &o), set: o.guess_set().map_or(0, |d| d.index()) }
    }

    /// Runs one stage; returns the case taken, or `None` once the budget is spent.
    pub fn step(&mut self) -> Option<Case> {
        if self.is_done() {
            return None;
        }
        let hash = self.state_hash();
        let v = self.prepare();
        let case = self.act(&v, hash);
        self.cases.push(case);
        self.last_case = Some(case);
        self.stage += 1;
        Some(case)
    }

    pub fn run(&mut self) {
        while self.step().is_some() {}
    }

    /// Residents grouped by node and label, each group ascending by value.
    fn groups(v: &View) -> Vec<(NodeId, Label, Vec<u64>)> {
        let mut out = Vec::new();
        for (node, res) in v.residents.iter().enumerate() {
            if res.is_empty() {
                continue;
            }
            let mut by: BTreeMap<Label, Vec<u64>> = BTreeMap::new();
            for &(x, l) in res {
                by.entry(l).or_default().push(x);
            }
            out.extend(by.into_iter().map(|(l, xs)| (node as NodeId, l, xs)));
        }
        out
    }

    /// Conservative: false only if no ball of the group can be pulled.
    fn group_may_pull(&self, v: &View, node: NodeId, lam: Label, min_x: u64, max_x: u64) -> bool {
        let mode = self.cfg.mode;
        let path = &self.paths[node as usize];
        for (i, &alpha) in path.iter().enumerate() {
            let len_a = self.arena.depth(alpha);
            if len_a >= self.max_len {
                continue;
            }
            let code = lam.prefix(label_len_at(mode, len_a)).code() as usize;
            match role_at(mode, len_a) {
                Role::Decision(_) | Role::Tree(_) => {
                    let cands = v.cands[alpha as usize].as_ref().expect("candidates for occupied node");
                    let limit = path.get(i + 1).map_or(cands.len(), |c| (self.rank[*c as usize] as usize).min(cands.len()));
                    for c in &cands[..limit] {
                        let y = c.node.map(|b| v.agg[b as usize][code]).unwrap_or_default();
                        if (y.count as u64) < c.ell || (y.count > 0 && min_x < y.max) {
                            let sized = matches!(role_at(mode, len_a), Role::Tree(_)) || max_x > len_a as u64 + 1;
                            if sized {
                                return true;
                            }
                        }
                    }
                }
                Role::ParentSplit(_) => {
                    let limit = path
                        .get(i + 1)
                        .and_then(|c| self.arena.last_outcome(*c))
                        .map_or(self.cfg.split_width, |o| Engine::split_index(&o));
                    let (m0, table) = &v.split[alpha as usize][code];
                    if *m0 < limit.min(self.cfg.split_width) {
                        return true;
                    }
                    if table.as_ref().is_some_and(|t| t.entries.iter().any(|e| e.beta < limit)) {
                        return true;
                    }
                }
                Role::SplitChild(_) => {
                    if i + 1 == path.len() {
                        let parent = self.arena.parent(alpha).expect("split child has parent");
                        let m = Engine::split_index(&self.arena.last_outcome(alpha).expect("non-root"));
                        if let Some(t) = v.split[parent as usize][lam.code() as usize].1.as_ref() {
                            if t.entries.iter().any(|e| e.beta == m && e.status == IntervalStatus::Released) {
                                return true;
                            }
                        }
                    }
                }
            }
        }
        false
    }

    /// Conservative: false only if no ball of the group can be eliminated.
    fn group_may_eliminate(&self, v: &View, node: NodeId, min_x: u64) -> bool {
        let mode = self.cfg.mode;
        let path = &self.paths[node as usize];
        for (i, &alpha) in path.iter().enumerate() {
            let len_a = self.arena.depth(alpha);
            if len_a >= self.max_len {
                continue;
            }
            match role_at(mode, len_a) {
                Role::Tree(_) if self.cfg.flags.tree_ell == TreeEllReading::Parent => return true,
                Role::Decision(_) | Role::Tree(_) => {
                    let pm = &v.prefix_max[alpha as usize];
                    let limit = path.get(i + 1).map_or(pm.len() - 1, |c| (self.rank[*c as usize] as usize).min(pm.len() - 1));
                    if min_x < pm[limit] {
                        return true;
                    }
                }
                _ => {}
            }
        }
        false
    }

    fn collect_pulls(&self, v: &View, groups: &[(NodeId, Label, Vec<u64>)]) -> Vec<(u64, NodeId, PullTarget)> {
        let mut pulls = Vec::new();
        for (node, lam, xs) in groups {
            let (lo, hi) = (xs[0], xs[xs.len() - 1]);
            if !self.group_may_pull(v, *node, *lam, lo, hi) {
                continue;
            }
            for &x in xs {
                if let Some(t) = self.find_pull(v, x, *node, *lam) {
                    pulls.push((x, *node, t));
                }
            }
        }
        pulls.sort_by_key(|p| p.0);
        pulls
    }

    fn collect_eliminations(
        &self,
        v: &View,
        groups: &[(NodeId, Label, Vec<u64>)],
        skip: &[bool],
    ) -> Vec<(u64, NodeId, (NodeId, Outcome))> {
        let mut elims = Vec::new();
        for (node, lam, xs) in groups {
            if !self.group_may_eliminate(v, *node, xs[0]) {
                continue;
            }
            for &x in xs {
                if skip.get(x as usize).copied().unwrap_or(false) {
                    continue;
                }
                if let Some(by) = self.find_elimination(v, x, *node, *lam) {
                    elims.push((x, *node, by));
                }
            }
        }
        elims.sort_by_key(|e| e.0);
        elims
    }

    fn act(&mut self, v: &View, hash: u64) -> Case {
        let groups = Engine::groups(v);
        let pulls = self.collect_pulls(v, &groups);
        let simultaneous = self.cfg.mode == Mode::Maximal && self.cfg.flags.simultaneous;
        if !pulls.is_empty() {
            let mut elims = Vec::new();
            if simultaneous {
                let mut pulled = vec![false; self.balls.len()];
                for p in &pulls {
                    pulled[p.0 as usize] = true;
                }
                elims = self.collect_eliminations(v, &groups, &pulled);
            }
            self.apply_pulls(v, &pulls, hash);
            self.apply_eliminations(&elims, hash);
            return Case::Pull;
        }
        let elims = self.collect_eliminations(v, &groups, &[]);
        if !elims.is_empty() {
            self.apply_eliminations(&elims, hash);
            return Case::Eliminate;
        }
        if self.cfg.mode != Mode::Maximal {
            if self.try_release(v, hash) {
                return Case::Release;
            }
            if self.try_establish(v, hash) {
                return Case::Establish;
            }
        }
        self.new_balls(v, hash);
        Case::NewBalls
    }

    fn apply_pulls(&mut self, _v: &View, pulls: &[(u64, NodeId, PullTarget)], hash: u64) {
        let s = self.stage;
        let mode = self.cfg.mode;
        // Rider candidates: split-child pullers with nothing waiting for their label.
        let mut rider: BTreeMap<IntervalKey, u32> = BTreeMap::new();
        for (_, _, t) in pulls {
            if let Outcome::SplitChildIndex(m) = t.o {
                let key = (t.parent, t.label.code());
                let waiting = self.intervals.get(&key).is_some_and(|tb| tb.waiting_at(m));
                if !waiting {
                    let e = rider.entry(key).or_insert(m);
                    *e = (*e).min(m);
                }
            }
        }
        for &(x, from, t) in pulls {
            let to = self.arena.get_or_create(t.parent, t.o);
            debug_assert_eq!(label_len_at(mode, self.arena.depth(to)), t.label.len());
            self.balls[x as usize] = Ball { loc: Loc::At(to), label: t.label };
            let ev = TraceEvent::Pull {
                stage: s,
                hash,
                x,
                from: self.arena.addr(from).clone(),
                to: self.arena.addr(to).clone(),
                label: t.label,
            };
            self.emit(ev);
        }
        let mut keys: Vec<(IntervalKey, u32)> = rider.into_iter().collect();
        keys.sort_by(|a, b| addr_cmp(self.arena.addr(a.0 .0), self.arena.addr(b.0 .0), self.cfg.dn_order).then(a.0 .1.cmp(&b.0 .1)));
        for (key, m) in keys {
            let Some(tb) = self.intervals.get_mut(&key) else { continue };
            let mut moved = Vec::new();
            for (i, e) in tb.entries.iter_mut().enumerate() {
                if e.beta > m {
                    e.beta = m;
                    e.status = IntervalStatus::Waiting;
                    moved.push(i as u64 + 1);
                }
            }
            let alpha = self.arena.addr(key.0).clone();
            let e = label_len_at(mode, alpha.len());
            let to = alpha.child(Outcome::SplitChildIndex(m));
            for k in moved {
                self.emit(TraceEvent::Reassign {
                    stage: s,
                    hash,
                    alpha: alpha.clone(),
                    rho: Label::new(e as u8, key.1),
                    k,
                    to: to.clone(),
                });
            }
        }
    }

    fn apply_eliminations(&mut self, elims: &[(u64, NodeId, (NodeId, Outcome))], hash: u64) {
        let s = self.stage;
        for &(x, at, (parent, o)) in elims {
            let label = self.balls[x as usize].label;
            self.balls[x as usize] = Ball { loc: Loc::Off(OffReason::Eliminated), label };
            self.h[x as usize] = true;
            let ev = TraceEvent::Eliminate {
                stage: s,
                hash,
                x,
                at: self.arena.addr(at).clone(),
                by: self.arena.addr(parent).child(o),
                label,
            };
            self.emit(ev);
        }
    }

    fn try_release(&mut self, v: &View, hash: u64) -> bool {
        let s = self.stage;
        let mode = self.cfg.mode;
        let mut certified = Vec::new();
        for beta in self.nodes_of_kind(NodeKind::SplitChild) {
            if self.arena.depth(beta) >= self.max_len {
                continue;
            }
            let alpha = self.arena.parent(beta).expect("split child has parent");
            let m = Engine::split_index(&self.arena.last_outcome(beta).expect("non-root"));
            let labels = self.certification_labels(beta);
            let ok = hhs::is_certified(labels.iter().map(|r| self.intervals.get(&(alpha, *r))), m, |k| self.phi(k));
            if ok {
                certified.push((beta, alpha, m));
            }
        }
        if certified.is_empty() {
            return false;
        }
        for (beta, alpha, m) in certified {
            let e = label_len_at(mode, self.arena.depth(beta));
            let plus = self.arena.get_or_create(beta, Outcome::ChildLink);
            for code in 0..(1u64 << e) {
                let key = (alpha, code);
                let Some(tb) = self.intervals.get(&key) else { continue };
                let waiting: Vec<usize> = tb
                    .entries
                    .iter()
                    .enumerate()
                    .filter(|(_, en)| en.status == IntervalStatus::Waiting && en.beta == m)
                    .map(|(i, _)| i + 1)
                    .collect();
                let rho = Label::new(e as u8, code);
                for k in waiting {
                    let tb = &self.intervals[&key];
                    let lo = tb.f(k - 1).expect("defined");
                    let hi = tb.f(k).expect("defined");
                    let block: Vec<u64> = v.residents[beta as usize]
                        .iter()
                        .filter(|(x, l)| *l == rho && *x >= lo && *x < hi)
                        .map(|(x, _)| *x)
                        .collect();
                    let (zero, one) = hhs::release_split(&block, k);
                    for &x in &zero {
                        self.balls[x as usize] = Ball { loc: Loc::At(plus), label: rho.push(0) };
                    }
                    for &x in &one {
                        self.balls[x as usize] = Ball { loc: Loc::At(plus), label: rho.push(1) };
                    }
                    self.intervals.get_mut(&key).expect("table").entries[k - 1].status = IntervalStatus::Released;
                    let ev = TraceEvent::Release {
                        stage: s,
                        hash,
                        alpha: self.arena.addr(alpha).clone(),
                        rho,
                        k: k as u64,
                        from: self.arena.addr(beta).clone(),
                        zero,
                        one,
                    };
                    self.emit(ev);
                }
            }
        }
        true
    }

    fn try_establish(&mut self, v: &View, hash: u64) -> bool {
        let s = self.stage;
        let mode = self.cfg.mode;
        let mut done = false;
        for alpha in self.nodes_of_kind(NodeKind::DecisionChild) {
            let len_a = self.arena.depth(alpha);
            if !matches!(role_at(mode, len_a), Role::ParentSplit(_)) || len_a >= self.max_len {
                continue;
            }
            let e = label_len_at(mode, len_a);
            let kids: Vec<(u32, NodeId)> = self
                .arena
                .children(alpha)
                .iter()
                .map(|(o, id)| (Engine::split_index(o), *id))
                .collect();
            for code in 0..(1u64 << e) {
                let key = (alpha, code);
                let rho = Label::new(e as u8, code);
                let table = self.intervals.get(&key);
                let mut chosen = None;
                for &(m, beta) in &kids {
                    let members: Vec<u64> =
                        v.residents[beta as usize].iter().filter(|(_, l)| *l == rho).map(|(x, _)| *x).collect();
                    if let Some(k) = hhs::ready_for_definition(table, m, members.len()) {
                        chosen = Some((m, beta, k, members));
                        break;
                    }
                }
                let Some((m, beta, k, members)) = chosen else { continue };
                let (f, u) = hhs::establish_values(s, &members, k);
                self.intervals
                    .entry(key)
                    .or_default()
                    .entries
                    .push(IntervalEntry { f, u, beta: m, status: IntervalStatus::Waiting, defined_at: s });
                let ev = TraceEvent::Establish {
                    stage: s,
                    hash,
                    alpha: self.arena.addr(alpha).clone(),
                    rho,
                    k: k as u64,
                    f,
                    u,
                    at: self.arena.addr(beta).clone(),
                };
                self.emit(ev);
                done = true;
            }
        }
        done
    }

    fn new_balls(&mut self, v: &View, hash: u64) {
        let s = self.stage;
        let mode = self.cfg.mode;
        let n = self.en.n();
        let q_before = self.en.q_size();
        let a_true = mode != Mode::Maximal || self.en.is_a_true();
        let u = self.or.universe;
        let changed: Vec<u64> = (0..u).filter(|&y| self.or.a.in_stage(y, n + 1) && !self.en.in_a(y)).collect();
        let mut undef = Vec::new();
        if !changed.is_empty() {
            let least = changed[0];
            for key in self.sorted_keys() {
                let tb = self.intervals.get_mut(&key).expect("key");
                if let Some(i) = tb.entries.iter().position(|e| least < e.u) {
                    let removed = tb.entries.len() - i;
                    tb.entries.truncate(i);
                    for j in 0..removed {
                        undef.push((key, (i + j + 1) as u64));
                    }
                }
            }
        }
        for (key, k) in undef {
            let alpha = self.arena.addr(key.0).clone();
            let e = label_len_at(mode, alpha.len());
            self.emit(TraceEvent::Undefine { stage: s, hash, alpha, rho: Label::new(e as u8, key.1), k, cause: s });
        }
        self.en.advance(&self.or.a, true);
        let mut entered = Vec::new();
        for y in 0..u {
            if self.en.in_a(y) && !self.h[y as usize] {
                self.h[y as usize] = true;
                let label = self.balls[y as usize].label;
                self.balls[y as usize] = Ball { loc: Loc::Off(OffReason::EnteredA), label };
                entered.push(y);
            }
        }
        let mut placed = Vec::new();
        for x in 0..self.en.q_end() {
            if self.en.in_q(x) && !self.h[x as usize] && self.balls[x as usize].loc == Loc::Off(OffReason::NeverPlaced) {
                self.balls[x as usize] = Ball { loc: Loc::At(ROOT), label: Label::EMPTY };
                placed.push(x);
            }
        }
        if a_true {
            for a in 0..v.total.len() {
                if v.total[a] > 0 && self.is_deciding(self.arena.depth(a as NodeId)) {
                    let labels = v.agg[a].len();
                    stats_slot(&mut self.stats, a, labels).add_checkpoint(s);
                }
            }
        }
        let q_after = self.en.q_size();
        self.emit(TraceEvent::NewBalls { stage: s, hash, n, q_before, q_after, entered_a: entered, placed });
    }
}
