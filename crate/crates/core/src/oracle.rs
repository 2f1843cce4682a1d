//! Edge oracle over a fixed regular digraph.
//!
//! The oracle maintains an active edge set `H` and hands out, on request, an
//! out-edge of a given vertex whose head has small in-degree in `H`. To keep
//! that possible under adversarial removals it also keeps
//!
//! * a buffer `B` of edges reserved for `Low` vertices (disjoint from `H`),
//! * `Sat`: vertices with at least `sat_threshold` in-edges in `F = H ∪ B`,
//! * `Low`: vertices with at least `low_threshold` host out-edges into `Sat`.
//!
//! Whenever a vertex enters `Low` its out-degree in `F` is topped up to
//! `out_cap` by toggling buffer membership along `(D \ F, B)`-alternating
//! walks. Between requests the state satisfies
//!
//! * `Sat = { v : in_F(v) ≥ sat_threshold }`,
//! * `Low = { v : out_D(v, Sat) ≥ low_threshold }`,
//! * `v ∈ Low ⇒ out_F(v) = out_cap`,
//!
//! and at all times `out_B(v) = 0` outside `Low`, `out_F ≤ out_cap`,
//! `in_F ≤ in_cap`. [`EdgeOracle::audit`] recomputes all of it from scratch.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::graph::{CounterMismatch, Digraph, EdgeId, EdgeSubset, VertexId};

/// Exact rational threshold `num/den`, compared by cross-multiplication.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Threshold {
    pub num: u64,
    pub den: u64,
}

impl Threshold {
    pub const fn new(num: u64, den: u64) -> Self {
        Threshold { num, den }
    }

    /// `count ≥ num/den`.
    #[inline]
    pub fn reached_by(self, count: usize) -> bool {
        count as u64 * self.den >= self.num
    }

    /// Smallest integer that reaches the threshold.
    pub fn ceil(self) -> u64 {
        self.num.div_ceil(self.den)
    }
}

impl fmt::Display for Threshold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

/// Thresholds of one oracle instance.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ConstantsProfile {
    pub beta: f64,
    pub gamma: f64,
    /// Regularity of the host digraph.
    pub d: usize,
    /// Requests need `out_H(v) < out_cap`.
    pub out_cap: usize,
    /// Returned heads have `in_H < in_cap` before insertion.
    pub in_cap: usize,
    pub sat_threshold: Threshold,
    pub low_threshold: Threshold,
    /// Requests need `|H| < capacity`.
    pub capacity: usize,
    /// Set when any hypothesis of the guarantees is knowingly violated.
    pub relaxed: bool,
}

impl ConstantsProfile {
    /// Default thresholds for a `d`-regular host on `n` vertices.
    pub fn for_host(n: usize, d: usize, beta: f64, gamma: f64) -> Self {
        ConstantsProfile {
            beta,
            gamma,
            d,
            out_cap: d / 2,
            in_cap: d / 5,
            sat_threshold: Threshold::new(d as u64, 10),
            low_threshold: Threshold::new(d as u64, 4),
            capacity: libm::floor(beta * d as f64 * n as f64 / 120.0) as usize,
            relaxed: gamma > 1.0 / 50.0,
        }
    }

    pub fn validate(&self) -> Result<(), OracleError> {
        if !self.relaxed && self.d < 10 {
            return Err(OracleError::DegreeTooSmall(self.d));
        }
        if !self.relaxed && self.gamma > 1.0 / 50.0 {
            return Err(OracleError::InvalidProfile("gamma above 1/50 on a strict profile"));
        }
        if self.sat_threshold.den == 0 || self.low_threshold.den == 0 {
            return Err(OracleError::InvalidProfile("zero threshold denominator"));
        }
        if self.sat_threshold.num == 0 || self.low_threshold.num == 0 {
            return Err(OracleError::InvalidProfile("thresholds must be positive"));
        }
        if self.sat_threshold.ceil() > self.in_cap as u64 {
            return Err(OracleError::InvalidProfile("saturation threshold above in_cap"));
        }
        if self.out_cap == 0 || self.out_cap > self.d {
            return Err(OracleError::InvalidProfile("out_cap outside 1..=d"));
        }
        Ok(())
    }

    /// `|Low|` must stay strictly below `beta·n/12`.
    pub fn low_bound_holds(&self, n: usize, low: usize) -> bool {
        (low as f64) * 12.0 < self.beta * n as f64
    }
}

/// Which step found nothing to work with.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Violation {
    /// Low vertex without a buffered out-edge.
    NoBufferedEdge(VertexId),
    /// No free out-edge towards an unsaturated head.
    NoFreeEdge(VertexId),
    /// No alternating walk while topping up a Low vertex.
    NoAlternatingWalk(VertexId),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("host digraph is not {0}-regular")]
    NotRegular(usize),
    #[error("host degree {0} is below 10")]
    DegreeTooSmall(usize),
    #[error("invalid profile: {0}")]
    InvalidProfile(&'static str),
    #[error("vertex {0} out of range")]
    VertexOutOfRange(VertexId),
    #[error("vertex {vertex} already has {out} active out-edges (cap {cap})")]
    OutCapReached { vertex: VertexId, out: usize, cap: usize },
    #[error("active set holds {size} edges, capacity {cap}")]
    CapacityReached { size: usize, cap: usize },
    #[error("edge {0} is not active")]
    NotActive(EdgeId),
    #[error("expansion violation: {0:?}")]
    Expansion(Violation),
}

impl OracleError {
    pub fn is_expansion_violation(&self) -> bool {
        matches!(self, OracleError::Expansion(_))
    }
}

/// An alternating walk `x = v1, v2, …, vk = y`: `edges[2i]` is a forward
/// host edge outside `F`, `edges[2i+1]` a buffer edge walked head to tail.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Walk {
    pub vertices: Vec<VertexId>,
    pub edges: Vec<EdgeId>,
}

impl Walk {
    pub fn start(&self) -> VertexId {
        self.vertices[0]
    }

    pub fn end(&self) -> VertexId {
        *self.vertices.last().unwrap()
    }
}

/// Passed to walk observers, see [`EdgeOracle::add_edge_observed`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WalkStage {
    BeforeToggle,
    AfterToggle,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OracleStats {
    pub add_calls: u64,
    pub served_from_buffer: u64,
    pub remove_calls: u64,
    pub walks: u64,
    pub walk_edges: u64,
    pub rollbacks: u64,
}

#[derive(Clone, Copy, Debug)]
enum Undo {
    ActiveInsert(EdgeId),
    BufferInsert(EdgeId),
    BufferErase(EdgeId),
    Saturate(VertexId),
    MarkLow(VertexId),
}

/// Copy of the mutable oracle state, for whole-request rollback.
#[derive(Clone, Debug)]
pub struct OracleSnapshot {
    active: EdgeSubset,
    buffer: EdgeSubset,
    sat: Vec<bool>,
    low: Vec<bool>,
    sat_count: usize,
    low_count: usize,
    sat_out: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct EdgeOracle {
    host: Digraph,
    profile: ConstantsProfile,
    active: EdgeSubset,
    buffer: EdgeSubset,
    sat: Vec<bool>,
    low: Vec<bool>,
    sat_count: usize,
    low_count: usize,
    /// `out_D(v, Sat)`.
    sat_out: Vec<usize>,
    stats: OracleStats,
    journal: Vec<Undo>,
    head_mark: Vec<u32>,
    tail_mark: Vec<u32>,
    head_parent: Vec<EdgeId>,
    tail_parent: Vec<EdgeId>,
    epoch: u32,
}

impl EdgeOracle {
    pub fn new(host: Digraph, profile: ConstantsProfile) -> Result<Self, OracleError> {
        profile.validate()?;
        if host.regular_degree() != Some(profile.d) {
            return Err(OracleError::NotRegular(profile.d));
        }
        let n = host.vertex_count();
        Ok(EdgeOracle {
            active: EdgeSubset::new(&host),
            buffer: EdgeSubset::new(&host),
            sat: vec![false; n],
            low: vec![false; n],
            sat_count: 0,
            low_count: 0,
            sat_out: vec![0; n],
            stats: OracleStats::default(),
            journal: Vec::new(),
            head_mark: vec![0; n],
            tail_mark: vec![0; n],
            head_parent: vec![EdgeId(0); n],
            tail_parent: vec![EdgeId(0); n],
            epoch: 0,
            host,
            profile,
        })
    }

    pub fn host(&self) -> &Digraph {
        &self.host
    }

    pub fn snapshot(&self) -> OracleSnapshot {
        OracleSnapshot {
            active: self.active.clone(),
            buffer: self.buffer.clone(),
            sat: self.sat.clone(),
            low: self.low.clone(),
            sat_count: self.sat_count,
            low_count: self.low_count,
            sat_out: self.sat_out.clone(),
        }
    }

    /// Restores sets and counters; statistics keep counting, plus one rollback.
    pub fn restore(&mut self, snap: OracleSnapshot) {
        self.active = snap.active;
        self.buffer = snap.buffer;
        self.sat = snap.sat;
        self.low = snap.low;
        self.sat_count = snap.sat_count;
        self.low_count = snap.low_count;
        self.sat_out = snap.sat_out;
        self.stats.rollbacks += 1;
    }

    pub fn profile(&self) -> &ConstantsProfile {
        &self.profile
    }

    /// The active set `H`.
    pub fn active(&self) -> &EdgeSubset {
        &self.active
    }

    /// The buffer `B`.
    pub fn buffer(&self) -> &EdgeSubset {
        &self.buffer
    }

    pub fn stats(&self) -> &OracleStats {
        &self.stats
    }

    pub fn is_saturated(&self, v: VertexId) -> bool {
        self.sat[v.0]
    }

    pub fn is_low(&self, v: VertexId) -> bool {
        self.low[v.0]
    }

    pub fn saturated(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.sat.iter().enumerate().filter(|(_, &s)| s).map(|(i, _)| VertexId(i))
    }

    pub fn low_vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.low.iter().enumerate().filter(|(_, &l)| l).map(|(i, _)| VertexId(i))
    }

    pub fn low_count(&self) -> usize {
        self.low_count
    }

    #[inline]
    pub fn in_f(&self, v: VertexId) -> usize {
        self.active.in_degree(v) + self.buffer.in_degree(v)
    }

    #[inline]
    pub fn out_f(&self, v: VertexId) -> usize {
        self.active.out_degree(v) + self.buffer.out_degree(v)
    }

    #[inline]
    fn in_f_set(&self, e: EdgeId) -> bool {
        self.active.contains(e) || self.buffer.contains(e)
    }

    /// Serves one request: returns an out-edge `(v, w)` outside `H` with
    /// `in_H(w) < in_cap` and makes it active.
    pub fn add_edge(&mut self, v: VertexId) -> Result<EdgeId, OracleError> {
        self.add_edge_observed(v, &mut |_, _, _| {})
    }

    /// [`Self::add_edge`] that reports every rebalancing walk to `observer`
    /// right before and right after its buffer toggle.
    pub fn add_edge_observed(
        &mut self,
        v: VertexId,
        observer: &mut dyn FnMut(WalkStage, &EdgeOracle, &Walk),
    ) -> Result<EdgeId, OracleError> {
        if v.0 >= self.host.vertex_count() {
            return Err(OracleError::VertexOutOfRange(v));
        }
        let out = self.active.out_degree(v);
        if out >= self.profile.out_cap {
            return Err(OracleError::OutCapReached { vertex: v, out, cap: self.profile.out_cap });
        }
        if self.active.len() >= self.profile.capacity {
            return Err(OracleError::CapacityReached { size: self.active.len(), cap: self.profile.capacity });
        }
        self.stats.add_calls += 1;

        if self.low[v.0] {
            let e = self
                .host
                .out_edges(v)
                .iter()
                .copied()
                .find(|&e| self.buffer.contains(e))
                .ok_or(OracleError::Expansion(Violation::NoBufferedEdge(v)))?;
            self.buffer.erase(&self.host, e);
            self.active.insert(&self.host, e);
            self.stats.served_from_buffer += 1;
            return Ok(e);
        }

        let e = self
            .host
            .out_edges(v)
            .iter()
            .copied()
            .find(|&e| !self.in_f_set(e) && !self.sat[self.host.head(e).0])
            .ok_or(OracleError::Expansion(Violation::NoFreeEdge(v)))?;

        self.journal.clear();
        let mut pending = BTreeSet::new();
        self.active.insert(&self.host, e);
        self.journal.push(Undo::ActiveInsert(e));
        let w = self.host.head(e);
        if self.profile.sat_threshold.reached_by(self.in_f(w)) {
            self.saturate(w, &mut pending);
        }

        while let Some(x) = pending.pop_first() {
            let x = VertexId(x);
            if self.low[x.0] {
                continue;
            }
            self.low[x.0] = true;
            self.low_count += 1;
            self.journal.push(Undo::MarkLow(x));
            while self.out_f(x) < self.profile.out_cap {
                let Some(walk) = self.find_alternating_walk(x) else {
                    self.rollback();
                    return Err(OracleError::Expansion(Violation::NoAlternatingWalk(x)));
                };
                observer(WalkStage::BeforeToggle, self, &walk);
                self.toggle(&walk);
                observer(WalkStage::AfterToggle, self, &walk);
                let y = walk.end();
                if !self.sat[y.0] && self.profile.sat_threshold.reached_by(self.in_f(y)) {
                    self.saturate(y, &mut pending);
                }
            }
        }
        self.journal.clear();
        Ok(e)
    }

    fn saturate(&mut self, w: VertexId, pending: &mut BTreeSet<usize>) {
        self.sat[w.0] = true;
        self.sat_count += 1;
        self.journal.push(Undo::Saturate(w));
        for &e in self.host.in_edges(w) {
            let x = self.host.tail(e);
            self.sat_out[x.0] += 1;
            if !self.low[x.0] && self.profile.low_threshold.reached_by(self.sat_out[x.0]) {
                pending.insert(x.0);
            }
        }
    }

    fn toggle(&mut self, walk: &Walk) {
        for (i, &e) in walk.edges.iter().enumerate() {
            if i % 2 == 0 {
                self.buffer.insert(&self.host, e);
                self.journal.push(Undo::BufferInsert(e));
            } else {
                self.buffer.erase(&self.host, e);
                self.journal.push(Undo::BufferErase(e));
            }
        }
        self.stats.walks += 1;
        self.stats.walk_edges += walk.edges.len() as u64;
    }

    fn rollback(&mut self) {
        self.stats.rollbacks += 1;
        while let Some(step) = self.journal.pop() {
            match step {
                Undo::ActiveInsert(e) => {
                    self.active.erase(&self.host, e);
                }
                Undo::BufferInsert(e) => {
                    self.buffer.erase(&self.host, e);
                }
                Undo::BufferErase(e) => {
                    self.buffer.insert(&self.host, e);
                }
                Undo::Saturate(w) => {
                    self.sat[w.0] = false;
                    self.sat_count -= 1;
                    for &e in self.host.in_edges(w) {
                        self.sat_out[self.host.tail(e).0] -= 1;
                    }
                }
                Undo::MarkLow(x) => {
                    self.low[x.0] = false;
                    self.low_count -= 1;
                }
            }
        }
    }

    /// Layered search for a `(D \ F, B)`-alternating walk from `x` to a head
    /// `y` with `in_F(y) < in_cap`. Heads and tails are each discovered at
    /// most once, so the walk never repeats an edge.
    pub fn find_alternating_walk(&mut self, x: VertexId) -> Option<Walk> {
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.head_mark.iter_mut().for_each(|m| *m = 0);
            self.tail_mark.iter_mut().for_each(|m| *m = 0);
            self.epoch = 1;
        }
        let epoch = self.epoch;
        self.tail_mark[x.0] = epoch;
        let mut tails = vec![x];
        let mut heads = Vec::new();
        loop {
            heads.clear();
            for &t in &tails {
                for &e in self.host.out_edges(t) {
                    if self.in_f_set(e) {
                        continue;
                    }
                    let w = self.host.head(e);
                    if self.head_mark[w.0] == epoch {
                        continue;
                    }
                    self.head_mark[w.0] = epoch;
                    self.head_parent[w.0] = e;
                    if self.in_f(w) < self.profile.in_cap {
                        return Some(self.reconstruct(x, w));
                    }
                    heads.push(w);
                }
            }
            if heads.is_empty() {
                return None;
            }
            let mut next = Vec::new();
            for &w in &heads {
                for &e in self.host.in_edges(w) {
                    if !self.buffer.contains(e) {
                        continue;
                    }
                    let t = self.host.tail(e);
                    if self.tail_mark[t.0] == epoch {
                        continue;
                    }
                    self.tail_mark[t.0] = epoch;
                    self.tail_parent[t.0] = e;
                    next.push(t);
                }
            }
            if next.is_empty() {
                return None;
            }
            tails = next;
        }
    }

    fn reconstruct(&self, x: VertexId, y: VertexId) -> Walk {
        let mut edges = Vec::new();
        let mut vertices = vec![y];
        let mut forward = self.head_parent[y.0];
        loop {
            edges.push(forward);
            let t = self.host.tail(forward);
            vertices.push(t);
            if t == x {
                break;
            }
            let back = self.tail_parent[t.0];
            edges.push(back);
            let w = self.host.head(back);
            vertices.push(w);
            forward = self.head_parent[w.0];
        }
        edges.reverse();
        vertices.reverse();
        Walk { vertices, edges }
    }

    /// Deactivates `e`, parking it in the buffer if its tail is Low and
    /// otherwise unwinding `Sat`/`Low` to their fixpoint.
    pub fn remove_edge(&mut self, e: EdgeId) -> Result<(), OracleError> {
        if e.0 >= self.host.edge_count() || !self.active.contains(e) {
            return Err(OracleError::NotActive(e));
        }
        self.stats.remove_calls += 1;
        self.active.erase(&self.host, e);
        let (v, w) = self.host.endpoints(e);
        if self.low[v.0] {
            self.buffer.insert(&self.host, e);
            return Ok(());
        }
        // The membership test uses in_F: Sat must keep matching in_F exactly.
        if self.sat[w.0] && !self.profile.sat_threshold.reached_by(self.in_f(w)) {
            let mut candidates = BTreeSet::new();
            self.desaturate(w, &mut candidates);
            while let Some(x) = candidates.pop_first() {
                let x = VertexId(x);
                if !self.low[x.0] || self.profile.low_threshold.reached_by(self.sat_out[x.0]) {
                    continue;
                }
                for i in 0..self.host.out_degree(x) {
                    let b = self.host.out_edges(x)[i];
                    if self.buffer.erase(&self.host, b) {
                        let y = self.host.head(b);
                        if self.sat[y.0] && !self.profile.sat_threshold.reached_by(self.in_f(y)) {
                            self.desaturate(y, &mut candidates);
                        }
                    }
                }
                self.low[x.0] = false;
                self.low_count -= 1;
            }
        }
        Ok(())
    }

    fn desaturate(&mut self, w: VertexId, candidates: &mut BTreeSet<usize>) {
        self.sat[w.0] = false;
        self.sat_count -= 1;
        for &e in self.host.in_edges(w) {
            let x = self.host.tail(e);
            self.sat_out[x.0] -= 1;
            if self.low[x.0] && !self.profile.low_threshold.reached_by(self.sat_out[x.0]) {
                candidates.insert(x.0);
            }
        }
    }

    /// Recomputes every derived quantity from edge membership and reports
    /// each disagreement with the maintained state or the invariants.
    pub fn audit(&self) -> AuditReport {
        let g = &self.host;
        let n = g.vertex_count();
        let p = &self.profile;
        let mut findings = Vec::new();
        for m in self.active.recount(g) {
            findings.push(Finding::Counter { set: SetName::Active, mismatch: m });
        }
        for m in self.buffer.recount(g) {
            findings.push(Finding::Counter { set: SetName::Buffer, mismatch: m });
        }
        let mut in_f = vec![0usize; n];
        let mut out_f = vec![0usize; n];
        let mut out_b = vec![0usize; n];
        for i in 0..g.edge_count() {
            let e = EdgeId(i);
            let (a, h) = (self.active.contains(e), self.buffer.contains(e));
            if a && h {
                findings.push(Finding::Overlap(e));
            }
            if a || h {
                let (t, w) = g.endpoints(e);
                in_f[w.0] += 1;
                out_f[t.0] += 1;
                if h {
                    out_b[t.0] += 1;
                }
            }
        }
        let mut sat_out = vec![0usize; n];
        for &(t, w) in g.edges() {
            if self.sat[w.0] {
                sat_out[t.0] += 1;
            }
        }
        let (mut sat_count, mut low_count) = (0, 0);
        for v in g.vertices() {
            let i = v.0;
            let should_sat = p.sat_threshold.reached_by(in_f[i]);
            match (self.sat[i], should_sat) {
                (true, false) => findings.push(Finding::SatSpurious { vertex: v, in_f: in_f[i] }),
                (false, true) => findings.push(Finding::SatMissing { vertex: v, in_f: in_f[i] }),
                _ => {}
            }
            if sat_out[i] != self.sat_out[i] {
                findings.push(Finding::SatOutCounter { vertex: v, stored: self.sat_out[i], actual: sat_out[i] });
            }
            let should_low = p.low_threshold.reached_by(sat_out[i]);
            match (self.low[i], should_low) {
                (true, false) => findings.push(Finding::LowSpurious { vertex: v, sat_out: sat_out[i] }),
                (false, true) => findings.push(Finding::LowMissing { vertex: v, sat_out: sat_out[i] }),
                _ => {}
            }
            if self.low[i] && out_f[i] != p.out_cap {
                findings.push(Finding::LowUnderfull { vertex: v, out_f: out_f[i] });
            }
            if !self.low[i] && out_b[i] > 0 {
                findings.push(Finding::BufferOutsideLow { vertex: v, out_b: out_b[i] });
            }
            if out_f[i] > p.out_cap {
                findings.push(Finding::OutCapExceeded { vertex: v, out_f: out_f[i] });
            }
            if in_f[i] > p.in_cap {
                findings.push(Finding::InCapExceeded { vertex: v, in_f: in_f[i] });
            }
            sat_count += self.sat[i] as usize;
            low_count += self.low[i] as usize;
        }
        if sat_count != self.sat_count {
            findings.push(Finding::SetSize { set: SetName::Sat, stored: self.sat_count, actual: sat_count });
        }
        if low_count != self.low_count {
            findings.push(Finding::SetSize { set: SetName::Low, stored: self.low_count, actual: low_count });
        }
        if !p.low_bound_holds(n, low_count) {
            findings.push(Finding::LowBound { size: low_count, bound: p.beta * n as f64 / 12.0 });
        }
        AuditReport { findings }
    }

    #[cfg(test)]
    pub(crate) fn active_mut(&mut self) -> &mut EdgeSubset {
        &mut self.active
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum SetName {
    Active,
    Buffer,
    Sat,
    Low,
}

/// One audit disagreement.
#[derive(Clone, Debug, PartialEq)]
pub enum Finding {
    Counter { set: SetName, mismatch: CounterMismatch },
    SetSize { set: SetName, stored: usize, actual: usize },
    Overlap(EdgeId),
    SatSpurious { vertex: VertexId, in_f: usize },
    SatMissing { vertex: VertexId, in_f: usize },
    SatOutCounter { vertex: VertexId, stored: usize, actual: usize },
    LowSpurious { vertex: VertexId, sat_out: usize },
    LowMissing { vertex: VertexId, sat_out: usize },
    LowUnderfull { vertex: VertexId, out_f: usize },
    BufferOutsideLow { vertex: VertexId, out_b: usize },
    OutCapExceeded { vertex: VertexId, out_f: usize },
    InCapExceeded { vertex: VertexId, in_f: usize },
    LowBound { size: usize, bound: f64 },
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Finding::Counter { set, mismatch } => write!(f, "counter {set:?}: {mismatch:?}"),
            Finding::SetSize { set, stored, actual } => write!(f, "size of {set:?}: stored {stored}, actual {actual}"),
            Finding::Overlap(e) => write!(f, "edge {e} in both H and B"),
            Finding::SatSpurious { vertex, in_f } => write!(f, "vertex {vertex} in Sat with in_F={in_f}"),
            Finding::SatMissing { vertex, in_f } => write!(f, "vertex {vertex} missing from Sat with in_F={in_f}"),
            Finding::SatOutCounter { vertex, stored, actual } => {
                write!(f, "out_D({vertex}, Sat) stored {stored}, actual {actual}")
            }
            Finding::LowSpurious { vertex, sat_out } => write!(f, "vertex {vertex} in Low with out_D(v,Sat)={sat_out}"),
            Finding::LowMissing { vertex, sat_out } => {
                write!(f, "vertex {vertex} missing from Low with out_D(v,Sat)={sat_out}")
            }
            Finding::LowUnderfull { vertex, out_f } => write!(f, "Low vertex {vertex} has out_F={out_f}"),
            Finding::BufferOutsideLow { vertex, out_b } => write!(f, "non-Low vertex {vertex} has out_B={out_b}"),
            Finding::OutCapExceeded { vertex, out_f } => write!(f, "vertex {vertex} has out_F={out_f} above cap"),
            Finding::InCapExceeded { vertex, in_f } => write!(f, "vertex {vertex} has in_F={in_f} above cap"),
            Finding::LowBound { size, bound } => write!(f, "|Low|={size} not below {bound}"),
        }
    }
}

impl Finding {
    /// Findings that may legitimately appear while a request is still
    /// cascading: unsaturated heads and pending Low vertices not yet filled.
    pub fn is_quiescent_only(&self) -> bool {
        matches!(self, Finding::SatMissing { .. } | Finding::LowMissing { .. } | Finding::LowUnderfull { .. })
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct AuditReport {
    pub findings: Vec<Finding>,
}

impl AuditReport {
    pub fn is_clean(&self) -> bool {
        self.findings.is_empty()
    }

    /// True when every finding is one [`Finding::is_quiescent_only`] allows.
    pub fn is_clean_mid_request(&self) -> bool {
        self.findings.iter().all(Finding::is_quiescent_only)
    }
}

/// Stable listing of `H`, `B`, `Sat` and `Low` in ascending order.
impl fmt::Display for EdgeOracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn list<I: Iterator<Item = usize>>(f: &mut fmt::Formatter<'_>, name: &str, items: I) -> fmt::Result {
            write!(f, "{name}:")?;
            for i in items {
                write!(f, " {i}")?;
            }
            writeln!(f)
        }
        list(f, "H", self.active.iter().map(|e| e.0))?;
        list(f, "B", self.buffer.iter().map(|e| e.0))?;
        list(f, "Sat", self.saturated().map(|v| v.0))?;
        list(f, "Low", self.low_vertices().map(|v| v.0))
    }
}
