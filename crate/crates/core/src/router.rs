//! The routing engine: serves Find-Path / Remove-Path requests on a
//! preprocessed host, keeping all live paths pairwise edge-disjoint.
//!
//! A path from `a` to `b` is glued from three pieces: a tree path inside
//! `G1` grown from `a` by the out-oracle, a connector in `G3` avoiding
//! previously used connector edges, and a tree path inside `G2` grown
//! backwards from `b` by the in-oracle (which runs on the reversal of `G2`).

use alloc::collections::{BTreeMap, VecDeque};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::graph::{Digraph, EdgeId, EdgeSubset, UndirectedGraph, VertexId};
use crate::oracle::{self, ConstantsProfile, EdgeOracle, OracleError};
use crate::preprocess::{self, PreprocessError, SplitParams, SplitResult, Subgraph};

/// `⌈log2 n⌉` (0 for `n ≤ 1`).
pub fn ceil_log2(n: usize) -> usize {
    if n <= 1 {
        0
    } else {
        (usize::BITS - (n - 1).leading_zeros()) as usize
    }
}

/// Every constant the router and its two oracles run with.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RouterProfile {
    pub n: usize,
    /// Undirected degree of the input graph.
    pub d: usize,
    /// Degree of the oriented host.
    pub k: usize,
    pub beta: f64,
    pub gamma: f64,
    pub relaxed: bool,
    pub min_degree: usize,
    /// Degree of the two oracle hosts `G1`, `G2`.
    pub d_prime: usize,
    pub c: f64,
    /// Bound on tree-path length (hops from the BFS root).
    pub depth_cap: usize,
    pub bfs_vertex_cap: usize,
    pub bfs_edge_cap: usize,
    /// Oracle requests per dequeued vertex.
    pub fanout: usize,
    /// A vertex may start (end) a path only while it starts (ends) fewer than this many.
    pub endpoint_cap: usize,
    /// Live-path limit.
    pub r: usize,
    pub g3_path_cap: usize,
    pub path_len_cap: usize,
    pub oracle: ConstantsProfile,
}

impl RouterProfile {
    pub fn split_params(&self) -> SplitParams {
        SplitParams { min_degree: self.min_degree, d_prime: Some(self.d_prime) }
    }

    /// `⌊c·n·k/2⌋`, the active-set budget of each oracle side.
    pub fn active_budget(&self) -> usize {
        libm::floor(self.c * self.n as f64 * self.k as f64 / 2.0) as usize
    }

    /// The two capacity chains: `r·depth ≤ c·n·k/2` and `300·r/β ≤ β·n·k/50`.
    pub fn chains_hold(&self) -> (bool, bool) {
        let nk = self.n as f64 * self.k as f64;
        let first = (self.r * self.depth_cap) as f64 <= self.c * nk / 2.0;
        let second = 300.0 * self.r as f64 / self.beta <= self.beta * nk / 50.0;
        (first, second)
    }

    pub fn validate(&self) -> Result<(), RouteError> {
        self.oracle.validate().map_err(RouteError::OracleSetup)?;
        if self.oracle.d != self.d_prime {
            return Err(RouteError::Profile("oracle degree differs from d'"));
        }
        if self.fanout == 0 {
            return Err(RouteError::Profile("fanout must be positive"));
        }
        if self.endpoint_cap == 0 {
            return Err(RouteError::Profile("endpoint cap must be positive"));
        }
        if !self.relaxed {
            let (a, b) = self.chains_hold();
            if !(a && b) {
                return Err(RouteError::Profile("capacity chains violated on a strict profile"));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Side {
    /// Out-oracle on `G1`, trees grow away from the root.
    Out,
    /// In-oracle on reversed `G2`, trees grow towards the root.
    In,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum ErrorClass {
    /// The request broke the game rules; nothing changed.
    Caller,
    /// A step that cannot fail on an honest expander failed; state rolled back.
    Expansion,
    /// Construction-time problem.
    Setup,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RouteError {
    #[error("vertex {0} out of range")]
    VertexOutOfRange(VertexId),
    #[error("endpoints coincide at {0}")]
    SameEndpoints(VertexId),
    #[error("vertex {vertex} already starts {count} paths (cap {cap})")]
    StartCapReached { vertex: VertexId, count: usize, cap: usize },
    #[error("vertex {vertex} already ends {count} paths (cap {cap})")]
    EndCapReached { vertex: VertexId, count: usize, cap: usize },
    #[error("{live} live paths, limit {r}")]
    PathLimitReached { live: usize, r: usize },
    #[error("no live path with id {0}")]
    UnknownPath(u64),
    #[error("{side:?} oracle failed: {source}")]
    Oracle { side: Side, source: OracleError },
    #[error("{side:?} tree from {root} stalled at {reached} vertices, needs {needed}")]
    BfsStalled { side: Side, root: VertexId, reached: usize, needed: usize },
    #[error("{side:?} tree path has {len} edges, cap {cap}")]
    DepthExceeded { side: Side, len: usize, cap: usize },
    #[error("no connector between the two trees")]
    NoConnector,
    #[error("connector has {len} edges, cap {cap}")]
    ConnectorTooLong { len: usize, cap: usize },
    #[error("preprocessing failed: {0}")]
    Preprocess(PreprocessError),
    #[error("oracle construction failed: {0}")]
    OracleSetup(OracleError),
    #[error("inconsistent profile: {0}")]
    Profile(&'static str),
}

impl RouteError {
    pub fn class(&self) -> ErrorClass {
        use RouteError::*;
        match self {
            VertexOutOfRange(_) | SameEndpoints(_) | StartCapReached { .. } | EndCapReached { .. }
            | PathLimitReached { .. } | UnknownPath(_) => ErrorClass::Caller,
            Oracle { .. } | BfsStalled { .. } | DepthExceeded { .. } | NoConnector | ConnectorTooLong { .. } => {
                ErrorClass::Expansion
            }
            Preprocess(_) | OracleSetup(_) | Profile(_) => ErrorClass::Setup,
        }
    }
}

/// One routed path. Segment edge ids are local to their subgraph; `seg_b`
/// is stored in `G2` orientation, running from `b'` to `b`.
#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PathRecord {
    pub id: u64,
    pub a: VertexId,
    pub b: VertexId,
    pub seg_a: Vec<EdgeId>,
    pub seg_mid: Vec<EdgeId>,
    pub seg_b: Vec<EdgeId>,
    /// `a = v0, …, v_len = b`.
    pub vertices: Vec<VertexId>,
}

impl PathRecord {
    pub fn len(&self) -> usize {
        self.seg_a.len() + self.seg_mid.len() + self.seg_b.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Edge ids in the oriented host, in walk order.
    pub fn host_edges(&self, split: &SplitResult) -> Vec<EdgeId> {
        self.seg_a
            .iter()
            .map(|&e| split.g1.to_host(e))
            .chain(self.seg_mid.iter().map(|&e| split.g3.to_host(e)))
            .chain(self.seg_b.iter().map(|&e| split.g2.to_host(e)))
            .collect()
    }
}

/// `PATH <id> <a> <b> <len> : v0 v1 … vlen`
impl fmt::Display for PathRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PATH {} {} {} {} :", self.id, self.a, self.b, self.len())?;
        for v in &self.vertices {
            write!(f, " {v}")?;
        }
        Ok(())
    }
}

/// Result of one Oracle-BFS.
#[derive(Clone, Debug)]
pub struct BfsTree {
    pub side: Side,
    pub root: VertexId,
    /// Edges returned by the oracle, in request order (local to the oracle host).
    pub edges: Vec<EdgeId>,
    /// Discovered vertices in discovery order.
    pub vertices: Vec<VertexId>,
    /// Tree edge through which each vertex was discovered.
    pub parent: Vec<Option<EdgeId>>,
}

impl BfsTree {
    pub fn contains(&self, v: VertexId) -> bool {
        v == self.root || self.parent[v.0].is_some()
    }

    /// Tree path from the root to `v` (oracle-host orientation).
    pub fn path_to(&self, host: &Digraph, v: VertexId) -> Vec<EdgeId> {
        let mut path = Vec::new();
        let mut cur = v;
        while let Some(e) = self.parent[cur.0] {
            path.push(e);
            cur = host.tail(e);
        }
        path.reverse();
        path
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RouterStats {
    pub find_requests: u64,
    pub found: u64,
    pub rejected: u64,
    pub failed: u64,
    pub removed: u64,
}

#[derive(Clone, Debug)]
pub struct RoutingEngine {
    profile: RouterProfile,
    split: SplitResult,
    out_oracle: EdgeOracle,
    in_oracle: EdgeOracle,
    /// Used connector edges (local to `G3`).
    h3: EdgeSubset,
    registry: BTreeMap<u64, PathRecord>,
    starts: Vec<usize>,
    ends: Vec<usize>,
    next_id: u64,
    stats: RouterStats,
}

impl RoutingEngine {
    /// Preprocesses an undirected regular graph and sets up both oracles.
    pub fn new(g: &UndirectedGraph, profile: RouterProfile) -> Result<Self, RouteError> {
        profile.validate()?;
        if g.vertex_count() != profile.n {
            return Err(RouteError::Profile("profile n differs from the graph"));
        }
        let split = preprocess::pre_process(g, &profile.split_params()).map_err(RouteError::Preprocess)?;
        Self::from_split(split, profile)
    }

    /// Entry point for an already oriented `k`-regular digraph; its
    /// expansion is taken on promise.
    pub fn from_digraph(d: Digraph, profile: RouterProfile) -> Result<Self, RouteError> {
        profile.validate()?;
        let k = d.regular_degree().ok_or(RouteError::Preprocess(PreprocessError::NotRegular))?;
        if 2 * profile.d_prime >= k {
            return Err(RouteError::Preprocess(PreprocessError::DPrimeTooLarge { d_prime: profile.d_prime, k }));
        }
        let mut parts = preprocess::split_regular(&d, k, &[profile.d_prime, profile.d_prime])
            .map_err(RouteError::Preprocess)?
            .into_iter();
        let (g1, g2, g3) = (parts.next().unwrap(), parts.next().unwrap(), parts.next().unwrap());
        Self::from_split(SplitResult { host: d, k, d_prime: profile.d_prime, g1, g2, g3 }, profile)
    }

    pub fn from_split(split: SplitResult, profile: RouterProfile) -> Result<Self, RouteError> {
        profile.validate()?;
        if split.k != profile.k || split.d_prime != profile.d_prime || split.host.vertex_count() != profile.n {
            return Err(RouteError::Profile("split shape differs from the profile"));
        }
        let out_oracle = EdgeOracle::new(split.g1.graph.clone(), profile.oracle).map_err(RouteError::OracleSetup)?;
        let in_oracle =
            EdgeOracle::new(split.g2.graph.reverse(), profile.oracle).map_err(RouteError::OracleSetup)?;
        let n = profile.n;
        Ok(RoutingEngine {
            h3: EdgeSubset::new(&split.g3.graph),
            profile,
            split,
            out_oracle,
            in_oracle,
            registry: BTreeMap::new(),
            starts: vec![0; n],
            ends: vec![0; n],
            next_id: 0,
            stats: RouterStats::default(),
        })
    }

    pub fn profile(&self) -> &RouterProfile {
        &self.profile
    }

    pub fn split(&self) -> &SplitResult {
        &self.split
    }

    pub fn out_oracle(&self) -> &EdgeOracle {
        &self.out_oracle
    }

    pub fn in_oracle(&self) -> &EdgeOracle {
        &self.in_oracle
    }

    pub fn connector_edges(&self) -> &EdgeSubset {
        &self.h3
    }

    pub fn stats(&self) -> &RouterStats {
        &self.stats
    }

    pub fn live_paths(&self) -> impl Iterator<Item = &PathRecord> {
        self.registry.values()
    }

    pub fn live_count(&self) -> usize {
        self.registry.len()
    }

    pub fn path(&self, id: u64) -> Option<&PathRecord> {
        self.registry.get(&id)
    }

    pub fn starts_at(&self, v: VertexId) -> usize {
        self.starts[v.0]
    }

    pub fn ends_at(&self, v: VertexId) -> usize {
        self.ends[v.0]
    }

    fn oracle_mut(&mut self, side: Side) -> &mut EdgeOracle {
        match side {
            Side::Out => &mut self.out_oracle,
            Side::In => &mut self.in_oracle,
        }
    }

    fn check_vertex(&self, v: VertexId) -> Result<(), RouteError> {
        if v.0 >= self.profile.n {
            Err(RouteError::VertexOutOfRange(v))
        } else {
            Ok(())
        }
    }

    /// Grows a tree from `v` by asking the side's oracle for `fanout`
    /// out-edges of every dequeued vertex. Returned edges stay active in the
    /// oracle; callers release what they do not keep.
    pub fn oracle_bfs(&mut self, v: VertexId, side: Side) -> Result<BfsTree, RouteError> {
        self.check_vertex(v)?;
        let p = self.profile;
        let n = p.n;
        let oracle = self.oracle_mut(side);
        let mut parent = vec![None; n];
        let mut seen = vec![false; n];
        seen[v.0] = true;
        let mut vertices = vec![v];
        let mut edges = Vec::new();
        let mut queue = VecDeque::from([v]);
        while vertices.len() < p.bfs_vertex_cap && edges.len() < p.bfs_edge_cap {
            let Some(u) = queue.pop_front() else { break };
            for _ in 0..p.fanout {
                let e = oracle.add_edge(u).map_err(|source| RouteError::Oracle { side, source })?;
                let w = oracle.host().head(e);
                if !seen[w.0] {
                    seen[w.0] = true;
                    parent[w.0] = Some(e);
                    vertices.push(w);
                    queue.push_back(w);
                }
                edges.push(e);
            }
        }
        if vertices.len() < p.bfs_vertex_cap {
            return Err(RouteError::BfsStalled { side, root: v, reached: vertices.len(), needed: p.bfs_vertex_cap });
        }
        Ok(BfsTree { side, root: v, edges, vertices, parent })
    }

    /// Serves Find-Path `a b`. On any failure the engine is left exactly as
    /// it was before the call.
    pub fn find_path(&mut self, a: VertexId, b: VertexId) -> Result<&PathRecord, RouteError> {
        self.stats.find_requests += 1;
        if let Err(e) = self.check_find(a, b) {
            self.stats.rejected += 1;
            return Err(e);
        }
        let out_snap = self.out_oracle.snapshot();
        let in_snap = self.in_oracle.snapshot();
        match self.try_find(a, b) {
            Ok(id) => {
                self.stats.found += 1;
                Ok(&self.registry[&id])
            }
            Err(e) => {
                self.out_oracle.restore(out_snap);
                self.in_oracle.restore(in_snap);
                self.stats.failed += 1;
                Err(e)
            }
        }
    }

    fn check_find(&self, a: VertexId, b: VertexId) -> Result<(), RouteError> {
        self.check_vertex(a)?;
        self.check_vertex(b)?;
        if a == b {
            return Err(RouteError::SameEndpoints(a));
        }
        let cap = self.profile.endpoint_cap;
        if self.starts[a.0] >= cap {
            return Err(RouteError::StartCapReached { vertex: a, count: self.starts[a.0], cap });
        }
        if self.ends[b.0] >= cap {
            return Err(RouteError::EndCapReached { vertex: b, count: self.ends[b.0], cap });
        }
        if self.registry.len() >= self.profile.r {
            return Err(RouteError::PathLimitReached { live: self.registry.len(), r: self.profile.r });
        }
        Ok(())
    }

    fn try_find(&mut self, a: VertexId, b: VertexId) -> Result<u64, RouteError> {
        let tree_a = self.oracle_bfs(a, Side::Out)?;
        let tree_b = self.oracle_bfs(b, Side::In)?;
        let (a_end, b_end, seg_mid) = self.connect(&tree_a, &tree_b)?;

        let seg_a = tree_a.path_to(self.out_oracle.host(), a_end);
        let path_b = tree_b.path_to(self.in_oracle.host(), b_end);
        let cap = self.profile.depth_cap;
        if seg_a.len() > cap {
            return Err(RouteError::DepthExceeded { side: Side::Out, len: seg_a.len(), cap });
        }
        if path_b.len() > cap {
            return Err(RouteError::DepthExceeded { side: Side::In, len: path_b.len(), cap });
        }

        release_unused(&mut self.out_oracle, &tree_a.edges, &seg_a, Side::Out)?;
        release_unused(&mut self.in_oracle, &tree_b.edges, &path_b, Side::In)?;
        for &e in &seg_mid {
            self.h3.insert(&self.split.g3.graph, e);
        }

        let mut seg_b = path_b;
        seg_b.reverse();
        let mut vertices = vec![a];
        let g1 = &self.split.g1.graph;
        let g2 = &self.split.g2.graph;
        let g3 = &self.split.g3.graph;
        vertices.extend(seg_a.iter().map(|&e| g1.head(e)));
        vertices.extend(seg_mid.iter().map(|&e| g3.head(e)));
        vertices.extend(seg_b.iter().map(|&e| g2.head(e)));

        let id = self.next_id;
        self.next_id += 1;
        self.starts[a.0] += 1;
        self.ends[b.0] += 1;
        self.registry.insert(id, PathRecord { id, a, b, seg_a, seg_mid, seg_b, vertices });
        Ok(id)
    }

    /// Shortest path in `G3 \ H3` from the first tree's vertex set to the
    /// second's, by multi-source BFS seeded in ascending vertex order.
    fn connect(&self, from: &BfsTree, to: &BfsTree) -> Result<(VertexId, VertexId, Vec<EdgeId>), RouteError> {
        let g3 = &self.split.g3.graph;
        let mut sources = from.vertices.clone();
        sources.sort_unstable();
        if let Some(&v) = sources.iter().find(|&&v| to.contains(v)) {
            return Ok((v, v, Vec::new()));
        }
        let n = self.profile.n;
        let mut parent: Vec<Option<EdgeId>> = vec![None; n];
        let mut seen = vec![false; n];
        let mut queue = VecDeque::new();
        for &s in &sources {
            seen[s.0] = true;
            queue.push_back(s);
        }
        while let Some(u) = queue.pop_front() {
            for &e in g3.out_edges(u) {
                if self.h3.contains(e) {
                    continue;
                }
                let w = g3.head(e);
                if seen[w.0] {
                    continue;
                }
                seen[w.0] = true;
                parent[w.0] = Some(e);
                if to.contains(w) {
                    let mut path = Vec::new();
                    let mut cur = w;
                    while let Some(pe) = parent[cur.0] {
                        path.push(pe);
                        cur = g3.tail(pe);
                    }
                    path.reverse();
                    if path.len() > self.profile.g3_path_cap {
                        return Err(RouteError::ConnectorTooLong { len: path.len(), cap: self.profile.g3_path_cap });
                    }
                    return Ok((cur, w, path));
                }
                queue.push_back(w);
            }
        }
        Err(RouteError::NoConnector)
    }

    /// Serves Remove-Path.
    pub fn remove_path(&mut self, id: u64) -> Result<PathRecord, RouteError> {
        let rec = self.registry.remove(&id).ok_or(RouteError::UnknownPath(id))?;
        for &e in &rec.seg_a {
            self.out_oracle.remove_edge(e).expect("registry edge is active in the out-oracle");
        }
        for &e in &rec.seg_b {
            self.in_oracle.remove_edge(e).expect("registry edge is active in the in-oracle");
        }
        for &e in &rec.seg_mid {
            self.h3.erase(&self.split.g3.graph, e);
        }
        self.starts[rec.a.0] -= 1;
        self.ends[rec.b.0] -= 1;
        self.stats.removed += 1;
        Ok(rec)
    }

    /// From-scratch check of every engine invariant.
    pub fn verify(&self) -> VerifyReport {
        let p = &self.profile;
        let split = &self.split;
        let n = p.n;
        let mut findings = Vec::new();

        let mut h1 = vec![false; split.g1.graph.edge_count()];
        let mut h2 = vec![false; split.g2.graph.edge_count()];
        let mut h3 = vec![false; split.g3.graph.edge_count()];
        let mut host_owner: Vec<Option<u64>> = vec![None; split.host.edge_count()];
        let mut starts = vec![0usize; n];
        let mut ends = vec![0usize; n];

        for rec in self.registry.values() {
            starts[rec.a.0] += 1;
            ends[rec.b.0] += 1;
            if let Some(why) = walk_problem(split, rec) {
                findings.push(RouteFinding::InvalidPath { id: rec.id, why });
            }
            if rec.len() > p.path_len_cap {
                findings.push(RouteFinding::PathTooLong { id: rec.id, len: rec.len(), cap: p.path_len_cap });
            }
            if rec.seg_a.len() > p.depth_cap || rec.seg_b.len() > p.depth_cap {
                findings.push(RouteFinding::TreeSegmentTooLong { id: rec.id });
            }
            if rec.seg_mid.len() > p.g3_path_cap {
                findings.push(RouteFinding::ConnectorTooLong { id: rec.id, len: rec.seg_mid.len() });
            }
            for (set, seg) in [(&mut h1, &rec.seg_a), (&mut h2, &rec.seg_b), (&mut h3, &rec.seg_mid)] {
                for &e in seg.iter() {
                    if e.0 < set.len() {
                        set[e.0] = true;
                    }
                }
            }
            for e in rec.host_edges(split) {
                match host_owner[e.0] {
                    Some(other) => findings.push(RouteFinding::SharedEdge { edge: e, first: other, second: rec.id }),
                    None => host_owner[e.0] = Some(rec.id),
                }
            }
        }

        for v in 0..n {
            if starts[v] != self.starts[v] {
                findings.push(RouteFinding::EndpointCounter { vertex: VertexId(v), side: Side::Out });
            }
            if ends[v] != self.ends[v] {
                findings.push(RouteFinding::EndpointCounter { vertex: VertexId(v), side: Side::In });
            }
        }

        // Union identity: registry edges equal the maintained sets exactly.
        for (name, scratch, subset) in [
            (SubsetName::H1, &h1, self.out_oracle.active()),
            (SubsetName::H2, &h2, self.in_oracle.active()),
            (SubsetName::H3, &h3, &self.h3),
        ] {
            for (i, &want) in scratch.iter().enumerate() {
                if want != subset.contains(EdgeId(i)) {
                    findings.push(RouteFinding::UnionMismatch { set: name, edge: EdgeId(i) });
                }
            }
        }

        // Sizes.
        let live = self.registry.len();
        let budget = p.active_budget();
        for (name, size) in [(SubsetName::H1, self.out_oracle.active().len()), (SubsetName::H2, self.in_oracle.active().len())] {
            if size > live * p.depth_cap || size > budget {
                findings.push(RouteFinding::SizeBound { set: name, size });
            }
        }
        if self.h3.len() > live * p.g3_path_cap {
            findings.push(RouteFinding::SizeBound { set: SubsetName::H3, size: self.h3.len() });
        }
        if live > p.r {
            findings.push(RouteFinding::TooManyPaths { live, r: p.r });
        }

        // Out-degree balance and in-degree caps on both oracle sides.
        for (side, oracle, extra) in [(Side::Out, &self.out_oracle, &starts), (Side::In, &self.in_oracle, &ends)] {
            let host = oracle.host();
            let mut out = vec![0usize; n];
            let mut inc = vec![0usize; n];
            for e in oracle.active().iter() {
                let (t, h) = host.endpoints(e);
                out[t.0] += 1;
                inc[h.0] += 1;
            }
            for v in 0..n {
                if out[v] > inc[v] + extra[v] {
                    findings.push(RouteFinding::OutBalance { side, vertex: VertexId(v), out: out[v], inc: inc[v] });
                }
                if inc[v] > p.oracle.in_cap {
                    findings.push(RouteFinding::InCap { side, vertex: VertexId(v), inc: inc[v] });
                }
            }
            for f in oracle.audit().findings {
                findings.push(RouteFinding::Oracle { side, finding: f });
            }
        }

        VerifyReport { findings }
    }

    #[cfg(test)]
    pub(crate) fn registry_mut(&mut self) -> &mut BTreeMap<u64, PathRecord> {
        &mut self.registry
    }
}

fn release_unused(oracle: &mut EdgeOracle, tree: &[EdgeId], keep: &[EdgeId], side: Side) -> Result<(), RouteError> {
    for &e in tree {
        if !keep.contains(&e) {
            oracle.remove_edge(e).map_err(|source| RouteError::Oracle { side, source })?;
        }
    }
    Ok(())
}

fn walk_problem(split: &SplitResult, rec: &PathRecord) -> Option<&'static str> {
    fn follow(sub: &Subgraph, seg: &[EdgeId], mut at: VertexId) -> Option<VertexId> {
        for &e in seg {
            if e.0 >= sub.graph.edge_count() || sub.graph.tail(e) != at {
                return None;
            }
            at = sub.graph.head(e);
        }
        Some(at)
    }
    let Some(a_end) = follow(&split.g1, &rec.seg_a, rec.a) else { return Some("G1 segment is not a walk from a") };
    let Some(b_start) = follow(&split.g3, &rec.seg_mid, a_end) else { return Some("G3 segment does not continue") };
    let Some(end) = follow(&split.g2, &rec.seg_b, b_start) else { return Some("G2 segment does not continue") };
    if end != rec.b {
        return Some("walk does not end at b");
    }
    let mut expect = vec![rec.a];
    for e in rec.host_edges(split) {
        expect.push(split.host.head(e));
    }
    if expect != rec.vertices {
        return Some("vertex sequence disagrees with edges");
    }
    let mut edges = rec.host_edges(split);
    edges.sort_unstable();
    if edges.windows(2).any(|w| w[0] == w[1]) {
        return Some("repeated edge");
    }
    None
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum SubsetName {
    H1,
    H2,
    H3,
}

#[derive(Clone, Debug, PartialEq)]
pub enum RouteFinding {
    InvalidPath { id: u64, why: &'static str },
    PathTooLong { id: u64, len: usize, cap: usize },
    TreeSegmentTooLong { id: u64 },
    ConnectorTooLong { id: u64, len: usize },
    SharedEdge { edge: EdgeId, first: u64, second: u64 },
    EndpointCounter { vertex: VertexId, side: Side },
    UnionMismatch { set: SubsetName, edge: EdgeId },
    SizeBound { set: SubsetName, size: usize },
    TooManyPaths { live: usize, r: usize },
    OutBalance { side: Side, vertex: VertexId, out: usize, inc: usize },
    InCap { side: Side, vertex: VertexId, inc: usize },
    Oracle { side: Side, finding: oracle::Finding },
}

impl fmt::Display for RouteFinding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use RouteFinding::*;
        match self {
            InvalidPath { id, why } => write!(f, "path {id}: {why}"),
            PathTooLong { id, len, cap } => write!(f, "path {id} has length {len} above {cap}"),
            TreeSegmentTooLong { id } => write!(f, "path {id} has a tree segment above the depth cap"),
            ConnectorTooLong { id, len } => write!(f, "path {id} has a connector of length {len}"),
            SharedEdge { edge, first, second } => write!(f, "host edge {edge} used by paths {first} and {second}"),
            EndpointCounter { vertex, side } => write!(f, "{side:?} endpoint counter of {vertex} is stale"),
            UnionMismatch { set, edge } => write!(f, "{set:?} membership of {edge} disagrees with the registry"),
            SizeBound { set, size } => write!(f, "{set:?} has {size} edges, above its bound"),
            TooManyPaths { live, r } => write!(f, "{live} live paths above r={r}"),
            OutBalance { side, vertex, out, inc } => {
                write!(f, "{side:?} side: vertex {vertex} has out {out} > in {inc} + endpoint count")
            }
            InCap { side, vertex, inc } => write!(f, "{side:?} side: vertex {vertex} has in-degree {inc} above cap"),
            Oracle { side, finding } => write!(f, "{side:?} oracle: {finding}"),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct VerifyReport {
    pub findings: Vec<RouteFinding>,
}

impl VerifyReport {
    pub fn is_clean(&self) -> bool {
        self.findings.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use crate::expander::{desk_profile, gen_random_regular_graph};

    fn engine(n: usize, d: usize, seed: u64) -> RoutingEngine {
        let g = gen_random_regular_graph(n, d, seed).unwrap();
        RoutingEngine::new(&g, desk_profile(n, d)).unwrap()
    }

    #[test]
    fn log2_ceiling() {
        assert_eq!(ceil_log2(1), 0);
        assert_eq!(ceil_log2(2), 1);
        assert_eq!(ceil_log2(600), 10);
        assert_eq!(ceil_log2(1024), 10);
        assert_eq!(ceil_log2(1025), 11);
    }

    #[test]
    fn fresh_engine_verifies() {
        let e = engine(200, 30, 3);
        assert!(e.verify().is_clean());
        assert_eq!(e.out_oracle().host().regular_degree(), Some(e.profile().d_prime));
        assert_eq!(e.in_oracle().host().regular_degree(), Some(e.profile().d_prime));
    }

    #[test]
    fn first_bfs_root_gets_fanout_edges() {
        let mut e = engine(200, 30, 3);
        let tree = e.oracle_bfs(VertexId(0), Side::Out).unwrap();
        let root_out = tree.edges.iter().filter(|&&x| e.out_oracle().host().tail(x) == VertexId(0)).count();
        assert_eq!(root_out, e.profile().fanout);
    }

    #[test]
    fn degenerate_request_rejected_without_change() {
        let mut e = engine(200, 30, 3);
        let before = e.out_oracle().to_string();
        assert_eq!(e.find_path(VertexId(4), VertexId(4)).unwrap_err(), RouteError::SameEndpoints(VertexId(4)));
        assert_eq!(e.out_oracle().to_string(), before);
        assert_eq!(e.live_count(), 0);
    }

    #[test]
    fn round_trip_restores_fresh_state() {
        let mut e = engine(200, 30, 3);
        let fresh = e.clone();
        let id = e.find_path(VertexId(1), VertexId(77)).unwrap().id;
        assert!(e.verify().is_clean());
        e.remove_path(id).unwrap();
        assert_eq!(e.live_count(), 0);
        assert_eq!(e.connector_edges(), fresh.connector_edges());
        assert_eq!(e.starts, fresh.starts);
        assert_eq!(e.ends, fresh.ends);
        assert!(e.verify().is_clean());
        assert_eq!(e.remove_path(id).unwrap_err(), RouteError::UnknownPath(id));
    }

    #[test]
    fn shared_edge_is_reported() {
        let mut e = engine(200, 30, 3);
        e.find_path(VertexId(1), VertexId(77)).unwrap();
        e.find_path(VertexId(2), VertexId(78)).unwrap();
        let first = e.registry_mut().get(&0).unwrap().clone();
        let second = e.registry_mut().get_mut(&1).unwrap();
        second.seg_mid.push(first.seg_a[0]);
        let report = e.verify();
        assert!(report
            .findings
            .iter()
            .any(|f| matches!(f, RouteFinding::SharedEdge { .. }) || matches!(f, RouteFinding::InvalidPath { .. })));
    }

    #[test]
    fn endpoint_cap_enforced() {
        let mut e = engine(200, 30, 3);
        let cap = e.profile().endpoint_cap;
        for i in 0..cap {
            e.find_path(VertexId(5), VertexId(10 + i)).unwrap();
        }
        let err = e.find_path(VertexId(5), VertexId(150)).unwrap_err();
        assert_eq!(err.class(), ErrorClass::Caller);
    }
}
