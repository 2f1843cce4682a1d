//! Directed and undirected multigraph storage.
//!
//! Graphs are immutable once built. Every edge gets a stable [`EdgeId`] equal
//! to its position in the construction sequence, and adjacency lists keep
//! construction order. Everything downstream that has to "pick any" edge
//! picks the first qualifying one in adjacency order, so this order is the
//! single tie-break source of the whole crate.
//!
//! Dynamic edge sets live in [`EdgeSubset`] overlays keyed by `EdgeId`.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct VertexId(pub usize);

impl VertexId {
    #[inline]
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EdgeId(pub usize);

impl EdgeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for EdgeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GraphError {
    #[error("edge {edge} endpoint {vertex} out of range for {n} vertices")]
    EndpointOutOfRange { edge: usize, vertex: usize, n: usize },
}

/// Immutable directed multigraph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Digraph {
    n: usize,
    edges: Vec<(VertexId, VertexId)>,
    out_adj: Vec<Vec<EdgeId>>,
    in_adj: Vec<Vec<EdgeId>>,
}

impl Digraph {
    /// Builds a digraph; `EdgeId`s and adjacency lists follow input order.
    pub fn new(n: usize, edges: Vec<(VertexId, VertexId)>) -> Result<Self, GraphError> {
        for (i, &(t, h)) in edges.iter().enumerate() {
            for v in [t, h] {
                if v.0 >= n {
                    return Err(GraphError::EndpointOutOfRange { edge: i, vertex: v.0, n });
                }
            }
        }
        let mut out_adj = vec![Vec::new(); n];
        let mut in_adj = vec![Vec::new(); n];
        for (i, &(t, h)) in edges.iter().enumerate() {
            out_adj[t.0].push(EdgeId(i));
            in_adj[h.0].push(EdgeId(i));
        }
        Ok(Digraph { n, edges, out_adj, in_adj })
    }

    /// Convenience constructor from raw index pairs.
    pub fn from_pairs(n: usize, pairs: &[(usize, usize)]) -> Result<Self, GraphError> {
        Self::new(n, pairs.iter().map(|&(t, h)| (VertexId(t), VertexId(h))).collect())
    }

    #[inline]
    pub fn vertex_count(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        (0..self.n).map(VertexId)
    }

    pub fn edges(&self) -> &[(VertexId, VertexId)] {
        &self.edges
    }

    #[inline]
    pub fn endpoints(&self, e: EdgeId) -> (VertexId, VertexId) {
        self.edges[e.0]
    }

    #[inline]
    pub fn tail(&self, e: EdgeId) -> VertexId {
        self.edges[e.0].0
    }

    #[inline]
    pub fn head(&self, e: EdgeId) -> VertexId {
        self.edges[e.0].1
    }

    #[inline]
    pub fn out_edges(&self, v: VertexId) -> &[EdgeId] {
        &self.out_adj[v.0]
    }

    #[inline]
    pub fn in_edges(&self, v: VertexId) -> &[EdgeId] {
        &self.in_adj[v.0]
    }

    #[inline]
    pub fn out_degree(&self, v: VertexId) -> usize {
        self.out_adj[v.0].len()
    }

    #[inline]
    pub fn in_degree(&self, v: VertexId) -> usize {
        self.in_adj[v.0].len()
    }

    /// Returns `Some(k)` when every vertex has in- and out-degree `k`.
    pub fn regular_degree(&self) -> Option<usize> {
        let k = if self.n == 0 { 0 } else { self.out_adj[0].len() };
        self.vertices()
            .all(|v| self.out_degree(v) == k && self.in_degree(v) == k)
            .then_some(k)
    }

    /// Same edge ids with every edge's direction flipped.
    pub fn reverse(&self) -> Digraph {
        Digraph {
            n: self.n,
            edges: self.edges.iter().map(|&(t, h)| (h, t)).collect(),
            out_adj: self.in_adj.clone(),
            in_adj: self.out_adj.clone(),
        }
    }

    /// Number of edges with both endpoints in `set`.
    pub fn edges_within(&self, set: &[VertexId]) -> usize {
        let mask = self.mask(set);
        self.edges.iter().filter(|&&(t, h)| mask[t.0] && mask[h.0]).count()
    }

    /// `(out, in)`: edges from `s1` into `s2`, and edges from `s2` into `s1`.
    pub fn boundary_counts(&self, s1: &[VertexId], s2: &[VertexId]) -> (usize, usize) {
        let m1 = self.mask(s1);
        let m2 = self.mask(s2);
        let mut out = 0;
        let mut inc = 0;
        for &(t, h) in &self.edges {
            if m1[t.0] && m2[h.0] {
                out += 1;
            }
            if m2[t.0] && m1[h.0] {
                inc += 1;
            }
        }
        (out, inc)
    }

    /// The undirected multigraph obtained by forgetting directions.
    pub fn undirected(&self) -> UndirectedGraph {
        UndirectedGraph::new(self.n, self.edges.clone()).expect("endpoints already validated")
    }

    fn mask(&self, set: &[VertexId]) -> Vec<bool> {
        let mut mask = vec![false; self.n];
        for v in set {
            mask[v.0] = true;
        }
        mask
    }
}

/// Immutable undirected multigraph. A loop contributes two to its vertex's degree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UndirectedGraph {
    n: usize,
    edges: Vec<(VertexId, VertexId)>,
    incidence: Vec<Vec<EdgeId>>,
}

impl UndirectedGraph {
    pub fn new(n: usize, edges: Vec<(VertexId, VertexId)>) -> Result<Self, GraphError> {
        for (i, &(u, v)) in edges.iter().enumerate() {
            for w in [u, v] {
                if w.0 >= n {
                    return Err(GraphError::EndpointOutOfRange { edge: i, vertex: w.0, n });
                }
            }
        }
        let mut incidence = vec![Vec::new(); n];
        for (i, &(u, v)) in edges.iter().enumerate() {
            incidence[u.0].push(EdgeId(i));
            incidence[v.0].push(EdgeId(i));
        }
        Ok(UndirectedGraph { n, edges, incidence })
    }

    pub fn from_pairs(n: usize, pairs: &[(usize, usize)]) -> Result<Self, GraphError> {
        Self::new(n, pairs.iter().map(|&(u, v)| (VertexId(u), VertexId(v))).collect())
    }

    #[inline]
    pub fn vertex_count(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        (0..self.n).map(VertexId)
    }

    pub fn edges(&self) -> &[(VertexId, VertexId)] {
        &self.edges
    }

    #[inline]
    pub fn endpoints(&self, e: EdgeId) -> (VertexId, VertexId) {
        self.edges[e.0]
    }

    /// Incident edge ids in construction order (a loop appears twice).
    #[inline]
    pub fn incident(&self, v: VertexId) -> &[EdgeId] {
        &self.incidence[v.0]
    }

    #[inline]
    pub fn degree(&self, v: VertexId) -> usize {
        self.incidence[v.0].len()
    }

    pub fn regular_degree(&self) -> Option<usize> {
        let d = if self.n == 0 { 0 } else { self.degree(VertexId(0)) };
        self.vertices().all(|v| self.degree(v) == d).then_some(d)
    }

    /// The endpoint of `e` opposite to `v`.
    #[inline]
    pub fn other(&self, e: EdgeId, v: VertexId) -> VertexId {
        let (a, b) = self.edges[e.0];
        if a == v {
            b
        } else {
            a
        }
    }

    pub fn is_connected(&self) -> bool {
        if self.n == 0 {
            return true;
        }
        let mut seen = vec![false; self.n];
        let mut queue = VecDeque::from([VertexId(0)]);
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = queue.pop_front() {
            for &e in self.incident(u) {
                let w = self.other(e, u);
                if !seen[w.0] {
                    seen[w.0] = true;
                    count += 1;
                    queue.push_back(w);
                }
            }
        }
        count == self.n
    }

    pub fn edges_within(&self, set: &[VertexId]) -> usize {
        let mut mask = vec![false; self.n];
        for v in set {
            mask[v.0] = true;
        }
        self.edges.iter().filter(|&&(u, v)| mask[u.0] && mask[v.0]).count()
    }

    /// Copy without the edges whose ids are flagged in `drop`.
    pub fn without_edges(&self, drop: &[bool]) -> UndirectedGraph {
        let kept = self
            .edges
            .iter()
            .enumerate()
            .filter(|(i, _)| !drop[*i])
            .map(|(_, &e)| e)
            .collect();
        UndirectedGraph::new(self.n, kept).expect("subgraph of a valid graph")
    }
}

/// A dynamic subset of a fixed digraph's edges with per-vertex degree counters.
///
/// The subset does not own its digraph; mutators take it as an argument and
/// must always be handed the same graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeSubset {
    member: Vec<bool>,
    out_deg: Vec<usize>,
    in_deg: Vec<usize>,
    len: usize,
}

/// A counter that disagrees with a recount from membership.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CounterMismatch {
    OutDegree { vertex: VertexId, stored: usize, actual: usize },
    InDegree { vertex: VertexId, stored: usize, actual: usize },
    Size { stored: usize, actual: usize },
}

impl EdgeSubset {
    pub fn new(graph: &Digraph) -> Self {
        EdgeSubset {
            member: vec![false; graph.edge_count()],
            out_deg: vec![0; graph.vertex_count()],
            in_deg: vec![0; graph.vertex_count()],
            len: 0,
        }
    }

    #[inline]
    pub fn contains(&self, e: EdgeId) -> bool {
        self.member[e.0]
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn out_degree(&self, v: VertexId) -> usize {
        self.out_deg[v.0]
    }

    #[inline]
    pub fn in_degree(&self, v: VertexId) -> usize {
        self.in_deg[v.0]
    }

    /// Returns `false` if `e` was already a member.
    pub fn insert(&mut self, graph: &Digraph, e: EdgeId) -> bool {
        if self.member[e.0] {
            return false;
        }
        let (t, h) = graph.endpoints(e);
        self.member[e.0] = true;
        self.out_deg[t.0] += 1;
        self.in_deg[h.0] += 1;
        self.len += 1;
        true
    }

    /// Returns `false` if `e` was not a member.
    pub fn erase(&mut self, graph: &Digraph, e: EdgeId) -> bool {
        if !self.member[e.0] {
            return false;
        }
        let (t, h) = graph.endpoints(e);
        self.member[e.0] = false;
        self.out_deg[t.0] -= 1;
        self.in_deg[h.0] -= 1;
        self.len -= 1;
        true
    }

    /// Member ids in ascending order.
    pub fn iter(&self) -> impl Iterator<Item = EdgeId> + '_ {
        self.member.iter().enumerate().filter(|(_, &m)| m).map(|(i, _)| EdgeId(i))
    }

    pub fn capacity(&self) -> usize {
        self.member.len()
    }

    /// Recounts every counter from membership and lists disagreements.
    pub fn recount(&self, graph: &Digraph) -> Vec<CounterMismatch> {
        let mut out = vec![0; graph.vertex_count()];
        let mut inc = vec![0; graph.vertex_count()];
        let mut len = 0;
        for e in self.iter() {
            let (t, h) = graph.endpoints(e);
            out[t.0] += 1;
            inc[h.0] += 1;
            len += 1;
        }
        let mut found = Vec::new();
        for v in 0..graph.vertex_count() {
            if out[v] != self.out_deg[v] {
                found.push(CounterMismatch::OutDegree { vertex: VertexId(v), stored: self.out_deg[v], actual: out[v] });
            }
            if inc[v] != self.in_deg[v] {
                found.push(CounterMismatch::InDegree { vertex: VertexId(v), stored: self.in_deg[v], actual: inc[v] });
            }
        }
        if len != self.len {
            found.push(CounterMismatch::Size { stored: self.len, actual: len });
        }
        found
    }

    #[cfg(test)]
    pub(crate) fn corrupt_out_degree(&mut self, v: VertexId, value: usize) {
        self.out_deg[v.0] = value;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle() -> Digraph {
        Digraph::from_pairs(3, &[(0, 1), (1, 2), (2, 0)]).unwrap()
    }

    #[test]
    fn single_edge_degrees() {
        let g = Digraph::from_pairs(2, &[(0, 1)]).unwrap();
        assert_eq!(g.edge_count(), 1);
        assert_eq!(g.out_degree(VertexId(0)), 1);
        assert_eq!(g.in_degree(VertexId(1)), 1);
        assert_eq!(g.out_degree(VertexId(1)), 0);
    }

    #[test]
    fn triangle_is_one_regular() {
        assert_eq!(triangle().regular_degree(), Some(1));
    }

    #[test]
    fn parallel_edges_get_distinct_ids() {
        let g = Digraph::from_pairs(4, &[(0, 1), (0, 1)]).unwrap();
        assert_eq!(g.out_edges(VertexId(0)), &[EdgeId(0), EdgeId(1)]);
        assert_eq!(g.out_degree(VertexId(0)), 2);
        assert_eq!(g.regular_degree(), None);
    }

    #[test]
    fn endpoint_out_of_range_is_rejected() {
        let err = Digraph::from_pairs(2, &[(0, 1), (1, 2)]).unwrap_err();
        assert_eq!(err, GraphError::EndpointOutOfRange { edge: 1, vertex: 2, n: 2 });
    }

    #[test]
    fn reverse_triangle() {
        let r = triangle().reverse();
        assert_eq!(r.edges(), &[(VertexId(1), VertexId(0)), (VertexId(2), VertexId(1)), (VertexId(0), VertexId(2))]);
        let single = Digraph::from_pairs(2, &[(0, 1)]).unwrap().reverse();
        assert_eq!(single.endpoints(EdgeId(0)), (VertexId(1), VertexId(0)));
        assert_eq!(single.out_edges(VertexId(1)), &[EdgeId(0)]);
        assert_eq!(triangle().reverse().reverse(), triangle());
    }

    #[test]
    fn edges_within_and_boundary() {
        let g = triangle();
        assert_eq!(g.edges_within(&[VertexId(0), VertexId(1)]), 1);
        assert_eq!(g.edges_within(&[]), 0);
        assert_eq!(g.boundary_counts(&[VertexId(0)], &[VertexId(1)]), (1, 0));
        let all: Vec<_> = g.vertices().collect();
        assert_eq!(g.boundary_counts(&all, &all), (3, 3));
    }

    #[test]
    fn subset_counters_follow_membership() {
        let g = Digraph::from_pairs(3, &[(0, 1), (0, 1), (1, 2)]).unwrap();
        let mut s = EdgeSubset::new(&g);
        assert!(s.insert(&g, EdgeId(0)));
        assert!(!s.insert(&g, EdgeId(0)));
        assert!(s.insert(&g, EdgeId(1)));
        assert_eq!(s.out_degree(VertexId(0)), 2);
        assert_eq!(s.in_degree(VertexId(1)), 2);
        assert!(s.erase(&g, EdgeId(0)));
        assert!(!s.erase(&g, EdgeId(2)));
        assert_eq!(s.len(), 1);
        assert!(s.recount(&g).is_empty());
        s.corrupt_out_degree(VertexId(2), 5);
        assert_eq!(
            s.recount(&g),
            vec![CounterMismatch::OutDegree { vertex: VertexId(2), stored: 5, actual: 0 }]
        );
    }

    #[test]
    fn connectivity() {
        let two_triangles = UndirectedGraph::from_pairs(6, &[(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3)]).unwrap();
        assert!(!two_triangles.is_connected());
        let c4 = UndirectedGraph::from_pairs(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        assert!(c4.is_connected());
        assert_eq!(c4.regular_degree(), Some(2));
    }
}
