//! Turns an undirected regular graph into the oriented, three-way split host
//! the router runs on.
//!
//! Pipeline: (odd degree only) remove a perfect matching, orient the rest
//! along an Eulerian circuit, then peel perfect matchings off the bipartite
//! double cover of the orientation to obtain two `d'`-regular factors. The
//! leftover is the connector subgraph.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use crate::graph::{Digraph, EdgeId, UndirectedGraph, VertexId};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PreprocessError {
    #[error("vertex {0} has odd degree")]
    OddDegree(VertexId),
    #[error("graph is disconnected")]
    Disconnected,
    #[error("graph is not regular")]
    NotRegular,
    #[error("odd degree {d} needs an even vertex count, got {n}")]
    OddVertexCount { n: usize, d: usize },
    #[error("no perfect matching exists (input violates its expansion promise)")]
    NoPerfectMatching,
    #[error("degree {d} is below the profile minimum {min}")]
    DegreeTooSmall { d: usize, min: usize },
    #[error("oriented degree {k} gives d' = 0")]
    DPrimeZero { k: usize },
    #[error("d' = {d_prime} leaves no room for two factors in degree {k}")]
    DPrimeTooLarge { d_prime: usize, k: usize },
    #[error("digraph is not {k}-regular")]
    NotKRegular { k: usize },
    #[error("requested factor degrees sum to {sum}, more than {k}")]
    PartsExceedDegree { sum: usize, k: usize },
    #[error("internal corruption: regular bipartite graph without a perfect matching")]
    BipartiteMatchingMissing,
}

/// A spanning subdigraph of the oriented host together with the host edge
/// id of each of its edges.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subgraph {
    pub graph: Digraph,
    pub origin: Vec<EdgeId>,
}

impl Subgraph {
    /// Host edge id of a local edge.
    #[inline]
    pub fn to_host(&self, e: EdgeId) -> EdgeId {
        self.origin[e.0]
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SplitResult {
    /// Oriented host, `k`-regular.
    pub host: Digraph,
    pub k: usize,
    pub d_prime: usize,
    pub g1: Subgraph,
    pub g2: Subgraph,
    pub g3: Subgraph,
}

/// Knobs of [`pre_process`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SplitParams {
    /// Inputs with undirected degree below this are rejected.
    pub min_degree: usize,
    /// Factor degree; `None` means `⌊k/10⌋`.
    pub d_prime: Option<usize>,
}

impl Default for SplitParams {
    fn default() -> Self {
        SplitParams { min_degree: 201, d_prime: None }
    }
}

/// Orients every edge along an Eulerian circuit so that in- and out-degree
/// are both `deg(v)/2`. Edge `i` of the output is edge `i` of the input.
pub fn eulerian_orient(g: &UndirectedGraph) -> Result<Digraph, PreprocessError> {
    for v in g.vertices() {
        if g.degree(v) % 2 == 1 {
            return Err(PreprocessError::OddDegree(v));
        }
    }
    if !g.is_connected() {
        return Err(PreprocessError::Disconnected);
    }
    let n = g.vertex_count();
    let m = g.edge_count();
    let mut oriented: Vec<Option<(VertexId, VertexId)>> = vec![None; m];
    let mut cursor = vec![0usize; n];
    if m > 0 {
        // Hierholzer: every edge is oriented in the direction it is first walked.
        let mut stack = vec![VertexId(0)];
        while let Some(&v) = stack.last() {
            let inc = g.incident(v);
            while cursor[v.0] < inc.len() && oriented[inc[cursor[v.0]].0].is_some() {
                cursor[v.0] += 1;
            }
            if cursor[v.0] < inc.len() {
                let e = inc[cursor[v.0]];
                let w = g.other(e, v);
                oriented[e.0] = Some((v, w));
                stack.push(w);
            } else {
                stack.pop();
            }
        }
    }
    let edges = oriented.into_iter().map(|o| o.expect("connected graph: every edge walked")).collect();
    Ok(Digraph::new(n, edges).expect("endpoints already validated"))
}

/// Finds a perfect matching of `g` (blossom algorithm) and returns its edge
/// ids (ascending) together with the remaining graph.
pub fn extract_perfect_matching(g: &UndirectedGraph) -> Result<(Vec<EdgeId>, UndirectedGraph), PreprocessError> {
    let n = g.vertex_count();
    if n % 2 == 1 {
        return Err(PreprocessError::NoPerfectMatching);
    }
    let mate = maximum_matching(g);
    if mate.iter().any(Option::is_none) {
        return Err(PreprocessError::NoPerfectMatching);
    }
    let mut chosen = Vec::with_capacity(n / 2);
    let mut drop = vec![false; g.edge_count()];
    for u in g.vertices() {
        let w = mate[u.0].unwrap();
        if u < w {
            let e = g
                .incident(u)
                .iter()
                .copied()
                .find(|&e| g.other(e, u) == w && !drop[e.0])
                .expect("matched pair is adjacent");
            drop[e.0] = true;
            chosen.push(e);
        }
    }
    chosen.sort_unstable();
    Ok((chosen, g.without_edges(&drop)))
}

/// Edmonds' blossom algorithm for maximum cardinality matching.
fn maximum_matching(g: &UndirectedGraph) -> Vec<Option<VertexId>> {
    const NONE: usize = usize::MAX;
    let n = g.vertex_count();
    let adj: Vec<Vec<usize>> = g
        .vertices()
        .map(|v| {
            g.incident(v)
                .iter()
                .map(|&e| g.other(e, v).0)
                .filter(|&w| w != v.0)
                .collect()
        })
        .collect();
    let mut mate = vec![NONE; n];

    // Greedy start; the blossom search only fixes what is left.
    for v in 0..n {
        if mate[v] == NONE {
            if let Some(&w) = adj[v].iter().find(|&&w| mate[w] == NONE) {
                mate[v] = w;
                mate[w] = v;
            }
        }
    }

    let mut parent = vec![NONE; n];
    let mut base: Vec<usize> = (0..n).collect();
    let mut used = vec![false; n];
    let mut in_blossom = vec![false; n];
    let mut on_path = vec![false; n];

    let lca = |mut a: usize, mut b: usize, base: &[usize], mate: &[usize], parent: &[usize], on_path: &mut [bool]| {
        on_path.iter_mut().for_each(|x| *x = false);
        loop {
            a = base[a];
            on_path[a] = true;
            if mate[a] == NONE {
                break;
            }
            a = parent[mate[a]];
        }
        loop {
            b = base[b];
            if on_path[b] {
                return b;
            }
            b = parent[mate[b]];
        }
    };

    fn mark_path(
        mut v: usize,
        b: usize,
        mut child: usize,
        base: &[usize],
        mate: &[usize],
        parent: &mut [usize],
        in_blossom: &mut [bool],
    ) {
        while base[v] != b {
            in_blossom[base[v]] = true;
            in_blossom[base[mate[v]]] = true;
            parent[v] = child;
            child = mate[v];
            v = parent[mate[v]];
        }
    }

    for root in 0..n {
        if mate[root] != NONE {
            continue;
        }
        parent.iter_mut().for_each(|p| *p = NONE);
        used.iter_mut().for_each(|u| *u = false);
        for (i, b) in base.iter_mut().enumerate() {
            *b = i;
        }
        used[root] = true;
        let mut queue = VecDeque::from([root]);
        let mut end = NONE;
        'search: while let Some(v) = queue.pop_front() {
            for &to in &adj[v] {
                if base[v] == base[to] || mate[v] == to {
                    continue;
                }
                if to == root || (mate[to] != NONE && parent[mate[to]] != NONE) {
                    let cur = lca(v, to, &base, &mate, &parent, &mut on_path);
                    in_blossom.iter_mut().for_each(|x| *x = false);
                    mark_path(v, cur, to, &base, &mate, &mut parent, &mut in_blossom);
                    mark_path(to, cur, v, &base, &mate, &mut parent, &mut in_blossom);
                    for i in 0..n {
                        if in_blossom[base[i]] {
                            base[i] = cur;
                            if !used[i] {
                                used[i] = true;
                                queue.push_back(i);
                            }
                        }
                    }
                } else if parent[to] == NONE {
                    parent[to] = v;
                    if mate[to] == NONE {
                        end = to;
                        break 'search;
                    }
                    let next = mate[to];
                    used[next] = true;
                    queue.push_back(next);
                }
            }
        }
        let mut v = end;
        while v != NONE {
            let pv = parent[v];
            let ppv = mate[pv];
            mate[v] = pv;
            mate[pv] = v;
            v = ppv;
        }
    }
    mate.into_iter().map(|m| (m != NONE).then_some(VertexId(m))).collect()
}

/// Splits a `k`-regular digraph into regular factors of the requested
/// degrees plus a leftover factor holding everything else.
///
/// Each unit of degree is one perfect matching of the bipartite graph
/// tails × heads, found by augmenting paths in adjacency order.
pub fn split_regular(d: &Digraph, k: usize, parts: &[usize]) -> Result<Vec<Subgraph>, PreprocessError> {
    if d.regular_degree() != Some(k) && !(d.vertex_count() == 0) {
        return Err(PreprocessError::NotKRegular { k });
    }
    let sum: usize = parts.iter().sum();
    if sum > k {
        return Err(PreprocessError::PartsExceedDegree { sum, k });
    }
    let mut remaining = vec![true; d.edge_count()];
    let mut out = Vec::with_capacity(parts.len() + 1);
    for &p in parts {
        let mut taken = vec![false; d.edge_count()];
        for _ in 0..p {
            for e in bipartite_perfect_matching(d, &remaining)? {
                remaining[e.0] = false;
                taken[e.0] = true;
            }
        }
        out.push(subgraph(d, &taken));
    }
    out.push(subgraph(d, &remaining));
    Ok(out)
}

fn subgraph(d: &Digraph, keep: &[bool]) -> Subgraph {
    let origin: Vec<EdgeId> = (0..d.edge_count()).filter(|&i| keep[i]).map(EdgeId).collect();
    let edges = origin.iter().map(|&e| d.endpoints(e)).collect();
    Subgraph { graph: Digraph::new(d.vertex_count(), edges).expect("subgraph of valid digraph"), origin }
}

/// One out-edge per vertex covering every head once, using only edges flagged
/// in `allowed`.
fn bipartite_perfect_matching(d: &Digraph, allowed: &[bool]) -> Result<Vec<EdgeId>, PreprocessError> {
    let n = d.vertex_count();
    let mut match_head: Vec<Option<EdgeId>> = vec![None; n];
    let mut matched_tail = vec![false; n];

    for t in d.vertices() {
        if let Some(&e) = d.out_edges(t).iter().find(|&&e| allowed[e.0] && match_head[d.head(e).0].is_none()) {
            match_head[d.head(e).0] = Some(e);
            matched_tail[t.0] = true;
        }
    }

    let mut stamp = vec![usize::MAX; n];
    for root in d.vertices() {
        if matched_tail[root.0] {
            continue;
        }
        // Iterative Kuhn augmenting-path search.
        stamp[root.0] = root.0;
        let mut stack: Vec<(VertexId, usize)> = vec![(root, 0)];
        let mut via: Vec<EdgeId> = Vec::new();
        let mut augmented = false;
        'dfs: while let Some(&mut (u, ref mut pos)) = stack.last_mut() {
            let outs = d.out_edges(u);
            while *pos < outs.len() {
                let e = outs[*pos];
                *pos += 1;
                if !allowed[e.0] {
                    continue;
                }
                let h = d.head(e);
                match match_head[h.0] {
                    None => {
                        via.push(e);
                        for &pe in &via {
                            match_head[d.head(pe).0] = Some(pe);
                        }
                        augmented = true;
                        break 'dfs;
                    }
                    Some(prev) => {
                        let next = d.tail(prev);
                        if stamp[next.0] != root.0 {
                            stamp[next.0] = root.0;
                            via.push(e);
                            stack.push((next, 0));
                            continue 'dfs;
                        }
                    }
                }
            }
            stack.pop();
            via.pop();
        }
        if !augmented {
            return Err(PreprocessError::BipartiteMatchingMissing);
        }
        matched_tail[root.0] = true;
    }
    let mut edges: Vec<EdgeId> = match_head.into_iter().map(|e| e.expect("perfect")).collect();
    edges.sort_unstable();
    Ok(edges)
}

/// Full preprocessing: optional matching removal, Eulerian orientation and
/// the `[d', d', rest]` split.
pub fn pre_process(g: &UndirectedGraph, params: &SplitParams) -> Result<SplitResult, PreprocessError> {
    let d = g.regular_degree().ok_or(PreprocessError::NotRegular)?;
    if d < params.min_degree {
        return Err(PreprocessError::DegreeTooSmall { d, min: params.min_degree });
    }
    let host = if d % 2 == 1 {
        if g.vertex_count() % 2 == 1 {
            return Err(PreprocessError::OddVertexCount { n: g.vertex_count(), d });
        }
        let (_, rest) = extract_perfect_matching(g)?;
        eulerian_orient(&rest)?
    } else {
        eulerian_orient(g)?
    };
    let k = d / 2;
    let d_prime = params.d_prime.unwrap_or(k / 10);
    if d_prime == 0 {
        return Err(PreprocessError::DPrimeZero { k });
    }
    if 2 * d_prime >= k {
        return Err(PreprocessError::DPrimeTooLarge { d_prime, k });
    }
    let mut parts = split_regular(&host, k, &[d_prime, d_prime])?.into_iter();
    let g1 = parts.next().unwrap();
    let g2 = parts.next().unwrap();
    let g3 = parts.next().unwrap();
    Ok(SplitResult { host, k, d_prime, g1, g2, g3 })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cycle(n: usize) -> UndirectedGraph {
        let pairs: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        UndirectedGraph::from_pairs(n, &pairs).unwrap()
    }

    fn complete(n: usize) -> UndirectedGraph {
        let mut pairs = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                pairs.push((i, j));
            }
        }
        UndirectedGraph::from_pairs(n, &pairs).unwrap()
    }

    #[test]
    fn four_cycle_orients_to_directed_cycle() {
        let d = eulerian_orient(&cycle(4)).unwrap();
        assert_eq!(d.regular_degree(), Some(1));
    }

    #[test]
    fn k5_orientation_is_balanced() {
        let d = eulerian_orient(&complete(5)).unwrap();
        assert_eq!(d.regular_degree(), Some(2));
        assert_eq!(d.edge_count(), 10);
    }

    #[test]
    fn path_graph_is_rejected() {
        let p3 = UndirectedGraph::from_pairs(3, &[(0, 1), (1, 2)]).unwrap();
        assert_eq!(eulerian_orient(&p3), Err(PreprocessError::OddDegree(VertexId(0))));
    }

    #[test]
    fn disconnected_is_rejected() {
        let g = UndirectedGraph::from_pairs(6, &[(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3)]).unwrap();
        assert_eq!(eulerian_orient(&g), Err(PreprocessError::Disconnected));
    }

    #[test]
    fn single_edge_matching() {
        let g = UndirectedGraph::from_pairs(2, &[(0, 1)]).unwrap();
        let (m, rest) = extract_perfect_matching(&g).unwrap();
        assert_eq!(m, vec![EdgeId(0)]);
        assert_eq!(rest.edge_count(), 0);
    }

    #[test]
    fn k4_matching_leaves_four_cycle() {
        let (m, rest) = extract_perfect_matching(&complete(4)).unwrap();
        assert_eq!(m.len(), 2);
        assert_eq!(rest.regular_degree(), Some(2));
        assert!(rest.is_connected());
    }

    #[test]
    fn blossom_needed_matching() {
        // Two triangles joined by an edge: greedy can go wrong, blossom fixes it.
        let g = UndirectedGraph::from_pairs(6, &[(0, 1), (1, 2), (2, 0), (2, 3), (3, 4), (4, 5), (5, 3)]).unwrap();
        let (m, _) = extract_perfect_matching(&g).unwrap();
        assert_eq!(m.len(), 3);
        let mut covered = [false; 6];
        for e in m {
            let (u, v) = g.endpoints(e);
            assert!(!covered[u.0] && !covered[v.0]);
            covered[u.0] = true;
            covered[v.0] = true;
        }
    }

    #[test]
    fn odd_cycle_has_no_perfect_matching() {
        assert_eq!(extract_perfect_matching(&cycle(5)).unwrap_err(), PreprocessError::NoPerfectMatching);
    }

    #[test]
    fn triangle_single_part() {
        let d = Digraph::from_pairs(3, &[(0, 1), (1, 2), (2, 0)]).unwrap();
        let parts = split_regular(&d, 1, &[1]).unwrap();
        assert_eq!(parts[0].origin, vec![EdgeId(0), EdgeId(1), EdgeId(2)]);
        assert_eq!(parts[1].graph.edge_count(), 0);
    }

    #[test]
    fn two_hamilton_cycles_split_into_factors() {
        // 0→1→2→3→4→5→0 and 0→2→4→1→5→3→0.
        let pairs = [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 0), (0, 2), (2, 4), (4, 1), (1, 5), (5, 3), (3, 0)];
        let d = Digraph::from_pairs(6, &pairs).unwrap();
        let parts = split_regular(&d, 2, &[1, 1]).unwrap();
        let mut seen = [false; 12];
        for p in &parts[..2] {
            assert_eq!(p.graph.regular_degree(), Some(1));
            for &e in &p.origin {
                assert!(!seen[e.0]);
                seen[e.0] = true;
            }
        }
        assert!(seen.iter().all(|&s| s));
        assert_eq!(parts[2].graph.edge_count(), 0);
    }

    #[test]
    fn parts_exceeding_degree_rejected() {
        let d = Digraph::from_pairs(3, &[(0, 1), (1, 2), (2, 0)]).unwrap();
        assert_eq!(split_regular(&d, 1, &[1, 1]).unwrap_err(), PreprocessError::PartsExceedDegree { sum: 2, k: 1 });
    }

    #[test]
    fn eight_regular_gives_zero_d_prime() {
        // Circulant C_16(1,2,3,4) is 8-regular and connected.
        let mut pairs = Vec::new();
        for i in 0..16 {
            for s in 1..=4 {
                pairs.push((i, (i + s) % 16));
            }
        }
        let g = UndirectedGraph::from_pairs(16, &pairs).unwrap();
        let params = SplitParams { min_degree: 0, d_prime: None };
        assert_eq!(pre_process(&g, &params).unwrap_err(), PreprocessError::DPrimeZero { k: 4 });
    }

    #[test]
    fn strict_minimum_degree_enforced() {
        assert_eq!(
            pre_process(&complete(5), &SplitParams::default()).unwrap_err(),
            PreprocessError::DegreeTooSmall { d: 4, min: 201 }
        );
    }
}
