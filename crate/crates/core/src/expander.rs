//! Test expanders, expansion checks, spectral estimates and profile derivation.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::{Digraph, UndirectedGraph, VertexId};
use crate::oracle::{ConstantsProfile, Threshold};
use crate::router::{ceil_log2, RouterProfile};

const GEN_ATTEMPTS: usize = 200;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ExpanderError {
    #[error("n·d must be even (n={n}, d={d})")]
    OddDegreeSum { n: usize, d: usize },
    #[error("degree {d} must be below n={n}")]
    DegreeTooLarge { n: usize, d: usize },
    #[error("retry budget exhausted after {0} attempts")]
    RetryBudgetExhausted(usize),
    #[error("enumeration needs {needed} subsets, budget {budget}")]
    BudgetExceeded { needed: u128, budget: u128 },
    #[error("graph is not regular")]
    NotRegular,
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
    #[error("d'={d_prime} from k={k}")]
    DPrimeZero { d_prime: usize, k: usize },
}

/// Random simple `d`-regular graph: stubs are paired uniformly, loops and
/// parallel pairs are sent back to the pool, and a stuck pool restarts.
pub fn gen_random_regular_graph(n: usize, d: usize, seed: u64) -> Result<UndirectedGraph, ExpanderError> {
    if !(n * d).is_multiple_of(2) {
        return Err(ExpanderError::OddDegreeSum { n, d });
    }
    if d >= n && !(n == 0 && d == 0) {
        return Err(ExpanderError::DegreeTooLarge { n, d });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..GEN_ATTEMPTS {
        if let Some(edges) = try_pairing(n, d, &mut rng) {
            return Ok(UndirectedGraph::new(n, edges).expect("generated endpoints in range"));
        }
    }
    Err(ExpanderError::RetryBudgetExhausted(GEN_ATTEMPTS))
}

fn try_pairing(n: usize, d: usize, rng: &mut ChaCha8Rng) -> Option<Vec<(VertexId, VertexId)>> {
    let mut present = BTreeSet::new();
    let mut edges = Vec::with_capacity(n * d / 2);
    let mut stubs: Vec<usize> = (0..n).flat_map(|v| core::iter::repeat_n(v, d)).collect();
    while !stubs.is_empty() {
        stubs.shuffle(rng);
        let mut leftover: BTreeMap<usize, usize> = BTreeMap::new();
        for pair in stubs.chunks_exact(2) {
            let (u, v) = (pair[0].min(pair[1]), pair[0].max(pair[1]));
            if u != v && present.insert((u, v)) {
                edges.push((VertexId(u), VertexId(v)));
            } else {
                *leftover.entry(u).or_default() += 1;
                *leftover.entry(v).or_default() += 1;
            }
        }
        if !leftover.is_empty() && !pool_can_progress(&leftover, &present) {
            return None;
        }
        stubs = leftover.iter().flat_map(|(&v, &c)| core::iter::repeat_n(v, c)).collect();
    }
    Some(edges)
}

fn pool_can_progress(pool: &BTreeMap<usize, usize>, present: &BTreeSet<(usize, usize)>) -> bool {
    let vs: Vec<usize> = pool.keys().copied().collect();
    vs.iter().enumerate().any(|(i, &u)| vs[i + 1..].iter().any(|&v| !present.contains(&(u, v))))
}

/// Union of `d` random permutations without fixed points or repeated arcs.
/// Conflicts left by a shuffle are repaired by random transpositions.
pub fn gen_random_regular_digraph(n: usize, d: usize, seed: u64) -> Result<Digraph, ExpanderError> {
    if d >= n && !(n == 0 && d == 0) {
        return Err(ExpanderError::DegreeTooLarge { n, d });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    'attempt: for _ in 0..GEN_ATTEMPTS {
        let mut succ: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
        let mut perms: Vec<Vec<usize>> = Vec::with_capacity(d);
        for _ in 0..d {
            let mut p: Vec<usize> = (0..n).collect();
            p.shuffle(&mut rng);
            let ok = |v: usize, w: usize, succ: &[BTreeSet<usize>]| v != w && !succ[v].contains(&w);
            let mut sweeps = 0;
            loop {
                let bad: Vec<usize> = (0..n).filter(|&v| !ok(v, p[v], &succ)).collect();
                if bad.is_empty() {
                    break;
                }
                sweeps += 1;
                if sweeps > 50 {
                    continue 'attempt;
                }
                for v in bad {
                    for _ in 0..4 * n {
                        let u = rng.gen_range(0..n);
                        if ok(v, p[u], &succ) && ok(u, p[v], &succ) {
                            p.swap(u, v);
                            break;
                        }
                    }
                }
            }
            for v in 0..n {
                succ[v].insert(p[v]);
            }
            perms.push(p);
        }
        let mut arcs = Vec::with_capacity(n * d);
        for p in &perms {
            arcs.extend(p.iter().enumerate().map(|(v, &w)| (VertexId(v), VertexId(w))));
        }
        return Ok(Digraph::new(n, arcs).expect("generated endpoints in range"));
    }
    Err(ExpanderError::RetryBudgetExhausted(GEN_ATTEMPTS))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum CheckMode {
    Exhaustive,
    Sampled,
    Spectral,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ExpansionReport {
    pub holds: bool,
    pub witness: Option<Vec<VertexId>>,
    pub max_subset_checked: usize,
    pub mode: CheckMode,
}

/// Edge bound a set of `size` vertices may span: `γ·d·|S|` up to `β·n`,
/// `d·|S|/3` above.
pub fn expansion_bound(n: usize, d: usize, beta: f64, gamma: f64, size: usize) -> f64 {
    if size as f64 <= beta * n as f64 {
        gamma * d as f64 * size as f64
    } else {
        d as f64 * size as f64 / 3.0
    }
}

/// `true` when `edges_within(s)` exceeds its expansion bound.
pub fn violates(g: &UndirectedGraph, beta: f64, gamma: f64, s: &[VertexId]) -> bool {
    let d = g.regular_degree().unwrap_or(0);
    g.edges_within(s) as f64 > expansion_bound(g.vertex_count(), d, beta, gamma, s.len())
}

fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k.min(n));
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul((n - i) as u128) / (i as u128 + 1);
    }
    acc
}

pub const DEFAULT_SUBSET_BUDGET: u128 = 50_000_000;

/// Checks every subset with at most `min(max_subset_size, n/2)` vertices, in
/// size order then lexicographic order, and stops at the first violation.
pub fn check_expansion_exhaustive(
    g: &UndirectedGraph,
    beta: f64,
    gamma: f64,
    max_subset_size: usize,
    budget: u128,
) -> Result<ExpansionReport, ExpanderError> {
    let d = g.regular_degree().ok_or(ExpanderError::NotRegular)?;
    let n = g.vertex_count();
    let top = max_subset_size.min(n / 2);
    let needed: u128 = (1..=top).map(|s| binomial(n, s)).fold(0u128, |a, b| a.saturating_add(b));
    if needed > budget {
        return Err(ExpanderError::BudgetExceeded { needed, budget });
    }
    // Adjacency multiplicities for incremental e(S).
    let mut adj = vec![vec![0u32; n]; n];
    for &(u, v) in g.edges() {
        adj[u.0][v.0] += 1;
        if u != v {
            adj[v.0][u.0] += 1;
        }
    }
    for size in 1..=top {
        let bound = expansion_bound(n, d, beta, gamma, size);
        let mut idx: Vec<usize> = (0..size).collect();
        loop {
            let mut within = 0u64;
            for (i, &u) in idx.iter().enumerate() {
                within += u64::from(adj[u][u]);
                for &v in &idx[i + 1..] {
                    within += u64::from(adj[u][v]);
                }
            }
            if within as f64 > bound {
                return Ok(ExpansionReport {
                    holds: false,
                    witness: Some(idx.iter().map(|&i| VertexId(i)).collect()),
                    max_subset_checked: size,
                    mode: CheckMode::Exhaustive,
                });
            }
            // Next combination.
            let mut i = size;
            while i > 0 && idx[i - 1] == n - size + i - 1 {
                i -= 1;
            }
            if i == 0 {
                break;
            }
            idx[i - 1] += 1;
            for j in i..size {
                idx[j] = idx[j - 1] + 1;
            }
        }
    }
    Ok(ExpansionReport { holds: true, witness: None, max_subset_checked: top, mode: CheckMode::Exhaustive })
}

/// Probes `samples` sets: BFS balls and greedy dense-growth sets from random
/// seeds, with random target sizes up to `n/2`. Only refutes; `holds` means
/// nothing violating was found.
pub fn check_expansion_sampled(
    g: &UndirectedGraph,
    beta: f64,
    gamma: f64,
    samples: usize,
    seed: u64,
) -> Result<ExpansionReport, ExpanderError> {
    let d = g.regular_degree().ok_or(ExpanderError::NotRegular)?;
    let n = g.vertex_count();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut largest = 0;
    if n < 2 {
        return Ok(ExpansionReport { holds: true, witness: None, max_subset_checked: 0, mode: CheckMode::Sampled });
    }
    for i in 0..samples {
        let target = rng.gen_range(1..=n / 2);
        let root = rng.gen_range(0..n);
        let mut in_set = vec![false; n];
        let mut set = vec![VertexId(root)];
        in_set[root] = true;
        if i % 2 == 0 {
            // Breadth-first ball.
            let mut head = 0;
            while set.len() < target && head < set.len() {
                let u = set[head];
                head += 1;
                for &e in g.incident(u) {
                    let w = g.other(e, u);
                    if set.len() < target && !in_set[w.0] {
                        in_set[w.0] = true;
                        set.push(w);
                    }
                }
            }
        } else {
            // Greedy: repeatedly add the outside vertex with most edges into the set.
            let mut gain = vec![0usize; n];
            for &e in g.incident(VertexId(root)) {
                gain[g.other(e, VertexId(root)).0] += 1;
            }
            while set.len() < target {
                let best = (0..n).filter(|&v| !in_set[v]).max_by_key(|&v| (gain[v], core::cmp::Reverse(v)));
                let Some(b) = best else { break };
                in_set[b] = true;
                set.push(VertexId(b));
                for &e in g.incident(VertexId(b)) {
                    gain[g.other(e, VertexId(b)).0] += 1;
                }
            }
        }
        largest = largest.max(set.len());
        let within = g.edges_within(&set) as f64;
        if within > expansion_bound(n, d, beta, gamma, set.len()) {
            set.sort_unstable();
            return Ok(ExpansionReport {
                holds: false,
                witness: Some(set),
                max_subset_checked: largest,
                mode: CheckMode::Sampled,
            });
        }
    }
    Ok(ExpansionReport { holds: true, witness: None, max_subset_checked: largest, mode: CheckMode::Sampled })
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SpectralReport {
    /// Largest absolute value among the non-trivial eigenvalues.
    pub lambda_estimate: f64,
    /// Largest non-trivial eigenvalue, signed.
    pub second_largest: f64,
    pub iterations: usize,
    /// Worse of the two eigen-residuals.
    pub residual: f64,
    pub converged: bool,
    pub certified_gamma: Option<f64>,
    pub certified_beta: Option<f64>,
}

impl SpectralReport {
    /// Smallest `γ` with `β·d + λ ≤ 2·γ·d`, provided large sets also pass
    /// (`λ ≤ d/6`) and the estimate converged.
    pub fn certify(&self, d: usize, beta: f64) -> Option<f64> {
        let d = d as f64;
        if !self.converged || self.lambda_estimate > d / 6.0 {
            return None;
        }
        Some((beta * d + self.lambda_estimate) / (2.0 * d))
    }

    pub fn with_certification(mut self, d: usize, beta: f64) -> Self {
        self.certified_gamma = self.certify(d, beta);
        self.certified_beta = self.certified_gamma.map(|_| beta);
        self
    }

    /// `Spectral`-mode expansion verdict for `(β, γ)`.
    pub fn expansion_report(&self, d: usize, beta: f64, gamma: f64) -> ExpansionReport {
        let holds = self.certify(d, beta).is_some_and(|g| g <= gamma);
        ExpansionReport { holds, witness: None, max_subset_checked: 0, mode: CheckMode::Spectral }
    }
}

struct Operator<'a> {
    adj: Vec<Vec<usize>>,
    _g: core::marker::PhantomData<&'a ()>,
}

impl Operator<'_> {
    fn new(g: &UndirectedGraph) -> Self {
        let n = g.vertex_count();
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in g.edges() {
            adj[u.0].push(v.0);
            if u != v {
                adj[v.0].push(u.0);
            } else {
                adj[u.0].push(u.0);
            }
        }
        Operator { adj, _g: core::marker::PhantomData }
    }

    fn apply(&self, x: &[f64], out: &mut [f64]) {
        for (o, nb) in out.iter_mut().zip(&self.adj) {
            *o = nb.iter().map(|&j| x[j]).sum();
        }
    }
}

fn deflate(x: &mut [f64]) {
    let mean = x.iter().sum::<f64>() / x.len() as f64;
    for v in x.iter_mut() {
        *v -= mean;
    }
}

fn norm(x: &[f64]) -> f64 {
    libm::sqrt(x.iter().map(|v| v * v).sum())
}

/// Power iteration for the dominant eigenpair of `apply` restricted to the
/// complement of the all-ones vector. Returns (eigenvalue, iterations, residual).
fn dominant(n: usize, max_iters: usize, tol: f64, seed: u64, apply: &dyn Fn(&[f64], &mut [f64])) -> (f64, usize, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    deflate(&mut x);
    let nx = norm(&x);
    x.iter_mut().for_each(|v| *v /= nx);
    let mut y = vec![0.0; n];
    let (mut mu, mut residual) = (0.0, f64::INFINITY);
    for it in 1..=max_iters {
        apply(&x, &mut y);
        deflate(&mut y);
        mu = x.iter().zip(&y).map(|(a, b)| a * b).sum();
        residual = libm::sqrt(y.iter().zip(&x).map(|(a, b)| (a - mu * b) * (a - mu * b)).sum());
        if residual <= tol {
            return (mu, it, residual);
        }
        let ny = norm(&y);
        if ny == 0.0 {
            return (0.0, it, 0.0);
        }
        for (a, b) in x.iter_mut().zip(&y) {
            *a = b / ny;
        }
    }
    (mu, max_iters, residual)
}

/// Estimates the non-trivial spectrum edge of a regular graph's adjacency
/// matrix by deflated power iteration: `A²` for the largest absolute value,
/// `A + d·I` for the largest signed value.
pub fn estimate_second_eigenvalue(g: &UndirectedGraph, max_iters: usize, tol: f64) -> Result<SpectralReport, ExpanderError> {
    let d = g.regular_degree().ok_or(ExpanderError::NotRegular)?;
    let n = g.vertex_count();
    if n < 2 {
        return Err(ExpanderError::InvalidParameter("spectrum needs at least two vertices"));
    }
    let op = Operator::new(g);
    let squared = |x: &[f64], out: &mut [f64]| {
        let mut tmp = vec![0.0; x.len()];
        op.apply(x, &mut tmp);
        op.apply(&tmp, out);
    };
    let shifted = |x: &[f64], out: &mut [f64]| {
        op.apply(x, out);
        for (o, v) in out.iter_mut().zip(x) {
            *o += d as f64 * v;
        }
    };
    // The squared operator's tolerance is scaled so the root inherits `tol`.
    let (mu_sq, it_sq, res_sq) = dominant(n, max_iters, tol * (2.0 * d as f64).max(1.0), 0x5eed, &squared);
    let (mu_sh, it_sh, res_sh) = dominant(n, max_iters, tol, 0x5eed + 1, &shifted);
    let lambda = libm::sqrt(mu_sq.max(0.0));
    let res_abs = if lambda > 0.0 { res_sq / (2.0 * lambda).max(1.0) } else { res_sq };
    let residual = res_abs.max(res_sh);
    let converged = res_sq <= tol * (2.0 * d as f64).max(1.0) && res_sh <= tol;
    Ok(SpectralReport {
        lambda_estimate: lambda,
        second_largest: mu_sh - d as f64,
        iterations: it_sq.max(it_sh),
        residual,
        converged,
        certified_gamma: None,
        certified_beta: None,
    })
}

fn check_unit(x: f64, what: &'static str) -> Result<(), ExpanderError> {
    if x > 0.0 && x < 1.0 {
        Ok(())
    } else {
        Err(ExpanderError::InvalidParameter(what))
    }
}

/// Profile with every derived field computed from `(n, d, β, γ)`.
pub fn derive_profile(n: usize, d: usize, beta: f64, gamma: f64, relaxed: bool) -> Result<RouterProfile, ExpanderError> {
    check_unit(beta, "beta must lie in (0, 1)")?;
    check_unit(gamma, "gamma must lie in (0, 1)")?;
    let k = d / 2;
    let d_prime = k / 10;
    if d_prime == 0 {
        return Err(ExpanderError::DPrimeZero { d_prime, k });
    }
    if !relaxed {
        if gamma >= 1.0 / 1000.0 {
            return Err(ExpanderError::InvalidParameter("strict profiles need gamma < 1/1000"));
        }
        if d <= 200 {
            return Err(ExpanderError::InvalidParameter("strict profiles need d > 200"));
        }
        if d >= n {
            return Err(ExpanderError::DegreeTooLarge { n, d });
        }
    }
    let c = beta / 1200.0;
    let depth_cap = ceil_log2(n);
    let oracle = ConstantsProfile::for_host(n, d_prime, beta, 20.0 * gamma);
    let g3_path_cap = libm::ceil(300.0 / beta) as usize + 1;
    let mut p = RouterProfile {
        n,
        d,
        k,
        beta,
        gamma,
        relaxed: relaxed || oracle.relaxed,
        min_degree: if relaxed { 0 } else { 201 },
        d_prime,
        c,
        depth_cap,
        bfs_vertex_cap: libm::ceil(beta * n as f64 / 5.0) as usize,
        bfs_edge_cap: libm::floor(c * n as f64 * k as f64 / 2.0) as usize,
        fanout: d_prime / 4,
        endpoint_cap: d_prime.div_ceil(20).max(1),
        r: 0,
        g3_path_cap,
        path_len_cap: 2 * depth_cap + g3_path_cap,
        oracle: ConstantsProfile { relaxed: relaxed || oracle.relaxed, ..oracle },
    };
    p.r = r_for_depth(&p, depth_cap);
    Ok(p)
}

fn r_for_depth(p: &RouterProfile, depth: usize) -> usize {
    let nk = p.n as f64 * p.k as f64;
    let first = libm::floor(p.c * nk / (2.0 * depth.max(1) as f64));
    let second = libm::floor(p.beta * p.beta * nk / 15000.0);
    first.min(second) as usize
}

/// [`derive_profile`] with the BFS depth budget taken from a spectral bound:
/// `⌈ln n / ln(c0·d²/λ²)⌉`, and `r` rescaled to it.
pub fn derive_profile_spectral(
    n: usize,
    d: usize,
    beta: f64,
    gamma: f64,
    relaxed: bool,
    lambda: f64,
    c0: f64,
) -> Result<RouterProfile, ExpanderError> {
    let mut p = derive_profile(n, d, beta, gamma, relaxed)?;
    let growth = c0 * (d as f64) * (d as f64) / (lambda * lambda);
    if growth.is_nan() || growth <= 1.0 {
        return Err(ExpanderError::InvalidParameter("c0·d²/λ² must exceed 1"));
    }
    let depth = libm::ceil(libm::log(n as f64) / libm::log(growth)).max(1.0) as usize;
    p.depth_cap = depth;
    p.path_len_cap = 2 * depth + p.g3_path_cap;
    p.r = r_for_depth(&p, depth);
    Ok(p)
}

/// Relaxed profile for random regular graphs of a few hundred vertices and
/// moderate degree (tuned at `d = 30`, `n ∈ {600, 1200}`).
///
/// The oracle hosts get degree `⌊2k/5⌋` instead of `⌊k/10⌋`, leaving
/// `k - 2d'` for `G3`. Thresholds: `out_cap = d'-1`, `in_cap = ⌊d'/2⌋`,
/// saturation at `in_cap`, Low at `d'-1` saturated out-neighbours.
pub fn desk_profile(n: usize, d: usize) -> RouterProfile {
    let k = d / 2;
    let d_prime = (2 * k / 5).max(4);
    let beta = 0.25;
    let in_cap = d_prime / 2;
    let oracle = ConstantsProfile {
        beta,
        gamma: 0.5,
        d: d_prime,
        out_cap: d_prime - 1,
        in_cap,
        sat_threshold: Threshold::new(in_cap as u64, 1),
        low_threshold: Threshold::new(d_prime as u64 - 1, 1),
        capacity: n * d_prime,
        relaxed: true,
    };
    let depth_cap = ceil_log2(n);
    let g3_path_cap = libm::ceil(300.0 / beta) as usize + 1;
    RouterProfile {
        n,
        d,
        k,
        beta,
        gamma: 0.5,
        relaxed: true,
        min_degree: 0,
        d_prime,
        c: 1.0,
        depth_cap,
        bfs_vertex_cap: libm::ceil(beta * n as f64 / 5.0) as usize,
        bfs_edge_cap: n * d_prime,
        fanout: 2,
        endpoint_cap: 1,
        r: n / 4,
        g3_path_cap,
        path_len_cap: 2 * depth_cap + g3_path_cap,
        oracle,
    }
}
