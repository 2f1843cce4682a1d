use exroute_core::expander::{estimate_second_eigenvalue, gen_random_regular_graph};
use exroute_core::UndirectedGraph;
use nalgebra::{DMatrix, SymmetricEigen};

const TOL: f64 = 1e-7;
const ITERS: usize = 200_000;

/// Dense eigenvalues of the adjacency matrix, descending.
fn dense_spectrum(g: &UndirectedGraph) -> Vec<f64> {
    let n = g.vertex_count();
    let mut a = DMatrix::<f64>::zeros(n, n);
    for &(u, v) in g.edges() {
        a[(u.0, v.0)] += 1.0;
        if u != v {
            a[(v.0, u.0)] += 1.0;
        }
    }
    let mut ev: Vec<f64> = SymmetricEigen::new(a).eigenvalues.iter().copied().collect();
    ev.sort_by(|x, y| y.total_cmp(x));
    ev
}

/// `(max |λ_i|, λ_2)` over the non-trivial eigenvalues of a connected regular graph.
fn dense_oracle(g: &UndirectedGraph) -> (f64, f64) {
    let ev = dense_spectrum(g);
    let rest = &ev[1..];
    (rest.iter().fold(0.0f64, |m, x| m.max(x.abs())), rest[0])
}

fn complete(n: usize) -> UndirectedGraph {
    let pairs: Vec<_> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    UndirectedGraph::from_pairs(n, &pairs).unwrap()
}

fn cycle(n: usize) -> UndirectedGraph {
    let pairs: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
    UndirectedGraph::from_pairs(n, &pairs).unwrap()
}

#[test]
fn complete_graph_on_five() {
    let r = estimate_second_eigenvalue(&complete(5), ITERS, TOL).unwrap();
    assert!((r.lambda_estimate - 1.0).abs() < 1e-6, "{r:?}");
    assert!((r.second_largest + 1.0).abs() < 1e-6, "{r:?}");
    let (abs, signed) = dense_oracle(&complete(5));
    assert!((abs - 1.0).abs() < 1e-12 && (signed + 1.0).abs() < 1e-12);
}

#[test]
fn cycle_on_eight() {
    let g = cycle(8);
    let r = estimate_second_eigenvalue(&g, ITERS, TOL).unwrap();
    let (abs, signed) = dense_oracle(&g);
    assert!((signed - 2f64.sqrt()).abs() < 1e-12);
    assert!((r.second_largest - signed).abs() < 1e-6, "{r:?} vs {signed}");
    // Bipartite: -2 is in the spectrum.
    assert!((abs - 2.0).abs() < 1e-12);
    assert!((r.lambda_estimate - abs).abs() < 1e-6, "{r:?} vs {abs}");
}

#[test]
fn random_regular_graphs_match_dense_solver() {
    let cases = [(300, 12), (400, 10), (200, 8), (100, 6), (50, 4)];
    for i in 0..20u64 {
        let (n, d) = cases[i as usize % cases.len()];
        let g = gen_random_regular_graph(n, d, 100 + i).unwrap();
        let r = estimate_second_eigenvalue(&g, ITERS, TOL).unwrap();
        let (abs, signed) = dense_oracle(&g);
        assert!(r.converged, "n={n} d={d}: {r:?}");
        assert!((r.lambda_estimate - abs).abs() <= 10.0 * TOL, "n={n} d={d}: {} vs {abs}", r.lambda_estimate);
        assert!((r.second_largest - signed).abs() <= 10.0 * TOL, "n={n} d={d}: {} vs {signed}", r.second_largest);
    }
}
