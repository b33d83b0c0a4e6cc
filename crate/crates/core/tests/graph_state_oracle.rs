//! Graph-state entanglement on the (4,3) Lieb lattice against the cut-rank formula.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use fsmoc::lattice::{build_lieb_lattice, DoubledRect, Lattice};
use fsmoc::Tableau;

mod common;
use common::naive_rank;

fn graph_state(lat: &Lattice) -> (Tableau, Vec<(usize, usize)>) {
    let mut t = Tableau::new_plus(lat.nq());
    let mut edges = Vec::new();
    for e in lat.edges() {
        for &v in lat.edge_vertices(e) {
            t.apply_cz(v, e);
            edges.push((v, e));
        }
    }
    (t, edges)
}

/// Adjacency block between `a` and its complement.
fn cut_matrix(n: usize, edges: &[(usize, usize)], a: &[usize]) -> Vec<Vec<bool>> {
    let outside: Vec<usize> = (0..n).filter(|q| !a.contains(q)).collect();
    let mut m = vec![vec![false; outside.len()]; a.len()];
    for &(u, v) in edges {
        for (x, y) in [(u, v), (v, u)] {
            if let (Some(r), Some(c)) = (a.iter().position(|&q| q == x), outside.iter().position(|&q| q == y)) {
                m[r][c] ^= true;
            }
        }
    }
    m
}

#[test]
fn lieb_graph_state_entropies_equal_cut_rank() {
    let lat = build_lieb_lattice(4, 3).unwrap();
    let (t, edges) = graph_state(&lat);
    let n = lat.nq();
    let mut regions = Vec::new();
    for (sw, ne) in [((0, 0), (1, 1)), ((0, 0), (3, 0)), ((1, 0), (2, 2)), ((0, 0), (1, 2)), ((2, 1), (3, 2))] {
        regions.push(lat.qubits_in(DoubledRect::from_vertices(sw, ne)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..200 {
        let frac = rng.gen_range(0.05..0.95);
        regions.push((0..n).filter(|_| rng.gen_bool(frac)).collect());
    }
    for r in &regions {
        assert_eq!(t.entanglement_entropy(r).unwrap(), naive_rank(cut_matrix(n, &edges, r)), "region {r:?}");
    }
}
