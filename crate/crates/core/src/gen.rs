//! Seeded random graph generators for benchmarks and correctness sweeps.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::{Graph, NodeId};

/// Random directed graph with up to `m` edges (duplicates and self-loops are
/// dropped, so the realized edge count may be slightly lower). Deterministic
/// for a fixed seed.
pub fn random_digraph(n: usize, m: usize, seed: u64) -> Graph {
    assert!(n >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let edges = (0..m).map(|_| (rng.gen_range(0..n) as NodeId, rng.gen_range(0..n) as NodeId));
    Graph::from_edges(n, edges.collect::<Vec<_>>())
}

/// Random DAG: edges are oriented from the smaller to the larger id, so node
/// ids form a topological order.
pub fn random_dag(n: usize, m: usize, seed: u64) -> Graph {
    assert!(n >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let edges = (0..m)
        .map(|_| {
            let a = rng.gen_range(0..n);
            let b = rng.gen_range(0..n);
            (a.min(b) as NodeId, a.max(b) as NodeId)
        })
        .collect::<Vec<_>>();
    Graph::from_edges(n, edges)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::topological_order;

    #[test]
    fn generators_are_deterministic() {
        assert_eq!(random_digraph(50, 120, 3), random_digraph(50, 120, 3));
        assert_eq!(random_dag(50, 120, 3), random_dag(50, 120, 3));
        assert_ne!(random_dag(50, 120, 3), random_dag(50, 120, 4));
    }

    #[test]
    fn random_dag_is_acyclic() {
        for seed in 0..5 {
            let g = random_dag(200, 600, seed);
            assert!(topological_order(&g).is_ok());
        }
    }
}
