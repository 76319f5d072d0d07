//! A reachability index for directed graphs with an explicit size budget.
//!
//! Every node of the condensed, root-augmented input graph is labeled with a
//! small sorted set of post-order id intervals, each flagged exact (no false
//! positives) or approximate. Queries probe the source label: a miss is a
//! definite no, an exact hit a definite yes, and only approximate hits fall
//! back to a guided DFS that is further pruned by seed-reachability masks,
//! topological ranks and topological levels.
//!
//! The interval budget comes in two flavors: `Local` caps every node label
//! at `k` intervals, `Global` caps the sum over all labels at `k·n`,
//! shrinking low-out-degree labels lazily only once the total overflows.
//!
//! ```
//! use ferrari_core::{build_index, IndexParams, QueryContext};
//! use ferrari_core::graph::load_edge_list;
//!
//! let graph = load_edge_list(&b"0 1\n1 2\n"[..]).unwrap();
//! let index = build_index(&graph, IndexParams::default()).unwrap();
//! let mut ctx = QueryContext::new(&index);
//! assert_eq!(ctx.query(0, 2).unwrap().0, true);
//! assert_eq!(ctx.query(2, 0).unwrap().0, false);
//! ```

pub mod cover;
pub mod gen;
pub mod graph;
pub mod index;
pub mod labeling;
pub mod query;

pub use cover::{greedy_k_cover, merge_interval_sets, optimal_k_cover, GapSet, Interval, LabelSet};
pub use graph::{
    augment_root, condense, load_edge_list, topological_levels, topological_order, Graph, IdMap,
    LoadedGraph, NodeId, SccMapping, TopoLevel, TopoOrder,
};
pub use index::{
    build_ferrari_global, build_ferrari_local, build_index, compute_seed_sets, BudgetMode,
    BuildError, CoverAlgo, IndexParams, ReachIndex, SeedSets,
};
pub use labeling::{assign_post_order, tree_cover, PostOrder, TreeCover};
pub use query::{
    bfs_oracle, dfs_baseline, interval_lookup, transitive_closure, LookupOutcome, QueryContext,
    QueryError, QueryStats,
};
