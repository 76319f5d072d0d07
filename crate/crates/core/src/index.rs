//! Index construction: label propagation in reverse topological order with
//! per-node (local) or whole-index (global) interval budgets, seed-set
//! labels, and the full build pipeline from an arbitrary directed graph to a
//! queryable index.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, VecDeque};

use thiserror::Error;

use crate::cover::{greedy_k_cover, merge_interval_sets, optimal_k_cover, Interval, LabelSet};
use crate::graph::{
    augment_root, condense, topological_levels, topological_order, CycleError, Graph, IdMap,
    LoadedGraph, NodeId, SccMapping, TopoLevel, TopoOrder,
};
use crate::labeling::{assign_post_order, tree_cover, PostOrder, TreeCoverError};

/// Maximum number of seed nodes; seed reachability is stored in one 64-bit
/// mask per node.
pub const MAX_SEEDS: u32 = 64;

#[derive(Debug, Error)]
pub enum BuildError {
    #[error("invalid parameter: {0}")]
    InvalidParams(&'static str),
    #[error("condensed graph is not acyclic: {0}")]
    Cycle(#[from] CycleError),
    #[error("tree cover failed: {0}")]
    TreeCover(#[from] TreeCoverError),
    #[error("inconsistent index parts: {0}")]
    Inconsistent(&'static str),
}

/// Which budget the interval labels must satisfy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BudgetMode {
    /// Every node label has at most `k` intervals.
    Local,
    /// The label sizes sum to at most `k · n` over the whole index.
    Global,
}

/// Which algorithm computes the k-interval covers during the build.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoverAlgo {
    Greedy,
    Dp,
}

impl CoverAlgo {
    fn apply(self, s: &LabelSet, k: u32) -> LabelSet {
        match self {
            CoverAlgo::Greedy => greedy_k_cover(s, k),
            CoverAlgo::Dp => optimal_k_cover(s, k),
        }
    }
}

/// Build parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IndexParams {
    /// Interval budget per node (local) or per-node average (global).
    pub k: u32,
    pub mode: BudgetMode,
    /// Global-mode slack: nodes may temporarily keep up to `c·k` intervals.
    pub c: u32,
    /// Number of seed nodes (at most [`MAX_SEEDS`]).
    pub seeds: u32,
    pub cover: CoverAlgo,
}

impl Default for IndexParams {
    fn default() -> Self {
        IndexParams { k: 5, mode: BudgetMode::Local, c: 4, seeds: 32, cover: CoverAlgo::Greedy }
    }
}

impl IndexParams {
    fn validate(&self) -> Result<(), BuildError> {
        if self.k < 1 {
            return Err(BuildError::InvalidParams("budget k must be >= 1"));
        }
        if self.c < 1 {
            return Err(BuildError::InvalidParams("slack factor c must be >= 1"));
        }
        if self.seeds > MAX_SEEDS {
            return Err(BuildError::InvalidParams("at most 64 seed nodes are supported"));
        }
        Ok(())
    }
}

fn merged_label(g: &Graph, post: &PostOrder, labels: &[LabelSet], v: NodeId) -> LabelSet {
    let (lo, hi) = post.tree_interval(v);
    let mut acc = LabelSet::single(Interval::exact(lo, hi));
    for &w in g.successors(v) {
        acc = merge_interval_sets(&acc, &labels[w as usize]);
    }
    acc
}

/// Per-node label construction with a local budget: nodes are visited in
/// reverse topological order, each label starts as the node's exact tree
/// interval, absorbs every successor's final label, and is then covered to
/// at most `k` intervals.
pub fn build_ferrari_local(
    g: &Graph,
    post: &PostOrder,
    tau: &TopoOrder,
    k: u32,
    cover: CoverAlgo,
) -> Vec<LabelSet> {
    let n = g.node_count();
    let mut labels = vec![LabelSet::default(); n];
    let mut done = vec![false; n];
    for &v in tau.nodes_by_rank().iter().rev() {
        debug_assert!(g.successors(v).iter().all(|&w| done[w as usize]));
        let mut acc = merged_label(g, post, &labels, v);
        if acc.len() > k as usize {
            acc = cover.apply(&acc, k);
        }
        labels[v as usize] = acc;
        done[v as usize] = true;
    }
    assert!(labels.iter().all(|l| l.len() <= k as usize));
    labels
}

/// Global-budget variant with deferred interval merging: each node is first
/// covered to at most `c·k` intervals; nodes still over `k` go on a min-heap
/// keyed by out-degree (ties by id). Whenever the running interval total
/// exceeds `B = k·n`, minimum-degree nodes are popped and re-covered to at
/// most `k` until the total fits again.
///
/// Shrinking a node after its label was already propagated upward only
/// coarsens that label, so completeness is unaffected and no re-propagation
/// happens.
pub fn build_ferrari_global(
    g: &Graph,
    post: &PostOrder,
    tau: &TopoOrder,
    k: u32,
    c: u32,
    cover: CoverAlgo,
) -> Vec<LabelSet> {
    let n = g.node_count();
    let budget = k as u64 * n as u64;
    let slack = k.saturating_mul(c);
    let mut labels = vec![LabelSet::default(); n];
    let mut done = vec![false; n];
    let mut heap: BinaryHeap<Reverse<(u32, NodeId)>> = BinaryHeap::new();
    let mut total = 0u64;

    for &v in tau.nodes_by_rank().iter().rev() {
        debug_assert!(g.successors(v).iter().all(|&w| done[w as usize]));
        let mut acc = merged_label(g, post, &labels, v);
        if acc.len() > slack as usize {
            acc = cover.apply(&acc, slack);
        }
        total += acc.len() as u64;
        if acc.len() > k as usize {
            heap.push(Reverse((g.out_degree(v) as u32, v)));
        }
        labels[v as usize] = acc;
        done[v as usize] = true;

        while total > budget {
            let Reverse((_, w)) = heap.pop().expect("interval total over budget with empty heap");
            let old = labels[w as usize].len();
            if old <= k as usize {
                continue; // already shrunk; re-cover would be a no-op
            }
            labels[w as usize] = cover.apply(&labels[w as usize], k);
            total -= (old - labels[w as usize].len()) as u64;
        }
    }
    assert!(labels.iter().map(|l| l.len() as u64).sum::<u64>() <= budget);
    assert!(labels.iter().all(|l| l.len() <= slack as usize));
    labels
}

/// Per-node bitmasks over the seed list: bit `i` of `s_plus(v)` says `v`
/// reaches `seeds[i]`; bit `i` of `s_minus(v)` says `seeds[i]` reaches `v`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeedSets {
    pub seeds: Vec<NodeId>,
    s_plus: Vec<u64>,
    s_minus: Vec<u64>,
}

impl SeedSets {
    pub fn empty(n: usize) -> SeedSets {
        SeedSets { seeds: Vec::new(), s_plus: vec![0; n], s_minus: vec![0; n] }
    }

    pub fn from_parts(seeds: Vec<NodeId>, s_plus: Vec<u64>, s_minus: Vec<u64>) -> SeedSets {
        SeedSets { seeds, s_plus, s_minus }
    }

    pub fn seed_count(&self) -> usize {
        self.seeds.len()
    }

    pub fn s_plus(&self, v: NodeId) -> u64 {
        self.s_plus[v as usize]
    }

    pub fn s_minus(&self, v: NodeId) -> u64 {
        self.s_minus[v as usize]
    }

    pub fn plus_masks(&self) -> &[u64] {
        &self.s_plus
    }

    pub fn minus_masks(&self) -> &[u64] {
        &self.s_minus
    }
}

/// Picks up to `s` seed nodes: highest (in + out) degree first, minimum
/// degree 1, ties by ascending node id. The virtual root is excluded.
pub fn select_seeds(g: &Graph, s: u32, exclude: Option<NodeId>) -> Vec<NodeId> {
    let mut candidates: Vec<NodeId> = (0..g.node_count() as NodeId)
        .filter(|&v| Some(v) != exclude && g.in_degree(v) + g.out_degree(v) >= 1)
        .collect();
    candidates.sort_by_key(|&v| (Reverse(g.in_degree(v) + g.out_degree(v)), v));
    candidates.truncate(s as usize);
    candidates
}

/// Propagates seed membership along the graph with the FIFO procedure:
/// `s_plus` flows from the leaves backward over in-edges, `s_minus` from the
/// roots forward over out-edges.
pub fn propagate_seed_sets(g: &Graph, seeds: &[NodeId]) -> SeedSets {
    assert!(seeds.len() as u32 <= MAX_SEEDS);
    let n = g.node_count();
    let mut sets = SeedSets::empty(n);
    sets.seeds = seeds.to_vec();
    for (bit, &sigma) in seeds.iter().enumerate() {
        sets.s_plus[sigma as usize] |= 1 << bit;
        sets.s_minus[sigma as usize] |= 1 << bit;
    }

    // backward pass: a node is dequeued once all successors are labeled
    let mut remaining: Vec<usize> = (0..n as NodeId).map(|v| g.out_degree(v)).collect();
    let mut queue: VecDeque<NodeId> =
        (0..n as NodeId).filter(|&v| remaining[v as usize] == 0).collect();
    while let Some(v) = queue.pop_front() {
        for &u in g.predecessors(v) {
            sets.s_plus[u as usize] |= sets.s_plus[v as usize];
            remaining[u as usize] -= 1;
            if remaining[u as usize] == 0 {
                queue.push_back(u);
            }
        }
    }

    // forward pass, starting from the roots
    let mut remaining: Vec<usize> = (0..n as NodeId).map(|v| g.in_degree(v)).collect();
    let mut queue: VecDeque<NodeId> =
        (0..n as NodeId).filter(|&v| remaining[v as usize] == 0).collect();
    while let Some(v) = queue.pop_front() {
        for &w in g.successors(v) {
            sets.s_minus[w as usize] |= sets.s_minus[v as usize];
            remaining[w as usize] -= 1;
            if remaining[w as usize] == 0 {
                queue.push_back(w);
            }
        }
    }
    sets
}

/// Seed selection plus propagation in one step.
pub fn compute_seed_sets(g: &Graph, s: u32, exclude: Option<NodeId>) -> SeedSets {
    propagate_seed_sets(g, &select_seeds(g, s, exclude))
}

/// The complete reachability index: the augmented condensed DAG plus all
/// per-node metadata. Immutable after construction; any number of threads
/// may query it concurrently, each with its own scratch.
#[derive(Debug, Clone, PartialEq)]
pub struct ReachIndex {
    graph: Graph,
    scc: SccMapping,
    ids: IdMap,
    orig_edge_count: usize,
    tau: TopoOrder,
    level: TopoLevel,
    pi: Vec<u32>,
    labels: Vec<LabelSet>,
    seeds: SeedSets,
    params: IndexParams,
}

impl ReachIndex {
    /// Augmented condensed DAG the labels live on. The virtual root is the
    /// last node.
    pub fn dag(&self) -> &Graph {
        &self.graph
    }

    pub fn virtual_root(&self) -> NodeId {
        (self.graph.node_count() - 1) as NodeId
    }

    pub fn scc(&self) -> &SccMapping {
        &self.scc
    }

    pub fn ids(&self) -> &IdMap {
        &self.ids
    }

    pub fn original_node_count(&self) -> usize {
        self.ids.len()
    }

    pub fn original_edge_count(&self) -> usize {
        self.orig_edge_count
    }

    pub fn tau(&self) -> &TopoOrder {
        &self.tau
    }

    pub fn level(&self) -> &TopoLevel {
        &self.level
    }

    pub fn pi(&self) -> &[u32] {
        &self.pi
    }

    pub fn label(&self, v: NodeId) -> &LabelSet {
        &self.labels[v as usize]
    }

    pub fn labels(&self) -> &[LabelSet] {
        &self.labels
    }

    pub fn seeds(&self) -> &SeedSets {
        &self.seeds
    }

    pub fn params(&self) -> &IndexParams {
        &self.params
    }

    /// Total number of stored intervals.
    pub fn interval_count(&self) -> u64 {
        self.labels.iter().map(|l| l.len() as u64).sum()
    }

    /// Maps an external id to its component in the DAG.
    pub fn component_of_external(&self, ext: u64) -> Option<NodeId> {
        self.ids.to_internal(ext).map(|v| self.scc.comp_of[v as usize])
    }

    /// Reassembles an index from its serialized parts.
    #[allow(clippy::too_many_arguments)]
    pub fn from_parts(
        graph: Graph,
        scc: SccMapping,
        ids: IdMap,
        orig_edge_count: usize,
        tau: TopoOrder,
        level: TopoLevel,
        pi: Vec<u32>,
        labels: Vec<LabelSet>,
        seeds: SeedSets,
        params: IndexParams,
    ) -> Result<ReachIndex, BuildError> {
        let n = graph.node_count();
        if n != scc.comp_count() + 1 {
            return Err(BuildError::Inconsistent("component count does not match DAG"));
        }
        if ids.len() != scc.comp_of.len() {
            return Err(BuildError::Inconsistent("id map does not match component map"));
        }
        if tau.tau.len() != n
            || level.level.len() != n
            || pi.len() != n
            || labels.len() != n
            || seeds.s_plus.len() != n
            || seeds.s_minus.len() != n
        {
            return Err(BuildError::Inconsistent("per-node table has wrong length"));
        }
        Ok(ReachIndex { graph, scc, ids, orig_edge_count, tau, level, pi, labels, seeds, params })
    }
}

/// Runs the full pipeline: condense, augment, order, tree cover, post-order,
/// label propagation under the requested budget, seed sets.
pub fn build_index(input: &LoadedGraph, params: IndexParams) -> Result<ReachIndex, BuildError> {
    params.validate()?;
    let (condensed, scc) = condense(&input.graph);
    let dag = augment_root(&condensed);
    let root = (dag.node_count() - 1) as NodeId;

    let tau = topological_order(&dag)?;
    let level = topological_levels(&dag);
    let tree = tree_cover(&dag, &tau)?;
    let post = assign_post_order(&tree);

    let labels = match params.mode {
        BudgetMode::Local => build_ferrari_local(&dag, &post, &tau, params.k, params.cover),
        BudgetMode::Global => {
            build_ferrari_global(&dag, &post, &tau, params.k, params.c, params.cover)
        }
    };
    let seeds = compute_seed_sets(&dag, params.seeds, Some(root));

    Ok(ReachIndex {
        graph: dag,
        scc,
        ids: input.ids.clone(),
        orig_edge_count: input.graph.edge_count(),
        tau,
        level,
        pi: post.pi,
        labels,
        seeds,
        params,
    })
}
