//! Query processing: sorted-interval lookup on the source label, seed and
//! topological filters, and pruned recursive expansion when only approximate
//! information is available. Also home to the plain-traversal oracles used
//! for verification and baseline comparison.

use thiserror::Error;

use crate::cover::LabelSet;
use crate::graph::{Graph, NodeId};
use crate::index::ReachIndex;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum QueryError {
    #[error("unknown node id {0}")]
    UnknownId(u64),
}

/// Result of probing a label set with a target id.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LookupOutcome {
    /// The id lies in no interval: definitely not reachable.
    Outside,
    /// The id lies in an exact interval: definitely reachable.
    ExactHit,
    /// The id lies in an approximate interval: must expand recursively.
    ApproxHit,
}

/// Binary search for the target id over the sorted intervals of a label.
pub fn interval_lookup(label: &LabelSet, id: u32) -> LookupOutcome {
    let ivs = label.intervals();
    let pos = ivs.partition_point(|iv| iv.begin <= id);
    if pos == 0 {
        return LookupOutcome::Outside;
    }
    let iv = &ivs[pos - 1];
    if id > iv.end {
        LookupOutcome::Outside
    } else if iv.exact {
        LookupOutcome::ExactHit
    } else {
        LookupOutcome::ApproxHit
    }
}

/// Per-query counters.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct QueryStats {
    /// Nodes whose successors were walked after an approximate hit.
    pub expanded: u64,
    /// Interval binary searches performed.
    pub probes: u64,
    pub pruned_tau: u64,
    pub pruned_level: u64,
    pub pruned_seed: u64,
    pub pruned_interval: u64,
    pub answer: bool,
}

/// What happened at a node during a traced query.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    /// A seed reachable from this node reaches the target.
    SeedPositive,
    /// Some seed reaches this node but not the target.
    SeedNegative,
    /// The target reaches a seed this node does not reach.
    SeedForwardNegative,
    PrunedTau,
    PrunedLevel,
    PrunedOutside,
    ExactHit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QueryEvent {
    pub node: NodeId,
    pub kind: EventKind,
}

trait EventSink {
    fn record(&mut self, node: NodeId, kind: EventKind);
}

struct NoSink;

impl EventSink for NoSink {
    #[inline(always)]
    fn record(&mut self, _: NodeId, _: EventKind) {}
}

impl EventSink for Vec<QueryEvent> {
    fn record(&mut self, node: NodeId, kind: EventKind) {
        self.push(QueryEvent { node, kind });
    }
}

/// Read-only query handle over a shared index, owning the per-thread scratch
/// (DFS stack plus an epoch-stamped visited array, so nothing is cleared
/// between queries).
pub struct QueryContext<'a> {
    idx: &'a ReachIndex,
    stamp: Vec<u64>,
    epoch: u64,
    stack: Vec<NodeId>,
    /// Also prune when the target reaches a seed the current node does not
    /// (the mirror image of the backward seed rule). Sound either way.
    pub use_forward_seed_rule: bool,
}

impl<'a> QueryContext<'a> {
    pub fn new(idx: &'a ReachIndex) -> QueryContext<'a> {
        QueryContext {
            idx,
            stamp: vec![0; idx.dag().node_count()],
            epoch: 0,
            stack: Vec::new(),
            use_forward_seed_rule: true,
        }
    }

    pub fn index(&self) -> &'a ReachIndex {
        self.idx
    }

    /// Answers whether the original graph contains a directed path between
    /// the two external ids.
    pub fn query(&mut self, src: u64, dst: u64) -> Result<(bool, QueryStats), QueryError> {
        self.run(src, dst, &mut NoSink)
    }

    /// Like [`Self::query`], additionally appending one event per filter
    /// decision so prune soundness can be checked against an oracle.
    pub fn query_traced(
        &mut self,
        src: u64,
        dst: u64,
        events: &mut Vec<QueryEvent>,
    ) -> Result<(bool, QueryStats), QueryError> {
        self.run(src, dst, events)
    }

    fn run<S: EventSink>(
        &mut self,
        src: u64,
        dst: u64,
        sink: &mut S,
    ) -> Result<(bool, QueryStats), QueryError> {
        let ids = self.idx.ids();
        let u = ids.to_internal(src).ok_or(QueryError::UnknownId(src))?;
        let v = ids.to_internal(dst).ok_or(QueryError::UnknownId(dst))?;
        let mut stats = QueryStats::default();

        let su = self.idx.scc().comp_of[u as usize];
        let sv = self.idx.scc().comp_of[v as usize];
        if su == sv {
            stats.answer = true;
            return Ok((true, stats));
        }
        stats.answer = self.search(su, sv, &mut stats, sink);
        Ok((stats.answer, stats))
    }

    /// Guided DFS over the condensed DAG from `su`, looking for `sv`.
    fn search<S: EventSink>(
        &mut self,
        su: NodeId,
        sv: NodeId,
        stats: &mut QueryStats,
        sink: &mut S,
    ) -> bool {
        let idx = self.idx;
        let seeds = idx.seeds();
        let target_minus = seeds.s_minus(sv);
        let target_plus = seeds.s_plus(sv);
        let target_pi = idx.pi()[sv as usize];
        let target_tau = idx.tau().rank(sv);
        let target_level = idx.level().of(sv);

        self.epoch += 1;
        self.stack.clear();
        self.stack.push(su);
        self.stamp[su as usize] = self.epoch;

        while let Some(x) = self.stack.pop() {
            if x == sv {
                return true;
            }
            let plus = seeds.s_plus(x);
            if plus & target_minus != 0 {
                sink.record(x, EventKind::SeedPositive);
                return true;
            }
            if seeds.s_minus(x) & !target_minus != 0 {
                stats.pruned_seed += 1;
                sink.record(x, EventKind::SeedNegative);
                continue;
            }
            if self.use_forward_seed_rule && target_plus & !plus != 0 {
                stats.pruned_seed += 1;
                sink.record(x, EventKind::SeedForwardNegative);
                continue;
            }
            if idx.tau().rank(x) >= target_tau {
                stats.pruned_tau += 1;
                sink.record(x, EventKind::PrunedTau);
                continue;
            }
            if idx.level().of(x) >= target_level {
                stats.pruned_level += 1;
                sink.record(x, EventKind::PrunedLevel);
                continue;
            }
            stats.probes += 1;
            match interval_lookup(idx.label(x), target_pi) {
                LookupOutcome::Outside => {
                    stats.pruned_interval += 1;
                    sink.record(x, EventKind::PrunedOutside);
                }
                LookupOutcome::ExactHit => {
                    sink.record(x, EventKind::ExactHit);
                    return true;
                }
                LookupOutcome::ApproxHit => {
                    stats.expanded += 1;
                    for &w in idx.dag().successors(x) {
                        if self.stamp[w as usize] != self.epoch {
                            self.stamp[w as usize] = self.epoch;
                            self.stack.push(w);
                        }
                    }
                }
            }
        }
        false
    }
}

/// Ground-truth reachability by breadth-first search, with the number of
/// dequeued nodes for baseline comparisons.
pub fn bfs_oracle(g: &Graph, src: NodeId, dst: NodeId) -> (bool, usize) {
    let mut visited = vec![false; g.node_count()];
    let mut queue = std::collections::VecDeque::new();
    visited[src as usize] = true;
    queue.push_back(src);
    let mut dequeued = 0usize;
    while let Some(x) = queue.pop_front() {
        dequeued += 1;
        if x == dst {
            return (true, dequeued);
        }
        for &w in g.successors(x) {
            if !visited[w as usize] {
                visited[w as usize] = true;
                queue.push_back(w);
            }
        }
    }
    (false, dequeued)
}

/// Unindexed depth-first traversal, same contract as [`bfs_oracle`].
pub fn dfs_baseline(g: &Graph, src: NodeId, dst: NodeId) -> (bool, usize) {
    let mut visited = vec![false; g.node_count()];
    let mut stack = vec![src];
    visited[src as usize] = true;
    let mut popped = 0usize;
    while let Some(x) = stack.pop() {
        popped += 1;
        if x == dst {
            return (true, popped);
        }
        for &w in g.successors(x) {
            if !visited[w as usize] {
                visited[w as usize] = true;
                stack.push(w);
            }
        }
    }
    (false, popped)
}

/// Dense all-pairs reachability matrix, one BFS per source. Intended for
/// verification on small graphs; quadratic memory.
pub struct Closure {
    n: usize,
    words: usize,
    bits: Vec<u64>,
}

impl Closure {
    pub fn reaches(&self, u: NodeId, v: NodeId) -> bool {
        debug_assert!((u as usize) < self.n && (v as usize) < self.n);
        let row = u as usize * self.words;
        self.bits[row + (v as usize >> 6)] >> (v & 63) & 1 == 1
    }
}

pub fn transitive_closure(g: &Graph) -> Closure {
    let n = g.node_count();
    let words = n.div_ceil(64);
    let mut bits = vec![0u64; n * words];
    let mut queue = std::collections::VecDeque::new();
    for u in 0..n as NodeId {
        let row = u as usize * words;
        bits[row + (u as usize >> 6)] |= 1 << (u & 63);
        queue.push_back(u);
        while let Some(x) = queue.pop_front() {
            for &w in g.successors(x) {
                let slot = row + (w as usize >> 6);
                if bits[slot] >> (w & 63) & 1 == 0 {
                    bits[slot] |= 1 << (w & 63);
                    queue.push_back(w);
                }
            }
        }
    }
    Closure { n, words, bits }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cover::Interval;
    use crate::graph::{
        augment_root, topological_levels, topological_order, Graph, IdMap, LoadedGraph, SccMapping,
    };
    use crate::index::{
        build_ferrari_local, build_index, propagate_seed_sets, CoverAlgo, IndexParams, ReachIndex,
        SeedSets,
    };
    use crate::labeling::{assign_post_order, TreeCover};

    fn set(ivs: &[(u32, u32, bool)]) -> LabelSet {
        LabelSet::from_intervals(
            ivs.iter().map(|&(b, e, x)| Interval { begin: b, end: e, exact: x }).collect(),
        )
    }

    #[test]
    fn lookup_against_two_singletons() {
        let label = set(&[(1, 1, true), (3, 3, true)]);
        assert_eq!(interval_lookup(&label, 2), LookupOutcome::Outside);
        assert_eq!(interval_lookup(&label, 1), LookupOutcome::ExactHit);
        assert_eq!(interval_lookup(&label, 4), LookupOutcome::Outside);
        assert_eq!(interval_lookup(&label, 0), LookupOutcome::Outside);
    }

    #[test]
    fn lookup_in_approximate_interval() {
        assert_eq!(interval_lookup(&set(&[(1, 3, false)]), 2), LookupOutcome::ApproxHit);
    }

    // a=0, b=1, c=2, d=3, e=4
    fn diamond() -> Graph {
        Graph::from_edges(5, [(0, 2), (0, 3), (1, 2), (1, 3), (2, 4), (3, 4)])
    }

    /// Index over the diamond built on the lexicographic DFS tree, so the
    /// labels match the hand-computed propagation values. Seeds optional.
    fn diamond_index(k: u32, with_seed_e: bool) -> ReachIndex {
        let dag = augment_root(&diamond());
        let tau = topological_order(&dag).unwrap();
        let level = topological_levels(&dag);
        let tree = TreeCover::from_parents(vec![Some(5), Some(5), Some(0), Some(0), Some(2), None])
            .unwrap();
        let post = assign_post_order(&tree);
        let labels = build_ferrari_local(&dag, &post, &tau, k, CoverAlgo::Dp);
        let seeds = if with_seed_e {
            propagate_seed_sets(&dag, &[4])
        } else {
            SeedSets::empty(dag.node_count())
        };
        let params = IndexParams { k, seeds: u32::from(with_seed_e), ..IndexParams::default() };
        ReachIndex::from_parts(
            dag,
            SccMapping::from_comp_of((0..5).collect()),
            IdMap::identity(5),
            6,
            tau,
            level,
            post.pi,
            labels,
            seeds,
            params,
        )
        .unwrap()
    }

    #[test]
    fn exact_hit_at_source_answers_without_expansion() {
        let idx = diamond_index(2, false);
        let mut ctx = QueryContext::new(&idx);
        let (ans, stats) = ctx.query(3, 4).unwrap(); // d → e
        assert!(ans);
        assert_eq!(stats.expanded, 0);
        assert_eq!(stats.probes, 1);
    }

    #[test]
    fn negative_answer_at_source_without_expansion() {
        let idx = diamond_index(2, false);
        let mut ctx = QueryContext::new(&idx);
        let (ans, stats) = ctx.query(3, 2).unwrap(); // d → c
        assert!(!ans);
        assert_eq!(stats.expanded, 0);
    }

    #[test]
    fn approximate_hit_expands_to_the_target() {
        let idx = diamond_index(1, false);
        assert_eq!(idx.label(1), &set(&[(1, 5, false)])); // b
        let mut ctx = QueryContext::new(&idx);
        let (ans, stats) = ctx.query(1, 4).unwrap(); // b → e
        assert!(ans);
        assert!(stats.expanded >= 1);
        assert!(stats.probes >= 2);
    }

    #[test]
    fn seed_shortcut_skips_the_probe() {
        let idx = diamond_index(2, true); // seed = e
        let mut ctx = QueryContext::new(&idx);
        let (ans, stats) = ctx.query(0, 4).unwrap(); // a → e
        assert!(ans);
        assert_eq!(stats.probes, 0);
        assert_eq!(stats.expanded, 0);
    }

    #[test]
    fn level_filter_prunes_same_level_nodes() {
        let idx = diamond_index(2, false);
        let mut ctx = QueryContext::new(&idx);
        let (ans, stats) = ctx.query(2, 3).unwrap(); // c → d, λ equal
        assert!(!ans);
        assert_eq!(stats.pruned_tau + stats.pruned_level, 1);
        assert_eq!(stats.probes, 0);
    }

    #[test]
    fn interval_filter_prunes_disjoint_branch() {
        // two chains under the root: 0→1→2 and 3→4→5
        let g = Graph::from_edges(6, [(0, 1), (1, 2), (3, 4), (4, 5)]);
        let loaded = LoadedGraph { graph: g, ids: IdMap::identity(6) };
        let idx = build_index(&loaded, IndexParams { seeds: 0, ..IndexParams::default() }).unwrap();
        let mut ctx = QueryContext::new(&idx);
        let (ans, stats) = ctx.query(0, 5).unwrap();
        assert!(!ans);
        assert_eq!(stats.pruned_interval, 1);
        assert_eq!(stats.probes, 1);
    }

    #[test]
    fn same_component_answers_at_mapping_stage() {
        let g = Graph::from_edges(3, [(0, 1), (1, 2), (2, 0)]);
        let loaded = LoadedGraph { graph: g, ids: IdMap::identity(3) };
        let idx = build_index(&loaded, IndexParams::default()).unwrap();
        let mut ctx = QueryContext::new(&idx);
        let (ans, stats) = ctx.query(2, 1).unwrap();
        assert!(ans);
        assert_eq!(stats.probes, 0);
        assert_eq!(stats.expanded, 0);
    }

    #[test]
    fn unknown_external_id_is_an_error() {
        let idx = diamond_index(2, false);
        let mut ctx = QueryContext::new(&idx);
        assert_eq!(ctx.query(0, 99).unwrap_err(), QueryError::UnknownId(99));
        assert_eq!(ctx.query(99, 0).unwrap_err(), QueryError::UnknownId(99));
    }

    #[test]
    fn oracle_on_chain_and_diamond() {
        let chain = Graph::from_edges(3, [(0, 1), (1, 2)]);
        assert!(bfs_oracle(&chain, 0, 2).0);
        assert!(!bfs_oracle(&chain, 2, 0).0);
        assert!(dfs_baseline(&chain, 0, 2).0);

        let g = diamond();
        assert!(bfs_oracle(&g, 0, 4).0); // a → e
        assert!(!bfs_oracle(&g, 2, 3).0); // c → d
    }

    #[test]
    fn closure_matches_pairwise_oracle() {
        let g = diamond();
        let c = transitive_closure(&g);
        for u in 0..5 {
            for v in 0..5 {
                assert_eq!(c.reaches(u, v), bfs_oracle(&g, u, v).0);
            }
        }
    }

    #[test]
    fn repeated_queries_are_consistent() {
        let idx = diamond_index(1, false);
        let mut ctx = QueryContext::new(&idx);
        let first = ctx.query(1, 4).unwrap();
        for _ in 0..5 {
            assert_eq!(ctx.query(1, 4).unwrap(), first);
        }
    }
}
