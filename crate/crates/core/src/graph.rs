//! Directed graph representation and the structural preprocessing passes
//! every index build runs: edge-list ingestion, strongly-connected-component
//! condensation, virtual-root augmentation, topological ordering and
//! topological levels.
//!
//! Node ids are dense `u32` values `0..n`. Adjacency is stored in compressed
//! sparse row form, out- and in-neighbors both, sorted ascending. All types
//! are immutable once constructed.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::io::BufRead;

use thiserror::Error;

/// Internal node identifier (dense, `0..n`).
pub type NodeId = u32;

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("line {line}: expected \"SRC DST\", got {content:?}")]
    Malformed { line: usize, content: String },
    #[error("edge list contains no edges")]
    Empty,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Error)]
#[error("graph contains a cycle (node {node} never became ready)")]
pub struct CycleError {
    pub node: NodeId,
}

/// Immutable directed graph in CSR form, successors and predecessors both.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    out_offsets: Vec<usize>,
    out_targets: Vec<NodeId>,
    in_offsets: Vec<usize>,
    in_targets: Vec<NodeId>,
}

impl Graph {
    /// Builds a graph from an edge list. Self-loops and duplicate edges are
    /// dropped; they never affect reachability.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (NodeId, NodeId)>) -> Graph {
        let mut edges: Vec<(NodeId, NodeId)> = edges.into_iter().filter(|&(u, v)| u != v).collect();
        edges.sort_unstable();
        edges.dedup();
        for &(u, v) in &edges {
            assert!((u as usize) < n && (v as usize) < n, "edge endpoint out of range");
        }

        let mut out_offsets = vec![0usize; n + 1];
        let mut in_degree = vec![0usize; n];
        for &(u, v) in &edges {
            out_offsets[u as usize + 1] += 1;
            in_degree[v as usize] += 1;
        }
        for i in 0..n {
            out_offsets[i + 1] += out_offsets[i];
        }
        let out_targets: Vec<NodeId> = edges.iter().map(|&(_, v)| v).collect();

        let mut in_offsets = vec![0usize; n + 1];
        for v in 0..n {
            in_offsets[v + 1] = in_offsets[v] + in_degree[v];
        }
        let mut cursor = in_offsets.clone();
        let mut in_targets = vec![0 as NodeId; edges.len()];
        // edges are sorted by (u, v), so each in-list ends up sorted by source
        for &(u, v) in &edges {
            in_targets[cursor[v as usize]] = u;
            cursor[v as usize] += 1;
        }

        Graph { out_offsets, out_targets, in_offsets, in_targets }
    }

    pub fn node_count(&self) -> usize {
        self.out_offsets.len() - 1
    }

    pub fn edge_count(&self) -> usize {
        self.out_targets.len()
    }

    pub fn successors(&self, v: NodeId) -> &[NodeId] {
        &self.out_targets[self.out_offsets[v as usize]..self.out_offsets[v as usize + 1]]
    }

    pub fn predecessors(&self, v: NodeId) -> &[NodeId] {
        &self.in_targets[self.in_offsets[v as usize]..self.in_offsets[v as usize + 1]]
    }

    pub fn out_degree(&self, v: NodeId) -> usize {
        self.successors(v).len()
    }

    pub fn in_degree(&self, v: NodeId) -> usize {
        self.predecessors(v).len()
    }

    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        (0..self.node_count() as NodeId)
            .flat_map(move |u| self.successors(u).iter().map(move |&v| (u, v)))
    }

    /// Raw out-CSR view, used by the on-disk index format.
    pub fn out_csr(&self) -> (&[usize], &[NodeId]) {
        (&self.out_offsets, &self.out_targets)
    }

    /// Rebuilds a graph from a serialized out-CSR; the in-CSR is re-derived.
    pub fn from_out_csr(out_offsets: Vec<usize>, out_targets: Vec<NodeId>) -> Graph {
        let n = out_offsets.len() - 1;
        let edges: Vec<(NodeId, NodeId)> = (0..n as NodeId)
            .flat_map(|u| {
                out_targets[out_offsets[u as usize]..out_offsets[u as usize + 1]]
                    .iter()
                    .map(move |&v| (u, v))
            })
            .collect();
        Graph::from_edges(n, edges)
    }
}

/// Maps between arbitrary external node ids and dense internal ids.
///
/// Internal ids are the ranks of the sorted distinct external ids, so the
/// mapping is independent of edge order in the input file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdMap {
    ext: Vec<u64>,
}

impl IdMap {
    pub fn new(sorted_ext_ids: Vec<u64>) -> IdMap {
        debug_assert!(sorted_ext_ids.windows(2).all(|w| w[0] < w[1]));
        IdMap { ext: sorted_ext_ids }
    }

    /// Identity map for graphs constructed directly with internal ids.
    pub fn identity(n: usize) -> IdMap {
        IdMap { ext: (0..n as u64).collect() }
    }

    pub fn len(&self) -> usize {
        self.ext.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ext.is_empty()
    }

    pub fn to_internal(&self, ext: u64) -> Option<NodeId> {
        self.ext.binary_search(&ext).ok().map(|i| i as NodeId)
    }

    pub fn to_external(&self, v: NodeId) -> u64 {
        self.ext[v as usize]
    }

    pub fn external_ids(&self) -> &[u64] {
        &self.ext
    }
}

/// A graph together with its external-id table, as produced by the loader.
#[derive(Debug, Clone)]
pub struct LoadedGraph {
    pub graph: Graph,
    pub ids: IdMap,
}

/// Parses a whitespace-delimited edge list ("SRC DST" per line).
///
/// Lines starting with `#` or `%` and blank lines are ignored; LF and CRLF
/// both work. External ids may be arbitrary non-negative integers and are
/// remapped to dense internal ids by sorted rank.
pub fn load_edge_list<R: BufRead>(reader: R) -> Result<LoadedGraph, LoadError> {
    let mut ext_edges: Vec<(u64, u64)> = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with('%') {
            continue;
        }
        let mut it = line.split_whitespace();
        let parse = |tok: Option<&str>| -> Option<u64> { tok.and_then(|t| t.parse().ok()) };
        match (parse(it.next()), parse(it.next()), it.next()) {
            (Some(src), Some(dst), None) => ext_edges.push((src, dst)),
            _ => {
                return Err(LoadError::Malformed { line: idx + 1, content: line.to_string() });
            }
        }
    }
    if ext_edges.is_empty() {
        return Err(LoadError::Empty);
    }

    let mut ids: Vec<u64> = ext_edges.iter().flat_map(|&(u, v)| [u, v]).collect();
    ids.sort_unstable();
    ids.dedup();
    let map = IdMap::new(ids);

    let edges =
        ext_edges.iter().map(|&(u, v)| (map.to_internal(u).unwrap(), map.to_internal(v).unwrap()));
    let graph = Graph::from_edges(map.len(), edges);
    Ok(LoadedGraph { graph, ids: map })
}

/// Partition of the original nodes into strongly connected components.
///
/// Component ids are assigned by ascending minimum member id, so a graph that
/// is already acyclic condenses with the identity mapping.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SccMapping {
    pub comp_of: Vec<NodeId>,
    pub rep_of: Vec<NodeId>,
}

impl SccMapping {
    pub fn comp_count(&self) -> usize {
        self.rep_of.len()
    }

    /// Rebuilds the representative table (minimum member per component).
    pub fn from_comp_of(comp_of: Vec<NodeId>) -> SccMapping {
        let count = comp_of.iter().map(|&c| c as usize + 1).max().unwrap_or(0);
        let mut rep_of = vec![NodeId::MAX; count];
        for (v, &c) in comp_of.iter().enumerate() {
            rep_of[c as usize] = rep_of[c as usize].min(v as NodeId);
        }
        SccMapping { comp_of, rep_of }
    }
}

/// Collapses strongly connected components, yielding the condensed DAG.
///
/// Uses an iterative Tarjan; recursion would overflow on long chains.
pub fn condense(g: &Graph) -> (Graph, SccMapping) {
    let n = g.node_count();
    const UNVISITED: u32 = u32::MAX;

    let mut index = vec![UNVISITED; n];
    let mut lowlink = vec![0u32; n];
    let mut on_stack = vec![false; n];
    let mut comp_raw = vec![UNVISITED; n];
    let mut stack: Vec<NodeId> = Vec::new();
    let mut next_index = 0u32;
    let mut comp_count = 0u32;

    // Emulated call stack: (node, next successor position to examine).
    let mut call: Vec<(NodeId, usize)> = Vec::new();

    for root in 0..n as NodeId {
        if index[root as usize] != UNVISITED {
            continue;
        }
        call.push((root, 0));
        index[root as usize] = next_index;
        lowlink[root as usize] = next_index;
        next_index += 1;
        stack.push(root);
        on_stack[root as usize] = true;

        while let Some(&mut (v, ref mut pos)) = call.last_mut() {
            if let Some(&w) = g.successors(v).get(*pos) {
                *pos += 1;
                if index[w as usize] == UNVISITED {
                    index[w as usize] = next_index;
                    lowlink[w as usize] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack[w as usize] = true;
                    call.push((w, 0));
                } else if on_stack[w as usize] {
                    lowlink[v as usize] = lowlink[v as usize].min(index[w as usize]);
                }
            } else {
                call.pop();
                if let Some(&(p, _)) = call.last() {
                    lowlink[p as usize] = lowlink[p as usize].min(lowlink[v as usize]);
                }
                if lowlink[v as usize] == index[v as usize] {
                    loop {
                        let w = stack.pop().expect("tarjan stack underflow");
                        on_stack[w as usize] = false;
                        comp_raw[w as usize] = comp_count;
                        if w == v {
                            break;
                        }
                    }
                    comp_count += 1;
                }
            }
        }
    }

    // Renumber components by ascending minimum member id.
    let mut min_member = vec![NodeId::MAX; comp_count as usize];
    for (v, &c) in comp_raw.iter().enumerate() {
        min_member[c as usize] = min_member[c as usize].min(v as NodeId);
    }
    let mut order: Vec<u32> = (0..comp_count).collect();
    order.sort_unstable_by_key(|&c| min_member[c as usize]);
    let mut renumber = vec![0u32; comp_count as usize];
    for (new_id, &raw) in order.iter().enumerate() {
        renumber[raw as usize] = new_id as u32;
    }

    let comp_of: Vec<NodeId> = comp_raw.iter().map(|&c| renumber[c as usize]).collect();
    let mapping = SccMapping::from_comp_of(comp_of);

    let edges = g
        .edges()
        .map(|(u, v)| (mapping.comp_of[u as usize], mapping.comp_of[v as usize]))
        .filter(|&(cu, cv)| cu != cv);
    let condensed = Graph::from_edges(comp_count as usize, edges);
    (condensed, mapping)
}

/// Adds a virtual root with an edge to every node that has no predecessor.
///
/// The root always gets id `n` (the new last node). Reachability among the
/// pre-existing nodes is unchanged.
pub fn augment_root(g: &Graph) -> Graph {
    let n = g.node_count();
    let root = n as NodeId;
    let mut edges: Vec<(NodeId, NodeId)> = g.edges().collect();
    for v in 0..n as NodeId {
        if g.in_degree(v) == 0 {
            edges.push((root, v));
        }
    }
    Graph::from_edges(n + 1, edges)
}

/// Topological ranks, 1-based: `tau[v] ∈ 1..=n` and `tau[u] < tau[v]` for
/// every edge `(u, v)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TopoOrder {
    pub tau: Vec<u32>,
}

impl TopoOrder {
    pub fn rank(&self, v: NodeId) -> u32 {
        self.tau[v as usize]
    }

    /// Nodes sorted by ascending rank (inverse permutation of `tau`).
    pub fn nodes_by_rank(&self) -> Vec<NodeId> {
        let mut order = vec![0 as NodeId; self.tau.len()];
        for (v, &r) in self.tau.iter().enumerate() {
            order[(r - 1) as usize] = v as NodeId;
        }
        order
    }
}

/// Kahn's algorithm with a min-id priority queue over ready nodes, so the
/// order is deterministic and reproducible across runs.
pub fn topological_order(g: &Graph) -> Result<TopoOrder, CycleError> {
    let n = g.node_count();
    let mut in_deg: Vec<usize> = (0..n as NodeId).map(|v| g.in_degree(v)).collect();
    let mut ready: BinaryHeap<Reverse<NodeId>> =
        (0..n as NodeId).filter(|&v| in_deg[v as usize] == 0).map(Reverse).collect();

    let mut tau = vec![0u32; n];
    let mut next_rank = 1u32;
    while let Some(Reverse(v)) = ready.pop() {
        tau[v as usize] = next_rank;
        next_rank += 1;
        for &w in g.successors(v) {
            in_deg[w as usize] -= 1;
            if in_deg[w as usize] == 0 {
                ready.push(Reverse(w));
            }
        }
    }

    if let Some(v) = tau.iter().position(|&r| r == 0) {
        return Err(CycleError { node: v as NodeId });
    }
    Ok(TopoOrder { tau })
}

/// Longest-path depth from the sources: 0 for nodes without predecessors,
/// otherwise `1 + max` over predecessors. Strict on edges, so
/// `level(s) >= level(t)` proves `s` cannot reach `t`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TopoLevel {
    pub level: Vec<u32>,
}

impl TopoLevel {
    pub fn of(&self, v: NodeId) -> u32 {
        self.level[v as usize]
    }
}

pub fn topological_levels(g: &Graph) -> TopoLevel {
    let n = g.node_count();
    let mut in_deg: Vec<usize> = (0..n as NodeId).map(|v| g.in_degree(v)).collect();
    let mut level = vec![0u32; n];
    let mut queue: std::collections::VecDeque<NodeId> =
        (0..n as NodeId).filter(|&v| in_deg[v as usize] == 0).collect();

    while let Some(v) = queue.pop_front() {
        for &w in g.successors(v) {
            level[w as usize] = level[w as usize].max(level[v as usize] + 1);
            in_deg[w as usize] -= 1;
            if in_deg[w as usize] == 0 {
                queue.push_back(w);
            }
        }
    }
    TopoLevel { level }
}
