//! Query workload generation and the pair-list file format ("SRC DST" per
//! line, comments with `#` or `%`).

use std::io::{BufRead, Write};

use ferrari_core::graph::{LoadedGraph, NodeId};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Forward-BFS visit cap used when sampling positive pairs, bounding the
/// worst-case generation cost on large graphs.
pub const DEFAULT_BFS_CAP: usize = 10_000;

#[derive(Debug, Error)]
pub enum WorkloadError {
    #[error("workload size must be at least 1")]
    InvalidCount,
    #[error("graph has no nodes")]
    EmptyGraph,
    #[error("no reachable pair with distinct endpoints found")]
    NoReachablePair,
    #[error("line {line}: expected \"SRC DST\", got {content:?}")]
    Malformed { line: usize, content: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WorkloadKind {
    Random,
    Positive,
}

impl WorkloadKind {
    pub fn as_str(self) -> &'static str {
        match self {
            WorkloadKind::Random => "random",
            WorkloadKind::Positive => "positive",
        }
    }
}

/// A batch of reachability queries, expressed in external node ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Workload {
    pub pairs: Vec<(u64, u64)>,
    pub kind: WorkloadKind,
}

/// Uniform node-id pairs, reproducible for a fixed seed.
pub fn gen_random_workload(
    input: &LoadedGraph,
    count: usize,
    seed: u64,
) -> Result<Workload, WorkloadError> {
    if count == 0 {
        return Err(WorkloadError::InvalidCount);
    }
    let n = input.graph.node_count();
    if n == 0 {
        return Err(WorkloadError::EmptyGraph);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pairs = (0..count)
        .map(|_| {
            let u = rng.gen_range(0..n) as NodeId;
            let v = rng.gen_range(0..n) as NodeId;
            (input.ids.to_external(u), input.ids.to_external(v))
        })
        .collect();
    Ok(Workload { pairs, kind: WorkloadKind::Random })
}

/// Pairs guaranteed reachable: pick a random source, run a forward BFS
/// capped at `bfs_cap` visits, pick a uniform target among the reached nodes
/// (excluding the source itself), and resample sources that reach nothing.
pub fn gen_positive_workload(
    input: &LoadedGraph,
    count: usize,
    seed: u64,
    bfs_cap: usize,
) -> Result<Workload, WorkloadError> {
    if count == 0 {
        return Err(WorkloadError::InvalidCount);
    }
    let g = &input.graph;
    let n = g.node_count();
    if n == 0 {
        return Err(WorkloadError::EmptyGraph);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs = Vec::with_capacity(count);
    let mut visited = vec![false; n];
    let mut reached: Vec<NodeId> = Vec::new();
    let mut queue = std::collections::VecDeque::new();
    let mut attempts_left = count.saturating_mul(50) + 1000;

    while pairs.len() < count {
        if attempts_left == 0 {
            return Err(WorkloadError::NoReachablePair);
        }
        attempts_left -= 1;

        let src = rng.gen_range(0..n) as NodeId;
        reached.clear();
        queue.clear();
        visited[src as usize] = true;
        queue.push_back(src);
        let mut visits = 0usize;
        while let Some(x) = queue.pop_front() {
            visits += 1;
            if visits > bfs_cap {
                break;
            }
            for &w in g.successors(x) {
                if !visited[w as usize] {
                    visited[w as usize] = true;
                    reached.push(w);
                    queue.push_back(w);
                }
            }
        }
        visited[src as usize] = false;
        for &w in &reached {
            visited[w as usize] = false;
        }
        // queue may still hold marked nodes past the cap; they are in
        // `reached` already, so the reset above covered them
        if reached.is_empty() {
            continue;
        }
        let dst = reached[rng.gen_range(0..reached.len())];
        pairs.push((input.ids.to_external(src), input.ids.to_external(dst)));
    }
    Ok(Workload { pairs, kind: WorkloadKind::Positive })
}

/// Reads a pair list; an empty file yields an empty workload.
pub fn read_pairs<R: BufRead>(reader: R) -> Result<Vec<(u64, u64)>, WorkloadError> {
    let mut pairs = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with('%') {
            continue;
        }
        let mut it = line.split_whitespace();
        let parse = |tok: Option<&str>| -> Option<u64> { tok.and_then(|t| t.parse().ok()) };
        match (parse(it.next()), parse(it.next()), it.next()) {
            (Some(src), Some(dst), None) => pairs.push((src, dst)),
            _ => return Err(WorkloadError::Malformed { line: idx + 1, content: line.to_string() }),
        }
    }
    Ok(pairs)
}

pub fn write_pairs<W: Write>(mut sink: W, pairs: &[(u64, u64)]) -> std::io::Result<()> {
    for &(u, v) in pairs {
        writeln!(sink, "{u} {v}")?;
    }
    Ok(())
}
