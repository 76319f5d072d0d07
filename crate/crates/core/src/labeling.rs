//! Tree cover construction and post-order identifier assignment.
//!
//! The tree cover is the spanning tree that seeds the interval labels: for
//! every non-root node the incoming edge from the predecessor with the
//! highest topological rank is kept. Each node's post-order id together with
//! the minimum id in its subtree forms its exact tree interval.

use thiserror::Error;

use crate::graph::{Graph, NodeId, TopoOrder};

#[derive(Debug, Error)]
pub enum TreeCoverError {
    #[error("node {node} has no predecessor but is not the single root")]
    ExtraSource { node: NodeId },
    #[error("graph has no source node")]
    NoRoot,
    #[error("parent table does not span all nodes from the root")]
    NotSpanning,
}

/// Spanning tree of the root-augmented DAG. Children lists are ordered by
/// ascending node id, which fixes the post-order traversal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeCover {
    root: NodeId,
    parent: Vec<Option<NodeId>>,
    children: Vec<Vec<NodeId>>,
}

impl TreeCover {
    /// Builds a tree from an explicit parent table (`None` exactly at the
    /// root). Validates that the edges span all nodes.
    pub fn from_parents(parent: Vec<Option<NodeId>>) -> Result<TreeCover, TreeCoverError> {
        let n = parent.len();
        let mut root = None;
        let mut children = vec![Vec::new(); n];
        for (v, p) in parent.iter().enumerate() {
            match p {
                Some(p) => children[*p as usize].push(v as NodeId),
                None => match root {
                    None => root = Some(v as NodeId),
                    Some(_) => return Err(TreeCoverError::ExtraSource { node: v as NodeId }),
                },
            }
        }
        let root = root.ok_or(TreeCoverError::NoRoot)?;
        for list in &mut children {
            list.sort_unstable();
        }
        let tree = TreeCover { root, parent, children };
        // reachability from the root doubles as the acyclicity check
        let mut seen = 0usize;
        let mut stack = vec![root];
        let mut visited = vec![false; n];
        visited[root as usize] = true;
        while let Some(v) = stack.pop() {
            seen += 1;
            for &c in tree.children(v) {
                if !visited[c as usize] {
                    visited[c as usize] = true;
                    stack.push(c);
                }
            }
        }
        if seen != n {
            return Err(TreeCoverError::NotSpanning);
        }
        Ok(tree)
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn parent(&self, v: NodeId) -> Option<NodeId> {
        self.parent[v as usize]
    }

    pub fn children(&self, v: NodeId) -> &[NodeId] {
        &self.children[v as usize]
    }

    pub fn node_count(&self) -> usize {
        self.parent.len()
    }
}

/// Selects, for every non-root node, the tree edge from the predecessor with
/// the highest topological rank. Rank is injective, so no ties are possible.
pub fn tree_cover(g: &Graph, tau: &TopoOrder) -> Result<TreeCover, TreeCoverError> {
    let n = g.node_count();
    let mut parent: Vec<Option<NodeId>> = vec![None; n];
    let mut sources = 0usize;
    // walk ranks n downto 1; the parent choice is order-independent
    for &v in tau.nodes_by_rank().iter().rev() {
        let preds = g.predecessors(v);
        match preds.iter().copied().max_by_key(|&u| tau.rank(u)) {
            Some(p) => parent[v as usize] = Some(p),
            None => sources += 1,
        }
    }
    if sources != 1 {
        // more than one source means the graph was not root-augmented
        let extra = (0..n as NodeId)
            .filter(|&v| g.in_degree(v) == 0)
            .nth(1)
            .ok_or(TreeCoverError::NoRoot)?;
        return Err(TreeCoverError::ExtraSource { node: extra });
    }
    TreeCover::from_parents(parent)
}

/// Post-order ids (1-based) and per-node subtree minima. The tree interval
/// of `v` is `[subtree_min(v), pi(v)]` and contains exactly the ids of `v`'s
/// subtree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PostOrder {
    pub pi: Vec<u32>,
    pub subtree_min: Vec<u32>,
}

impl PostOrder {
    pub fn id(&self, v: NodeId) -> u32 {
        self.pi[v as usize]
    }

    pub fn tree_interval(&self, v: NodeId) -> (u32, u32) {
        (self.subtree_min[v as usize], self.pi[v as usize])
    }
}

/// Depth-first post-order numbering, children in ascending-id order.
/// Iterative with an explicit stack so degenerate path trees of arbitrary
/// depth cannot overflow.
pub fn assign_post_order(tree: &TreeCover) -> PostOrder {
    let n = tree.node_count();
    let mut pi = vec![0u32; n];
    let mut subtree_min = vec![0u32; n];
    let mut next_id = 0u32;

    let mut stack: Vec<(NodeId, usize)> = vec![(tree.root(), 0)];
    while let Some(&mut (v, ref mut child_pos)) = stack.last_mut() {
        if let Some(&c) = tree.children(v).get(*child_pos) {
            *child_pos += 1;
            stack.push((c, 0));
        } else {
            stack.pop();
            next_id += 1;
            pi[v as usize] = next_id;
            subtree_min[v as usize] = match tree.children(v).first() {
                Some(&first) => subtree_min[first as usize],
                None => next_id,
            };
        }
    }
    debug_assert_eq!(next_id as usize, n);
    PostOrder { pi, subtree_min }
}
