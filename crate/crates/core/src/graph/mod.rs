//! Graph structure and the combinatorial quantities used by the curing
//! analysis: cuts, crusades, CutWidth, distances and subtree enumeration.
//!
//! Node ids are array indices. Complete binary trees use heap numbering:
//! the root is 0 and node `k` has children `2k + 1` and `2k + 2`.

mod cutwidth;
mod nodeset;

use std::collections::VecDeque;

use thiserror::Error;

pub use cutwidth::{cutwidth_exact, cutwidth_exact_with_limit, DEFAULT_EXACT_LIMIT};
pub use nodeset::NodeSet;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("tree depth must be at least 1")]
    ZeroDepth,
    #[error("node id {id} is out of range for a graph of {node_count} nodes")]
    InvalidNode { id: usize, node_count: usize },
    #[error("self-loop at node {0}")]
    SelfLoop(usize),
    #[error("duplicate edge {0}-{1}")]
    DuplicateEdge(usize, usize),
    #[error("ordering is not a permutation of 0..{0}")]
    NotPermutation(usize),
    #[error("graph of {node_count} nodes is too large for exact search (limit {limit})")]
    TooLarge { node_count: usize, limit: usize },
    #[error("operation requires a tree")]
    NotATree,
    #[error("operation requires a complete binary tree")]
    NotCompleteBinaryTree,
    #[error("target set is empty")]
    EmptySet,
    #[error("subtree level {level} must be below tree depth {depth}")]
    LevelOutOfRange { level: u32, depth: u32 },
    #[error("graph must have at least one node")]
    NoNodes,
    #[error("malformed edge list at line {line}: {reason}")]
    Parse { line: usize, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TopologyKind {
    CompleteBinaryTree { depth: u32 },
    Generic,
}

/// Immutable undirected graph with sorted, symmetric adjacency lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphTopology {
    adjacency: Vec<Vec<usize>>,
    edge_count: usize,
    root: usize,
    kind: TopologyKind,
}

/// Depth-first visiting order used to derive a crusade from a tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DfsOrder {
    Preorder,
    Postorder,
    /// First child's subtree, then the node, then the remaining children.
    Inorder,
}

/// An ordering of every node of a graph, read as a growing sequence of
/// prefix sets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Crusade {
    order: Vec<usize>,
}

impl Crusade {
    pub fn new(order: Vec<usize>) -> Result<Self, GraphError> {
        let n = order.len();
        let mut seen = vec![false; n];
        for &id in &order {
            if id >= n || seen[id] {
                return Err(GraphError::NotPermutation(n));
            }
            seen[id] = true;
        }
        Ok(Self { order })
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// Position of every node within the ordering.
    pub fn positions(&self) -> Vec<usize> {
        let mut pos = vec![0; self.order.len()];
        for (i, &id) in self.order.iter().enumerate() {
            pos[id] = i;
        }
        pos
    }
}

impl GraphTopology {
    /// Complete binary tree with `2^depth - 1` nodes in heap numbering.
    pub fn complete_binary_tree(depth: u32) -> Result<Self, GraphError> {
        if depth == 0 {
            return Err(GraphError::ZeroDepth);
        }
        let n = (1usize << depth) - 1;
        let mut adjacency = vec![Vec::with_capacity(3); n];
        for k in 1..n {
            let parent = (k - 1) / 2;
            adjacency[parent].push(k);
            adjacency[k].push(parent);
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        Ok(Self {
            adjacency,
            edge_count: n - 1,
            root: 0,
            kind: TopologyKind::CompleteBinaryTree { depth },
        })
    }

    pub fn path(node_count: usize) -> Result<Self, GraphError> {
        let edges: Vec<_> = (1..node_count).map(|k| (k - 1, k)).collect();
        Self::from_edges(node_count, &edges)
    }

    /// Generic graph from an undirected edge list. Node 0 is the root used
    /// by tree helpers.
    pub fn from_edges(node_count: usize, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        if node_count == 0 {
            return Err(GraphError::NoNodes);
        }
        let mut adjacency = vec![Vec::new(); node_count];
        for &(u, v) in edges {
            for id in [u, v] {
                if id >= node_count {
                    return Err(GraphError::InvalidNode { id, node_count });
                }
            }
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            if adjacency[u].contains(&v) {
                return Err(GraphError::DuplicateEdge(u.min(v), u.max(v)));
            }
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        Ok(Self {
            adjacency,
            edge_count: edges.len(),
            root: 0,
            kind: TopologyKind::Generic,
        })
    }

    /// Parses the plain-text edge list format: the node count on the first
    /// line, then one `u v` pair per line. Blank lines and `#` comments are
    /// ignored.
    pub fn parse_edge_list(text: &str) -> Result<Self, GraphError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());
        let (first_line, header) = lines.next().ok_or(GraphError::Parse {
            line: 1,
            reason: "missing node count".into(),
        })?;
        let node_count: usize = header.parse().map_err(|_| GraphError::Parse {
            line: first_line,
            reason: format!("invalid node count {header:?}"),
        })?;
        let mut edges = Vec::new();
        for (line, content) in lines {
            let mut parts = content.split_whitespace();
            let mut next_id = || -> Result<usize, GraphError> {
                parts
                    .next()
                    .ok_or_else(|| GraphError::Parse {
                        line,
                        reason: "expected two node ids".into(),
                    })?
                    .parse()
                    .map_err(|_| GraphError::Parse {
                        line,
                        reason: format!("invalid node id in {content:?}"),
                    })
            };
            let u = next_id()?;
            let v = next_id()?;
            if parts.next().is_some() {
                return Err(GraphError::Parse {
                    line,
                    reason: "trailing tokens".into(),
                });
            }
            edges.push((u, v));
        }
        Self::from_edges(node_count, &edges)
    }

    /// Serializes to the edge list format accepted by [`parse_edge_list`].
    ///
    /// [`parse_edge_list`]: GraphTopology::parse_edge_list
    pub fn to_edge_list(&self) -> String {
        let mut out = format!("{}\n", self.node_count());
        for (u, v) in self.edges() {
            out.push_str(&format!("{u} {v}\n"));
        }
        out
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn kind(&self) -> TopologyKind {
        self.kind
    }

    pub fn depth(&self) -> Option<u32> {
        match self.kind {
            TopologyKind::CompleteBinaryTree { depth } => Some(depth),
            TopologyKind::Generic => None,
        }
    }

    pub fn neighbors(&self, node: usize) -> &[usize] {
        &self.adjacency[node]
    }

    pub fn degree(&self, node: usize) -> usize {
        self.adjacency[node].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adjacency.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Every edge once, as `(u, v)` with `u < v`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adjacency.iter().enumerate().flat_map(|(u, list)| {
            list.iter()
                .copied()
                .filter(move |&v| u < v)
                .map(move |v| (u, v))
        })
    }

    pub fn is_connected(&self) -> bool {
        let dist = self.bfs_distances(std::iter::once(self.root));
        dist.iter().all(Option::is_some)
    }

    pub fn is_tree(&self) -> bool {
        self.edge_count + 1 == self.node_count() && self.is_connected()
    }

    fn check_set(&self, set: &NodeSet) -> Result<(), GraphError> {
        if set.capacity() != self.node_count() {
            return Err(GraphError::InvalidNode {
                id: set.capacity().max(self.node_count()) - 1,
                node_count: self.node_count(),
            });
        }
        Ok(())
    }

    /// Number of edges with exactly one endpoint in `set`.
    pub fn cut_size(&self, set: &NodeSet) -> Result<usize, GraphError> {
        self.check_set(set)?;
        Ok(self.cut_size_unchecked(set.as_mask()))
    }

    pub(crate) fn cut_size_unchecked(&self, mask: &[bool]) -> usize {
        self.edges().filter(|&(u, v)| mask[u] != mask[v]).count()
    }

    /// Largest prefix cut along the crusade.
    pub fn crusade_max_cut(&self, crusade: &Crusade) -> Result<usize, GraphError> {
        if crusade.len() != self.node_count() {
            return Err(GraphError::NotPermutation(self.node_count()));
        }
        Ok(self.prefix_cuts(crusade).into_iter().max().unwrap_or(0))
    }

    /// Cut of every prefix `S_1, .., S_N` of the crusade, computed
    /// incrementally.
    pub fn prefix_cuts(&self, crusade: &Crusade) -> Vec<usize> {
        let mut inside = vec![false; self.node_count()];
        let mut cut: isize = 0;
        crusade
            .order()
            .iter()
            .map(|&v| {
                let in_nbrs = self.adjacency[v].iter().filter(|&&u| inside[u]).count() as isize;
                cut += self.adjacency[v].len() as isize - 2 * in_nbrs;
                inside[v] = true;
                cut as usize
            })
            .collect()
    }

    /// Children of every node when the tree is hung from its root.
    fn rooted_children(&self) -> Result<Vec<Vec<usize>>, GraphError> {
        if !self.is_tree() {
            return Err(GraphError::NotATree);
        }
        let n = self.node_count();
        let mut children = vec![Vec::new(); n];
        let mut visited = vec![false; n];
        let mut queue = VecDeque::from([self.root]);
        visited[self.root] = true;
        while let Some(u) = queue.pop_front() {
            for &v in &self.adjacency[u] {
                if !visited[v] {
                    visited[v] = true;
                    children[u].push(v);
                    queue.push_back(v);
                }
            }
        }
        Ok(children)
    }

    /// Crusade given by a depth-first traversal from the root.
    pub fn dfs_crusade(&self, order: DfsOrder) -> Result<Crusade, GraphError> {
        let children = self.rooted_children()?;
        let mut out = Vec::with_capacity(self.node_count());
        // Frames hold (node, children already expanded).
        let mut stack = vec![(self.root, 0usize)];
        while let Some(frame) = stack.last_mut() {
            let (node, expanded) = *frame;
            let kids = &children[node];
            let emit_here = match order {
                DfsOrder::Preorder => expanded == 0,
                DfsOrder::Inorder => expanded == kids.len().min(1),
                DfsOrder::Postorder => false,
            };
            // A frame is seen once per value of `expanded`, so each node is
            // emitted exactly once.
            if emit_here {
                out.push(node);
            }
            if expanded < kids.len() {
                frame.1 += 1;
                stack.push((kids[expanded], 0));
            } else {
                if order == DfsOrder::Postorder {
                    out.push(node);
                }
                stack.pop();
            }
        }
        Crusade::new(out)
    }

    /// Multi-source BFS hop distances from `sources`; `None` marks
    /// unreachable nodes.
    pub fn bfs_distances<I>(&self, sources: I) -> Vec<Option<usize>>
    where
        I: IntoIterator<Item = usize>,
    {
        let mut dist = vec![None; self.node_count()];
        let mut queue = VecDeque::new();
        for s in sources {
            if dist[s].is_none() {
                dist[s] = Some(0);
                queue.push_back(s);
            }
        }
        while let Some(u) = queue.pop_front() {
            let d = dist[u].unwrap_or(0);
            for &v in &self.adjacency[u] {
                if dist[v].is_none() {
                    dist[v] = Some(d + 1);
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    /// Hop distance from `node` to the closest member of `set`. Unreachable
    /// sets yield `usize::MAX`.
    pub fn distance_to_set(&self, node: usize, set: &NodeSet) -> Result<usize, GraphError> {
        self.check_set(set)?;
        if node >= self.node_count() {
            return Err(GraphError::InvalidNode {
                id: node,
                node_count: self.node_count(),
            });
        }
        if set.is_empty() {
            return Err(GraphError::EmptySet);
        }
        Ok(self.bfs_distances(set.iter())[node].unwrap_or(usize::MAX))
    }

    /// The `2^level` disjoint subtrees rooted at depth `level` of a complete
    /// binary tree, left to right.
    pub fn subtrees_at_depth(&self, level: u32) -> Result<Vec<NodeSet>, GraphError> {
        let depth = self.depth().ok_or(GraphError::NotCompleteBinaryTree)?;
        if level >= depth {
            return Err(GraphError::LevelOutOfRange { level, depth });
        }
        let n = self.node_count();
        let first = (1usize << level) - 1;
        let roots = first..(first + (1usize << level));
        Ok(roots
            .map(|r| {
                let mut set = NodeSet::empty(n);
                let mut stack = vec![r];
                while let Some(u) = stack.pop() {
                    set.insert(u);
                    stack.extend([2 * u + 1, 2 * u + 2].into_iter().filter(|&c| c < n));
                }
                set
            })
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tree(depth: u32) -> GraphTopology {
        GraphTopology::complete_binary_tree(depth).unwrap()
    }

    #[test]
    fn complete_tree_shapes() {
        let t1 = tree(1);
        assert_eq!((t1.node_count(), t1.edge_count()), (1, 0));

        let t5 = tree(5);
        assert_eq!((t5.node_count(), t5.edge_count()), (31, 30));
        assert!(t5.is_tree());
        assert!(t5.max_degree() <= 3);

        let t3 = tree(3);
        let leaves = (0..7).filter(|&v| t3.degree(v) == 1).count();
        assert_eq!(leaves, 4);
        assert_eq!(t3.degree(0), 2);
        assert_eq!(t3.degree(1), 3);
        assert_eq!(t3.degree(2), 3);
        assert_eq!(t3.neighbors(1), &[0, 3, 4]);
    }

    #[test]
    fn zero_depth_rejected() {
        assert_eq!(
            GraphTopology::complete_binary_tree(0),
            Err(GraphError::ZeroDepth)
        );
    }

    #[test]
    fn cut_size_examples() {
        let t = tree(3);
        assert_eq!(t.cut_size(&NodeSet::empty(7)).unwrap(), 0);
        assert_eq!(t.cut_size(&NodeSet::full(7)).unwrap(), 0);
        assert_eq!(t.cut_size(&NodeSet::from_ids(7, [0]).unwrap()).unwrap(), 2);
        assert!(t.cut_size(&NodeSet::empty(8)).is_err());
    }

    #[test]
    fn dfs_variants_on_depth3() {
        let t = tree(3);
        let pre = t.dfs_crusade(DfsOrder::Preorder).unwrap();
        let post = t.dfs_crusade(DfsOrder::Postorder).unwrap();
        let ino = t.dfs_crusade(DfsOrder::Inorder).unwrap();
        assert_eq!(pre.order(), &[0, 1, 3, 4, 2, 5, 6]);
        assert_eq!(post.order(), &[3, 4, 1, 5, 6, 2, 0]);
        // LL, L, LR, root, RL, R, RR
        assert_eq!(ino.order(), &[3, 1, 4, 0, 5, 2, 6]);

        // Prefix cuts enumerated by hand:
        // preorder: 2,3,2,1,2,1,0   inorder: 1,2,1,1,2,1,0
        assert_eq!(t.prefix_cuts(&pre), vec![2, 3, 2, 1, 2, 1, 0]);
        assert_eq!(t.prefix_cuts(&ino), vec![1, 2, 1, 1, 2, 1, 0]);
        assert_eq!(t.crusade_max_cut(&pre).unwrap(), 3);
        assert_eq!(t.crusade_max_cut(&ino).unwrap(), 2);
    }

    #[test]
    fn single_node_crusade() {
        let t = tree(1);
        let c = t.dfs_crusade(DfsOrder::Inorder).unwrap();
        assert_eq!(c.order(), &[0]);
        assert_eq!(t.crusade_max_cut(&c).unwrap(), 0);
    }

    #[test]
    fn crusade_rejects_non_permutation() {
        assert_eq!(
            Crusade::new(vec![0, 0, 1]),
            Err(GraphError::NotPermutation(3))
        );
        assert!(Crusade::new(vec![0, 3, 1]).is_err());
        let t = tree(2);
        let short = Crusade::new(vec![1, 0]).unwrap();
        assert!(t.crusade_max_cut(&short).is_err());
    }

    #[test]
    fn dfs_requires_tree() {
        let cycle = GraphTopology::from_edges(3, &[(0, 1), (1, 2), (2, 0)]).unwrap();
        assert_eq!(
            cycle.dfs_crusade(DfsOrder::Preorder),
            Err(GraphError::NotATree)
        );
    }

    #[test]
    fn distances() {
        let t3 = tree(3);
        let root = NodeSet::from_ids(7, [0]).unwrap();
        assert_eq!(t3.distance_to_set(3, &root).unwrap(), 2);
        assert_eq!(t3.distance_to_set(0, &root).unwrap(), 0);
        assert_eq!(
            t3.distance_to_set(0, &NodeSet::empty(7)),
            Err(GraphError::EmptySet)
        );

        let t4 = tree(4);
        let leaves = NodeSet::from_ids(15, 7..15).unwrap();
        assert_eq!(t4.distance_to_set(0, &leaves).unwrap(), 3);
    }

    #[test]
    fn subtrees() {
        let t5 = tree(5);
        let whole = t5.subtrees_at_depth(0).unwrap();
        assert_eq!(whole.len(), 1);
        assert_eq!(whole[0].len(), 31);

        let subs = t5.subtrees_at_depth(2).unwrap();
        assert_eq!(subs.len(), 4);
        let mut covered = NodeSet::from_ids(31, 0..3).unwrap();
        for s in &subs {
            assert_eq!(s.len(), 7);
            assert_eq!(t5.cut_size(s).unwrap(), 1);
            assert!(s.is_disjoint(&covered));
            for v in s.iter() {
                covered.insert(v);
            }
        }
        assert_eq!(covered.len(), 31);

        assert_eq!(
            t5.subtrees_at_depth(5),
            Err(GraphError::LevelOutOfRange { level: 5, depth: 5 })
        );
        let path = GraphTopology::path(4).unwrap();
        assert_eq!(
            path.subtrees_at_depth(1),
            Err(GraphError::NotCompleteBinaryTree)
        );
    }

    #[test]
    fn edge_list_round_trip_and_errors() {
        let t = tree(3);
        let parsed = GraphTopology::parse_edge_list(&t.to_edge_list()).unwrap();
        assert_eq!(parsed.node_count(), 7);
        assert_eq!(
            parsed.edges().collect::<Vec<_>>(),
            t.edges().collect::<Vec<_>>()
        );

        let text = "# a path\n3\n0 1\n1 2 # tail\n";
        let p = GraphTopology::parse_edge_list(text).unwrap();
        assert_eq!(p.edge_count(), 2);

        assert!(matches!(
            GraphTopology::parse_edge_list("3\n0 x\n"),
            Err(GraphError::Parse { line: 2, .. })
        ));
        assert_eq!(
            GraphTopology::parse_edge_list("2\n0 0\n"),
            Err(GraphError::SelfLoop(0))
        );
        assert_eq!(
            GraphTopology::parse_edge_list("2\n0 1\n1 0\n"),
            Err(GraphError::DuplicateEdge(0, 1))
        );
        assert!(matches!(
            GraphTopology::parse_edge_list("2\n0 5\n"),
            Err(GraphError::InvalidNode { id: 5, .. })
        ));
    }
}
