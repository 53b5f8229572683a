//! Storage graphs, helper selection and repair trees.

use std::collections::{BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Undirected, simple, connected graph on nodes `0..nodes`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "GraphDoc", into = "GraphDoc")]
pub struct Graph {
    nodes: usize,
    edges: Vec<(usize, usize)>,
    adjacency: Vec<Vec<usize>>,
}

/// On-disk form: `{"nodes": N, "edges": [[u, v], ...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct GraphDoc {
    nodes: usize,
    edges: Vec<[usize; 2]>,
}

impl TryFrom<GraphDoc> for Graph {
    type Error = Error;

    fn try_from(doc: GraphDoc) -> Result<Self> {
        Graph::new(doc.nodes, doc.edges.iter().map(|e| (e[0], e[1])))
    }
}

impl From<Graph> for GraphDoc {
    fn from(g: Graph) -> Self {
        GraphDoc { nodes: g.nodes, edges: g.edges.iter().map(|&(u, v)| [u, v]).collect() }
    }
}

impl Graph {
    pub fn new(nodes: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        if nodes == 0 {
            return Err(Error::InvalidGraph("graph has no nodes".into()));
        }
        let mut adjacency = vec![Vec::new(); nodes];
        let mut seen = BTreeSet::new();
        let mut list = Vec::new();
        for (u, v) in edges {
            if u >= nodes || v >= nodes {
                return Err(Error::InvalidGraph(format!("edge ({u}, {v}) out of range")));
            }
            if u == v {
                return Err(Error::InvalidGraph(format!("self-loop at {u}")));
            }
            if !seen.insert((u.min(v), u.max(v))) {
                return Err(Error::InvalidGraph(format!("duplicate edge ({u}, {v})")));
            }
            adjacency[u].push(v);
            adjacency[v].push(u);
            list.push((u, v));
        }
        for adj in &mut adjacency {
            adj.sort_unstable();
        }
        let g = Graph { nodes, edges: list, adjacency };
        if let Some(unreached) = g.distances(0).iter().position(Option::is_none) {
            return Err(Error::InvalidGraph(format!("not connected: node {unreached} unreachable from 0")));
        }
        Ok(g)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("graph serializes")
    }

    /// The seven-node binary tree used throughout the worked examples: node 0
    /// is the root, 1 and 2 its children, 3, 4 under 1 and 5, 6 under 2.
    pub fn running_example() -> Self {
        Graph::new(7, [(0, 1), (0, 2), (1, 3), (1, 4), (2, 5), (2, 6)]).expect("valid fixture")
    }

    pub fn star(leaves: usize) -> Self {
        Graph::new(leaves + 1, (1..=leaves).map(|i| (0, i))).expect("valid star")
    }

    pub fn path(nodes: usize) -> Self {
        Graph::new(nodes, (1..nodes).map(|i| (i - 1, i))).expect("valid path")
    }

    pub fn complete(nodes: usize) -> Self {
        let edges = (0..nodes).flat_map(|u| (u + 1..nodes).map(move |v| (u, v)));
        Graph::new(nodes, edges).expect("valid complete graph")
    }

    pub fn node_count(&self) -> usize {
        self.nodes
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adjacency[u].binary_search(&v).is_ok()
    }

    /// BFS hop distances from `source`.
    pub fn distances(&self, source: usize) -> Vec<Option<usize>> {
        bfs(source, self.nodes, |v| self.adjacency[v].iter().copied())
    }
}

fn bfs<I: Iterator<Item = usize>>(source: usize, n: usize, neighbors: impl Fn(usize) -> I) -> Vec<Option<usize>> {
    let mut dist = vec![None; n];
    dist[source] = Some(0);
    let mut queue = VecDeque::from([source]);
    while let Some(v) = queue.pop_front() {
        let dv = dist[v].expect("queued nodes have a distance");
        for w in neighbors(v) {
            if dist[w].is_none() {
                dist[w] = Some(dv + 1);
                queue.push_back(w);
            }
        }
    }
    dist
}

/// The `d` nodes closest to `failed`, ties broken by ascending index.
pub fn select_helpers(g: &Graph, failed: usize, d: usize) -> Result<Vec<usize>> {
    if failed >= g.node_count() {
        return Err(Error::InvalidGraph(format!("node {failed} out of range")));
    }
    if d + 1 > g.node_count() {
        return Err(Error::InvalidParameters(format!(
            "need {d} helpers but the graph has only {} other nodes",
            g.node_count() - 1
        )));
    }
    let dist = g.distances(failed);
    let mut order: Vec<(usize, usize)> = (0..g.node_count())
        .filter(|&v| v != failed)
        .map(|v| (dist[v].expect("graph is connected"), v))
        .collect();
    order.sort_unstable();
    Ok(order.into_iter().take(d).map(|(_, v)| v).collect())
}

/// Shortest-path tree rooted at the failed node over `{failed} ∪ helpers`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepairTree {
    root: usize,
    helpers: Vec<usize>,
    parent: Vec<Option<usize>>,
    depth: Vec<Option<usize>>,
    subtree: Vec<usize>,
}

impl RepairTree {
    pub fn root(&self) -> usize {
        self.root
    }

    /// Helper nodes in ascending index order.
    pub fn helpers(&self) -> &[usize] {
        &self.helpers
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        self.parent.get(v).copied().flatten()
    }

    pub fn depth(&self, v: usize) -> Option<usize> {
        self.depth.get(v).copied().flatten()
    }

    /// `|D*(v)|`: `v` together with all its descendants.
    pub fn subtree_size(&self, v: usize) -> usize {
        self.subtree[v]
    }

    pub fn children(&self, v: usize) -> Vec<usize> {
        self.helpers.iter().copied().filter(|&h| self.parent(h) == Some(v)).collect()
    }

    /// Helpers ordered deepest first (ties by index), so every child precedes
    /// its parent.
    pub fn bottom_up(&self) -> Vec<usize> {
        let mut order = self.helpers.clone();
        order.sort_by_key(|&v| (std::cmp::Reverse(self.depth(v)), v));
        order
    }

    /// Nodes in the subtree rooted at `v`, including `v`.
    pub fn subtree_nodes(&self, v: usize) -> Vec<usize> {
        let mut out = vec![v];
        let mut i = 0;
        while i < out.len() {
            out.extend(self.children(out[i]));
            i += 1;
        }
        out.sort_unstable();
        out
    }
}

/// Builds the BFS tree over the subgraph induced by `{failed} ∪ helpers`; each
/// node's parent is its lowest-index neighbor one hop closer to the root.
pub fn build_repair_tree(g: &Graph, failed: usize, helpers: &[usize]) -> Result<RepairTree> {
    let n = g.node_count();
    let mut inside = vec![false; n];
    for &h in helpers.iter().chain(std::iter::once(&failed)) {
        if h >= n {
            return Err(Error::InvalidGraph(format!("node {h} out of range")));
        }
        if inside[h] {
            return Err(Error::InvalidParameters(format!("node {h} listed twice")));
        }
        inside[h] = true;
    }
    let depth = bfs(failed, n, |v| g.neighbors(v).iter().copied().filter(|&w| inside[w]));
    let mut parent = vec![None; n];
    for &h in helpers {
        let dh = depth[h].ok_or(Error::Unreachable(h))?;
        parent[h] = g.neighbors(h).iter().copied().find(|&w| inside[w] && depth[w] == Some(dh - 1));
    }
    let mut sorted = helpers.to_vec();
    sorted.sort_unstable();
    let mut tree = RepairTree { root: failed, helpers: sorted, parent, depth, subtree: vec![0; n] };
    for v in tree.bottom_up() {
        tree.subtree[v] += 1;
        let size = tree.subtree[v];
        let p = tree.parent(v).expect("helpers have parents");
        tree.subtree[p] += size;
    }
    tree.subtree[failed] += 1;
    Ok(tree)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn graph_validation() {
        assert!(Graph::new(3, [(0, 1)]).is_err());
        assert!(Graph::new(2, [(0, 0)]).is_err());
        assert!(Graph::new(2, [(0, 1), (1, 0)]).is_err());
        assert!(Graph::new(2, [(0, 2)]).is_err());
        let g = Graph::from_json(r#"{"nodes": 3, "edges": [[0,1],[1,2]]}"#).unwrap();
        assert_eq!(g, Graph::path(3));
        assert_eq!(Graph::from_json(&g.to_json()).unwrap(), g);
        assert!(Graph::from_json(r#"{"nodes": 3, "edges": [[0,1]]}"#).is_err());
    }

    #[test]
    fn helper_selection() {
        let g = Graph::running_example();
        assert_eq!(select_helpers(&g, 0, 6).unwrap(), vec![1, 2, 3, 4, 5, 6]);
        assert_eq!(select_helpers(&Graph::star(5), 0, 3).unwrap(), vec![1, 2, 3]);
        assert_eq!(select_helpers(&Graph::path(4), 0, 2).unwrap(), vec![1, 2]);
        assert_eq!(select_helpers(&g, 3, 3).unwrap(), vec![1, 0, 4]);
        assert!(select_helpers(&g, 0, 7).is_err());
    }

    #[test]
    fn running_example_tree() {
        let g = Graph::running_example();
        let t = build_repair_tree(&g, 0, &[1, 2, 3, 4, 5, 6]).unwrap();
        assert_eq!(t.children(0), vec![1, 2]);
        assert_eq!(t.subtree_size(1), 3);
        assert_eq!(t.subtree_size(2), 3);
        for leaf in 3..7 {
            assert_eq!(t.subtree_size(leaf), 1);
        }
        assert_eq!(t.subtree_size(0), 7);
        let children_total: usize = t.children(0).iter().map(|&c| t.subtree_size(c)).sum();
        assert_eq!(children_total, 6);
        for &h in t.helpers() {
            let p = t.parent(h).unwrap();
            assert_eq!(t.depth(h).unwrap(), t.depth(p).unwrap() + 1);
        }
    }

    #[test]
    fn complete_and_path_trees() {
        let t = build_repair_tree(&Graph::complete(5), 2, &[0, 1, 3, 4]).unwrap();
        for h in [0, 1, 3, 4] {
            assert_eq!(t.parent(h), Some(2));
            assert_eq!(t.subtree_size(h), 1);
        }
        let t = build_repair_tree(&Graph::path(5), 0, &[1, 2, 3, 4]).unwrap();
        let sizes: Vec<usize> = (1..5).map(|v| t.subtree_size(v)).collect();
        assert_eq!(sizes, vec![4, 3, 2, 1]);
    }

    #[test]
    fn unreachable_helper_is_an_error() {
        // 3 only connects through 2, which is not part of the helper set
        let g = Graph::path(4);
        assert!(matches!(build_repair_tree(&g, 0, &[1, 3]), Err(Error::Unreachable(3))));
    }

    #[test]
    fn parent_tie_break_prefers_lower_index() {
        // 3 is adjacent to both 1 and 2, which sit at the same depth
        let g = Graph::new(4, [(0, 1), (0, 2), (1, 3), (2, 3)]).unwrap();
        let t = build_repair_tree(&g, 0, &[1, 2, 3]).unwrap();
        assert_eq!(t.parent(3), Some(1));
    }
}
