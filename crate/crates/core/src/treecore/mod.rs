//! Leaf-labeled tree structures shared by simulation and reconstruction.
//!
//! Two shapes of tree live here:
//!
//! * [`RootedEvoTree`] is the generating tree: rooted, binary, with a
//!   mutation probability on every edge.
//! * [`WeightedTopology`] is the unrooted tree with per-edge lengths that
//!   reconstruction aims for (and produces).
//!
//! Both use arena storage with plain `usize` node indices.

mod gdepth;
mod newick;
mod split;

use std::collections::{HashMap, HashSet};

use crate::error::{invalid, Error, Result};

pub use gdepth::g_depth;
pub use newick::{parse_newick, Metric, NewickNode, NewickTree};
pub use split::{
    bipartitions, edge_splits, length_errors, max_length_error, restrict, rf_distance,
    topology_matches, BipartitionSet, Split,
};

/// Dense index of a terminal taxon.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LeafId(pub usize);

impl LeafId {
    #[inline]
    pub fn index(self) -> usize {
        self.0
    }
}

impl std::fmt::Display for LeafId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "#{}", self.0)
    }
}

fn check_names(names: &[String]) -> Result<()> {
    let mut seen = HashSet::with_capacity(names.len());
    for name in names {
        if name.is_empty() {
            return Err(invalid("leaf names must be nonempty"));
        }
        if !seen.insert(name.as_str()) {
            return Err(Error::DuplicateLeaf(name.clone()));
        }
    }
    Ok(())
}

/// A node of a [`RootedEvoTree`]. `mutation_prob` belongs to the edge above
/// the node and is unused for the root.
#[derive(Debug, Clone, PartialEq)]
pub struct EvoNode {
    pub parent: Option<usize>,
    pub children: Vec<usize>,
    pub leaf: Option<LeafId>,
    pub mutation_prob: f64,
}

/// Rooted binary evolutionary tree with an edge mutation probability on
/// every edge, for an alphabet of `alphabet_size` symbols.
#[derive(Debug, Clone, PartialEq)]
pub struct RootedEvoTree {
    nodes: Vec<EvoNode>,
    root: usize,
    names: Vec<String>,
    leaf_nodes: Vec<usize>,
    alphabet_size: usize,
}

impl RootedEvoTree {
    /// Builds a tree from an arena. The tree must be binary with at least
    /// three leaves, leaf ids must be dense, and every non-root edge must
    /// have `0 <= p < 1 - 1/m`.
    ///
    /// The lower bound is deliberately 0 rather than the model's `f` so that
    /// degenerate trees can be built for tests; see
    /// [`RootedEvoTree::check_bounds`] for the model constraint.
    pub fn from_nodes(
        nodes: Vec<EvoNode>,
        root: usize,
        names: Vec<String>,
        alphabet_size: usize,
    ) -> Result<Self> {
        if alphabet_size < 2 {
            return Err(invalid("alphabet size must be at least 2"));
        }
        check_names(&names)?;
        let n = names.len();
        if n < 3 {
            return Err(invalid(format!("need at least 3 leaves, got {n}")));
        }
        if nodes.len() != 2 * n - 1 {
            return Err(invalid(format!(
                "a rooted binary tree on {n} leaves has {} nodes, got {}",
                2 * n - 1,
                nodes.len()
            )));
        }
        if root >= nodes.len() || nodes[root].parent.is_some() {
            return Err(invalid("root index is not a parentless node"));
        }
        let upper = 1.0 - 1.0 / alphabet_size as f64;
        let mut leaf_nodes = vec![usize::MAX; n];
        for (i, node) in nodes.iter().enumerate() {
            match node.leaf {
                Some(leaf) => {
                    if !node.children.is_empty() {
                        return Err(invalid(format!("leaf node {i} has children")));
                    }
                    if leaf.0 >= n || leaf_nodes[leaf.0] != usize::MAX {
                        return Err(invalid(format!("leaf id {leaf} is out of range or repeated")));
                    }
                    leaf_nodes[leaf.0] = i;
                }
                None => {
                    if node.children.len() != 2 {
                        return Err(invalid(format!(
                            "internal node {i} has {} children, expected 2",
                            node.children.len()
                        )));
                    }
                }
            }
            for &c in &node.children {
                if c >= nodes.len() || nodes[c].parent != Some(i) {
                    return Err(invalid(format!("child link {i} -> {c} is inconsistent")));
                }
            }
            if i != root {
                let Some(parent) = node.parent else {
                    return Err(invalid(format!("node {i} has no parent")));
                };
                if parent >= nodes.len() || !nodes[parent].children.contains(&i) {
                    return Err(invalid(format!("parent link {i} -> {parent} is inconsistent")));
                }
                let p = node.mutation_prob;
                if !(0.0..upper).contains(&p) {
                    return Err(invalid(format!(
                        "edge above node {i} has mutation probability {p}, outside [0, {upper})"
                    )));
                }
            }
        }
        // n-1 internal nodes with 2 children each reach 2n-2 nodes; with the
        // link checks above this makes the structure a single tree.
        let tree = Self { nodes, root, names, leaf_nodes, alphabet_size };
        if tree.preorder().len() != tree.nodes.len() {
            return Err(invalid("nodes are not connected to the root"));
        }
        Ok(tree)
    }

    /// Checks `f <= p_e <= g` on every edge.
    pub fn check_bounds(&self, f: f64, g: f64) -> Result<()> {
        for (i, node) in self.nodes.iter().enumerate() {
            if i != self.root && !(f..=g).contains(&node.mutation_prob) {
                return Err(invalid(format!(
                    "edge above node {i} has p = {}, outside [{f}, {g}]",
                    node.mutation_prob
                )));
            }
        }
        Ok(())
    }

    pub fn nodes(&self) -> &[EvoNode] {
        &self.nodes
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn n_leaves(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, leaf: LeafId) -> &str {
        &self.names[leaf.0]
    }

    pub fn leaf_node(&self, leaf: LeafId) -> usize {
        self.leaf_nodes[leaf.0]
    }

    pub fn leaf_by_name(&self, name: &str) -> Option<LeafId> {
        self.names.iter().position(|n| n == name).map(LeafId)
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet_size
    }

    /// `m / (m - 1)`.
    pub fn alpha(&self) -> f64 {
        let m = self.alphabet_size as f64;
        m / (m - 1.0)
    }

    /// Closeness `1 - alpha * p_e` of the edge above `node`.
    pub fn edge_closeness(&self, node: usize) -> f64 {
        1.0 - self.alpha() * self.nodes[node].mutation_prob
    }

    /// Length `-ln(1 - alpha * p_e)` of the edge above `node`.
    pub fn edge_length(&self, node: usize) -> f64 {
        -self.edge_closeness(node).ln()
    }

    /// Nodes in preorder (parents before children).
    pub fn preorder(&self) -> Vec<usize> {
        let mut order = Vec::with_capacity(self.nodes.len());
        let mut stack = vec![self.root];
        while let Some(u) = stack.pop() {
            order.push(u);
            stack.extend(self.nodes[u].children.iter().rev());
        }
        order
    }

    pub fn depths(&self) -> Vec<usize> {
        let mut depth = vec![0; self.nodes.len()];
        for u in self.preorder() {
            if let Some(p) = self.nodes[u].parent {
                depth[u] = depth[p] + 1;
            }
        }
        depth
    }

    /// Undirected neighbours of every node.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::with_capacity(3); self.nodes.len()];
        for (i, node) in self.nodes.iter().enumerate() {
            if let Some(p) = node.parent {
                adj[i].push(p);
                adj[p].push(i);
            }
        }
        adj
    }

    /// Nodes on the path from `u` to `v`, both ends included.
    pub fn path(&self, u: usize, v: usize) -> Vec<usize> {
        let depth = self.depths();
        let (mut a, mut b) = (u, v);
        let mut up = vec![];
        let mut down = vec![];
        while a != b {
            if depth[a] >= depth[b] {
                up.push(a);
                a = self.nodes[a].parent.expect("non-root");
            } else {
                down.push(b);
                b = self.nodes[b].parent.expect("non-root");
            }
        }
        up.push(a);
        up.extend(down.into_iter().rev());
        up
    }

    /// Closeness between two arbitrary nodes: the product of `1 - alpha p_e`
    /// over the edges of their path.
    pub fn node_closeness(&self, u: usize, v: usize) -> f64 {
        let path = self.path(u, v);
        path.windows(2)
            .map(|w| {
                let child = if self.nodes[w[0]].parent == Some(w[1]) { w[0] } else { w[1] };
                self.edge_closeness(child)
            })
            .product()
    }
}

/// An edge of a [`WeightedTopology`]. `length` is in distance units
/// (`-ln` closeness); `weight`, when known, is a mutation probability.
#[derive(Debug, Clone, PartialEq)]
pub struct TopoEdge {
    pub a: usize,
    pub b: usize,
    pub length: Option<f64>,
    pub weight: Option<f64>,
}

/// Unrooted leaf-labeled tree with optional per-edge lengths.
#[derive(Debug, Clone)]
pub struct WeightedTopology {
    names: Vec<String>,
    node_leaf: Vec<Option<LeafId>>,
    leaf_nodes: Vec<usize>,
    edges: Vec<TopoEdge>,
    adj: Vec<Vec<(usize, usize)>>,
}

impl WeightedTopology {
    /// Builds a topology from its edges. Leaves must have degree 1 and
    /// internal nodes degree at least 3.
    pub fn from_edges(
        names: Vec<String>,
        node_leaf: Vec<Option<LeafId>>,
        edges: Vec<TopoEdge>,
    ) -> Result<Self> {
        check_names(&names)?;
        let n = names.len();
        if n < 3 {
            return Err(invalid(format!("need at least 3 leaves, got {n}")));
        }
        let node_count = node_leaf.len();
        if edges.len() + 1 != node_count {
            return Err(invalid(format!(
                "{} edges cannot connect {} nodes into a tree",
                edges.len(),
                node_count
            )));
        }
        let mut leaf_nodes = vec![usize::MAX; n];
        for (i, leaf) in node_leaf.iter().enumerate() {
            if let Some(l) = leaf {
                if l.0 >= n || leaf_nodes[l.0] != usize::MAX {
                    return Err(invalid(format!("leaf id {l} is out of range or repeated")));
                }
                leaf_nodes[l.0] = i;
            }
        }
        if leaf_nodes.contains(&usize::MAX) {
            return Err(invalid("some leaf id has no node"));
        }
        let mut adj = vec![Vec::with_capacity(3); node_count];
        for (e, edge) in edges.iter().enumerate() {
            if edge.a >= node_count || edge.b >= node_count || edge.a == edge.b {
                return Err(invalid(format!("edge {e} has bad endpoints")));
            }
            if let Some(len) = edge.length {
                if !len.is_finite() {
                    return Err(invalid(format!("edge {e} has non-finite length {len}")));
                }
            }
            adj[edge.a].push((edge.b, e));
            adj[edge.b].push((edge.a, e));
        }
        for (i, nbrs) in adj.iter().enumerate() {
            let ok = match node_leaf[i] {
                Some(_) => nbrs.len() == 1,
                None => nbrs.len() >= 3,
            };
            if !ok {
                return Err(invalid(format!("node {i} has degree {}", nbrs.len())));
            }
        }
        let topo = Self { names, node_leaf, leaf_nodes, edges, adj };
        if topo.reachable_from(topo.leaf_nodes[0]) != node_count {
            return Err(invalid("edges do not form a connected tree"));
        }
        Ok(topo)
    }

    fn reachable_from(&self, start: usize) -> usize {
        let mut seen = vec![false; self.adj.len()];
        let mut stack = vec![start];
        seen[start] = true;
        let mut count = 0;
        while let Some(u) = stack.pop() {
            count += 1;
            for &(v, _) in &self.adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        count
    }

    pub fn n_leaves(&self) -> usize {
        self.names.len()
    }

    pub fn node_count(&self) -> usize {
        self.node_leaf.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, leaf: LeafId) -> &str {
        &self.names[leaf.0]
    }

    pub fn edges(&self) -> &[TopoEdge] {
        &self.edges
    }

    /// `(neighbour, edge index)` pairs of a node.
    pub fn neighbors(&self, node: usize) -> &[(usize, usize)] {
        &self.adj[node]
    }

    pub fn leaf_of(&self, node: usize) -> Option<LeafId> {
        self.node_leaf[node]
    }

    pub fn leaf_node(&self, leaf: LeafId) -> usize {
        self.leaf_nodes[leaf.0]
    }

    /// Name to leaf index lookup.
    pub fn leaf_index(&self) -> HashMap<&str, LeafId> {
        self.names.iter().enumerate().map(|(i, s)| (s.as_str(), LeafId(i))).collect()
    }

    /// Every internal node has degree exactly 3.
    pub fn is_binary(&self) -> bool {
        self.adj
            .iter()
            .zip(&self.node_leaf)
            .all(|(nbrs, leaf)| leaf.is_some() || nbrs.len() == 3)
    }

    /// Checks the full binary-topology invariants: `2n - 2` nodes, `2n - 3`
    /// edges, internal degree 3, and every length present, finite and
    /// positive.
    pub fn validate(&self) -> Result<()> {
        let n = self.n_leaves();
        if !self.is_binary() || self.node_count() != 2 * n - 2 || self.edge_count() != 2 * n - 3 {
            return Err(invalid("topology is not binary"));
        }
        for (e, edge) in self.edges.iter().enumerate() {
            match edge.length {
                Some(len) if len > 0.0 && len.is_finite() => {}
                other => return Err(invalid(format!("edge {e} has length {other:?}"))),
            }
        }
        Ok(())
    }

    /// Sum of lengths along the path between two nodes.
    pub fn path_length(&self, from: usize, to: usize) -> Option<f64> {
        let mut prev = vec![usize::MAX; self.node_count()];
        let mut stack = vec![from];
        prev[from] = from;
        while let Some(u) = stack.pop() {
            if u == to {
                break;
            }
            for &(v, e) in &self.adj[u] {
                if prev[v] == usize::MAX {
                    prev[v] = e;
                    stack.push(v);
                }
            }
        }
        let mut total = 0.0;
        let mut cur = to;
        while cur != from {
            let edge = &self.edges[prev[cur]];
            total += edge.length?;
            cur = if edge.a == cur { edge.b } else { edge.a };
        }
        Some(total)
    }
}

/// Replaces the two root edges `e1`, `e2` of `t` by a single edge `e0`.
///
/// Every edge gets weight `p_e` and length `-ln(1 - alpha p_e)`. The merged
/// edge gets weight `1 - (1 - p_e1)(1 - p_e2)` and length `d_e1 + d_e2`.
pub fn suppress_root(t: &RootedEvoTree) -> WeightedTopology {
    let nodes = t.nodes();
    let root = t.root();
    let (left, right) = (nodes[root].children[0], nodes[root].children[1]);
    // Every node but the root keeps its place; indices above the root shift.
    let map = |i: usize| if i > root { i - 1 } else { i };
    let node_leaf: Vec<Option<LeafId>> = nodes
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != root)
        .map(|(_, node)| node.leaf)
        .collect();
    let mut edges = Vec::with_capacity(nodes.len() - 2);
    for (i, node) in nodes.iter().enumerate() {
        match node.parent {
            Some(p) if p != root => edges.push(TopoEdge {
                a: map(p),
                b: map(i),
                length: Some(t.edge_length(i)),
                weight: Some(node.mutation_prob),
            }),
            _ => {}
        }
    }
    let (p1, p2) = (nodes[left].mutation_prob, nodes[right].mutation_prob);
    edges.push(TopoEdge {
        a: map(left),
        b: map(right),
        length: Some(t.edge_length(left) + t.edge_length(right)),
        weight: Some(1.0 - (1.0 - p1) * (1.0 - p2)),
    });
    WeightedTopology::from_edges(t.names().to_vec(), node_leaf, edges)
        .expect("root suppression of a valid rooted tree is a valid topology")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn leaf(parent: usize, id: usize, p: f64) -> EvoNode {
        EvoNode { parent: Some(parent), children: vec![], leaf: Some(LeafId(id)), mutation_prob: p }
    }

    /// root -> A, root -> u -> (B, C)
    fn three_leaf(p_a: f64, p_u: f64) -> RootedEvoTree {
        let nodes = vec![
            EvoNode { parent: None, children: vec![1, 2], leaf: None, mutation_prob: 0.0 },
            leaf(0, 0, p_a),
            EvoNode { parent: Some(0), children: vec![3, 4], leaf: None, mutation_prob: p_u },
            leaf(2, 1, 0.05),
            leaf(2, 2, 0.05),
        ];
        let names = vec!["A".into(), "B".into(), "C".into()];
        RootedEvoTree::from_nodes(nodes, 0, names, 4).unwrap()
    }

    #[test]
    fn three_leaf_tree_suppresses_to_star() {
        let topo = suppress_root(&three_leaf(0.1, 0.1));
        assert_eq!(topo.n_leaves(), 3);
        assert_eq!(topo.node_count(), 4);
        assert_eq!(topo.edge_count(), 3);
        assert!(topo.is_binary());
        topo.validate().unwrap();
        assert_eq!(topo.names(), &["A", "B", "C"]);
    }

    #[test]
    fn merged_root_edge_length_and_weight() {
        let topo = suppress_root(&three_leaf(0.1, 0.1));
        let e0 = topo.edges().last().unwrap();
        // -2 ln(1 - (4/3)(0.1)).
        assert!((e0.length.unwrap() - 0.286_201_687_281_346_6).abs() < 1e-12);
        assert!((e0.weight.unwrap() - 0.19).abs() < 1e-15);
    }

    #[test]
    fn rejects_out_of_range_probability() {
        let err = RootedEvoTree::from_nodes(
            three_leaf(0.1, 0.1).nodes().iter().cloned().map(|mut n| {
                if n.leaf == Some(LeafId(0)) {
                    n.mutation_prob = 0.8;
                }
                n
            }).collect(),
            0,
            vec!["A".into(), "B".into(), "C".into()],
            4,
        );
        assert!(err.is_err());
    }

    #[test]
    fn rejects_duplicate_names() {
        let t = three_leaf(0.1, 0.1);
        let err = RootedEvoTree::from_nodes(
            t.nodes().to_vec(),
            0,
            vec!["A".into(), "B".into(), "A".into()],
            4,
        )
        .unwrap_err();
        assert!(matches!(err, Error::DuplicateLeaf(_)));
    }

    #[test]
    fn node_closeness_multiplies_along_path() {
        let t = three_leaf(0.3, 0.3);
        let a = t.leaf_node(LeafId(0));
        let b = t.leaf_node(LeafId(1));
        let expected = 0.6 * 0.6 * (1.0 - 4.0 / 3.0 * 0.05);
        assert!((t.node_closeness(a, b) - expected).abs() < 1e-15);
        assert_eq!(t.node_closeness(a, a), 1.0);
    }

    #[test]
    fn path_length_sums_edges() {
        let topo = suppress_root(&three_leaf(0.1, 0.1));
        let a = topo.leaf_node(LeafId(0));
        let b = topo.leaf_node(LeafId(1));
        let d = topo.path_length(a, b).unwrap();
        let expected = 0.286_201_687_281_346_6 + -(1.0f64 - 4.0 / 3.0 * 0.05).ln();
        assert!((d - expected).abs() < 1e-12);
    }
}
