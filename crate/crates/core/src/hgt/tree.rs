use arrayvec::ArrayVec;

use crate::distmat::DistanceMatrix;
use crate::treecore::{LeafId, TopoEdge, WeightedTopology};

/// A node of the tree under construction.
///
/// Internal nodes record the triplet that created them (`def`) and that
/// triplet's three center legs, computed once at insertion.
#[derive(Debug, Clone)]
pub struct ReconNode {
    pub leaf: Option<LeafId>,
    pub adj: ArrayVec<(usize, f64), 3>,
    def: [usize; 3],
    legs: [f64; 3],
}

impl ReconNode {
    /// `def` as leaf indices: the leaf itself, or the creating triplet.
    pub fn def(&self) -> &[usize] {
        match self.leaf {
            Some(_) => &self.def[..1],
            None => &self.def,
        }
    }

    /// Estimated distance from def leaf `x` to this node: 0 for a leaf,
    /// otherwise the center leg of `x` in the creating triplet.
    pub fn leg(&self, x: usize) -> Option<f64> {
        let i = self.def().iter().position(|&d| d == x)?;
        Some(if self.leaf.is_some() { 0.0 } else { self.legs[i] })
    }
}

/// The partial reconstruction: an unrooted tree whose internal nodes have
/// degree 3 and whose edges carry estimated lengths.
#[derive(Debug, Clone)]
pub struct ReconTree {
    nodes: Vec<ReconNode>,
    leaf_node: Vec<Option<usize>>,
}

/// Center legs of X, Y, Z in triplet XYZ.
pub(crate) fn triplet_legs(d: &DistanceMatrix, x: usize, y: usize, z: usize) -> [f64; 3] {
    let (dxy, dxz, dyz) = (d.finite_distance(x, y), d.finite_distance(x, z), d.finite_distance(y, z));
    [(dxy + dxz - dyz) / 2.0, (dxy + dyz - dxz) / 2.0, (dxz + dyz - dxy) / 2.0]
}

impl ReconTree {
    /// The star on a positive triplet, center legs as edge lengths.
    pub(crate) fn star(n_leaves: usize, d: &DistanceMatrix, abc: [usize; 3]) -> Self {
        let legs = triplet_legs(d, abc[0], abc[1], abc[2]);
        let mut t = Self { nodes: Vec::with_capacity(2 * n_leaves - 2), leaf_node: vec![None; n_leaves] };
        let center = t.push(None, abc, legs);
        for (i, &x) in abc.iter().enumerate() {
            let leaf = t.push(Some(x), [x; 3], [0.0; 3]);
            t.link(center, leaf, legs[i]);
        }
        t
    }

    fn push(&mut self, leaf: Option<usize>, def: [usize; 3], legs: [f64; 3]) -> usize {
        let id = self.nodes.len();
        if let Some(x) = leaf {
            self.leaf_node[x] = Some(id);
        }
        self.nodes.push(ReconNode { leaf: leaf.map(LeafId), adj: ArrayVec::new(), def, legs });
        id
    }

    fn link(&mut self, a: usize, b: usize, length: f64) {
        self.nodes[a].adj.push((b, length));
        self.nodes[b].adj.push((a, length));
    }

    /// Replaces edge `p1 p2` by `p1 P`, `P p2` and hangs leaf `n` from the
    /// new node `P`, whose def is `{n, x, y}`. Returns `P`.
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn insert(
        &mut self,
        d: &DistanceMatrix,
        p1: usize,
        p2: usize,
        [n, x, y]: [usize; 3],
        d1: f64,
        d2: f64,
        d_np: f64,
    ) -> usize {
        let legs = triplet_legs(d, n, x, y);
        let p = self.push(None, [n, x, y], legs);
        let leaf = self.push(Some(n), [n; 3], [0.0; 3]);
        for (a, b, len) in [(p1, p2, d1), (p2, p1, d2)] {
            let slot = self.nodes[a].adj.iter_mut().find(|e| e.0 == b).expect("edge exists");
            *slot = (p, len);
            self.nodes[p].adj.push((a, len));
        }
        self.link(p, leaf, d_np);
        p
    }

    pub fn nodes(&self) -> &[ReconNode] {
        &self.nodes
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Node holding leaf `x`, if inserted.
    pub fn leaf_node(&self, x: usize) -> Option<usize> {
        self.leaf_node.get(x).copied().flatten()
    }

    pub fn contains_leaf(&self, x: usize) -> bool {
        self.leaf_node(x).is_some()
    }

    pub fn n_inserted(&self) -> usize {
        self.leaf_node.iter().filter(|n| n.is_some()).count()
    }

    pub fn edge_length(&self, a: usize, b: usize) -> Option<f64> {
        self.nodes.get(a)?.adj.iter().find(|e| e.0 == b).map(|e| e.1)
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.edge_length(a, b).is_some()
    }

    /// Every edge once, as `(a, b, length)` with `a < b`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.nodes.iter().enumerate().flat_map(|(a, node)| {
            node.adj.iter().filter(move |e| a < e.0).map(move |&(b, len)| (a, b, len))
        })
    }

    /// The inserted leaves as a [`WeightedTopology`], leaf ids in index
    /// order of `names` restricted to inserted leaves.
    pub fn to_topology(&self, names: &[String]) -> WeightedTopology {
        let inserted: Vec<usize> = (0..self.leaf_node.len()).filter(|&x| self.contains_leaf(x)).collect();
        let mut rank = vec![usize::MAX; self.leaf_node.len()];
        for (r, &x) in inserted.iter().enumerate() {
            rank[x] = r;
        }
        let node_leaf = self.nodes.iter().map(|n| n.leaf.map(|l| LeafId(rank[l.0]))).collect();
        let edges = self
            .edges()
            .map(|(a, b, len)| TopoEdge { a, b, length: Some(len), weight: None })
            .collect();
        let names = inserted.iter().map(|&x| names[x].clone()).collect();
        WeightedTopology::from_edges(names, node_leaf, edges).expect("reconstruction is a tree")
    }
}

/// Which side of an edge each node lies on, from one traversal.
///
/// The stamp buffer is reused across edges: a node is on the `q1` side iff
/// its stamp equals the current epoch.
#[derive(Debug, Default, Clone)]
pub struct EdgeSides {
    stamp: Vec<u32>,
    epoch: u32,
    stack: Vec<(usize, usize)>,
    q1: usize,
    q2: usize,
}

impl EdgeSides {
    pub fn mark(&mut self, t: &ReconTree, q1: usize, q2: usize) {
        if self.stamp.len() < t.node_count() {
            self.stamp.resize(t.node_count(), 0);
        }
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.stamp.fill(0);
            self.epoch = 1;
        }
        self.q1 = q1;
        self.q2 = q2;
        self.stack.clear();
        self.stack.push((q1, q2));
        while let Some((u, from)) = self.stack.pop() {
            self.stamp[u] = self.epoch;
            for &(v, _) in &t.nodes[u].adj {
                if v != from {
                    self.stack.push((v, u));
                }
            }
        }
    }

    /// The edge last marked.
    pub fn edge(&self) -> (usize, usize) {
        (self.q1, self.q2)
    }

    #[inline]
    pub fn on_q1_side(&self, node: usize) -> bool {
        self.stamp[node] == self.epoch
    }
}

/// Inserted leaves on each side of edge `q1 q2`, each list ascending.
/// `None` if the edge does not exist.
pub fn edge_side_leaves(t: &ReconTree, q1: usize, q2: usize) -> Option<(Vec<LeafId>, Vec<LeafId>)> {
    if !t.has_edge(q1, q2) {
        return None;
    }
    let mut sides = EdgeSides::default();
    sides.mark(t, q1, q2);
    let (mut a, mut b) = (vec![], vec![]);
    for x in 0..t.leaf_node.len() {
        if let Some(node) = t.leaf_node(x) {
            if sides.on_q1_side(node) {
                a.push(LeafId(x));
            } else {
                b.push(LeafId(x));
            }
        }
    }
    Some((a, b))
}
