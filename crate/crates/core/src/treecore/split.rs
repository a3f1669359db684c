use std::collections::{BTreeSet, HashMap};

use super::{LeafId, TopoEdge, WeightedTopology};
use crate::error::{invalid, Error, Result};

/// One side of a leaf bipartition, stored as a bitset over leaf indices.
///
/// The stored side is always the one that does not contain leaf 0, so two
/// splits are equal exactly when they cut the leaf set the same way.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Split(Vec<u64>);

impl Split {
    fn empty(n: usize) -> Self {
        Split(vec![0; n.div_ceil(64)])
    }

    fn insert(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }

    fn union_with(&mut self, other: &Split) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a |= b;
        }
    }

    pub fn contains(&self, leaf: LeafId) -> bool {
        self.0[leaf.0 / 64] >> (leaf.0 % 64) & 1 == 1
    }

    pub fn len(&self) -> usize {
        self.0.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.0.iter().all(|&w| w == 0)
    }

    /// Leaves on the stored side, ascending.
    pub fn leaves(&self) -> impl Iterator<Item = LeafId> + '_ {
        self.0.iter().enumerate().flat_map(|(w, &bits)| {
            (0..64).filter(move |b| bits >> b & 1 == 1).map(move |b| LeafId(w * 64 + b))
        })
    }
}

/// The splits of all internal edges of a topology.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BipartitionSet {
    pub n_leaves: usize,
    pub splits: BTreeSet<Split>,
}

impl BipartitionSet {
    pub fn len(&self) -> usize {
        self.splits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.splits.is_empty()
    }

    pub fn symmetric_difference(&self, other: &BipartitionSet) -> usize {
        self.splits.symmetric_difference(&other.splits).count()
    }
}

/// Split of every edge of `t` (pendant edges included), indexed like
/// `t.edges()`. `order[i]` is the canonical index assigned to `t`'s leaf `i`.
fn splits_with_order(t: &WeightedTopology, order: &[usize]) -> Vec<Split> {
    let n = t.n_leaves();
    let zero = order.iter().position(|&o| o == 0).expect("leaf 0 present");
    let start = t.leaf_node(LeafId(zero));
    let nodes = t.node_count();

    // Iterative DFS from the leaf holding canonical index 0; a node's
    // subtree never contains it, so each subtree is already canonical.
    let mut parent_edge = vec![usize::MAX; nodes];
    let mut visited = vec![false; nodes];
    let mut order_out = Vec::with_capacity(nodes);
    let mut stack = vec![start];
    visited[start] = true;
    while let Some(u) = stack.pop() {
        order_out.push(u);
        for &(v, e) in t.neighbors(u) {
            if !visited[v] {
                visited[v] = true;
                parent_edge[v] = e;
                stack.push(v);
            }
        }
    }

    let mut below: Vec<Split> = vec![Split::empty(n); nodes];
    let mut result = vec![Split::empty(n); t.edge_count()];
    for &u in order_out.iter().rev() {
        if u == start {
            continue;
        }
        if let Some(leaf) = t.leaf_of(u) {
            below[u].insert(order[leaf.0]);
        }
        let e = parent_edge[u];
        let edge = &t.edges()[e];
        let parent = if edge.a == u { edge.b } else { edge.a };
        let mine = std::mem::replace(&mut below[u], Split::empty(0));
        below[parent].union_with(&mine);
        result[e] = mine;
    }
    result
}

fn identity_order(t: &WeightedTopology) -> Vec<usize> {
    (0..t.n_leaves()).collect()
}

/// Order mapping `t2`'s leaf indices onto `t1`'s, by name.
fn order_against(t1: &WeightedTopology, t2: &WeightedTopology) -> Result<Vec<usize>> {
    if t1.n_leaves() != t2.n_leaves() {
        return Err(Error::LeafSetMismatch(format!(
            "{} vs {} leaves",
            t1.n_leaves(),
            t2.n_leaves()
        )));
    }
    let index = t1.leaf_index();
    t2.names()
        .iter()
        .map(|name| {
            index
                .get(name.as_str())
                .map(|l| l.0)
                .ok_or_else(|| Error::LeafSetMismatch(format!("{name:?} only in second tree")))
        })
        .collect()
}

/// Canonical split of every edge, indexed like `t.edges()`.
pub fn edge_splits(t: &WeightedTopology) -> Vec<Split> {
    splits_with_order(t, &identity_order(t))
}

fn is_internal(t: &WeightedTopology, edge: &TopoEdge) -> bool {
    t.leaf_of(edge.a).is_none() && t.leaf_of(edge.b).is_none()
}

fn internal_splits(t: &WeightedTopology, order: &[usize]) -> BipartitionSet {
    let splits = splits_with_order(t, order);
    let set = t
        .edges()
        .iter()
        .zip(splits)
        .filter(|(edge, _)| is_internal(t, edge))
        .map(|(_, s)| s)
        .collect();
    BipartitionSet { n_leaves: t.n_leaves(), splits: set }
}

/// One split per internal edge of `t`.
pub fn bipartitions(t: &WeightedTopology) -> BipartitionSet {
    internal_splits(t, &identity_order(t))
}

/// Robinson-Foulds distance: size of the symmetric difference of the two
/// trees' internal splits. Leaves are matched by name.
pub fn rf_distance(t1: &WeightedTopology, t2: &WeightedTopology) -> Result<usize> {
    let order = order_against(t1, t2)?;
    let b1 = bipartitions(t1);
    let b2 = internal_splits(t2, &order);
    Ok(b1.symmetric_difference(&b2))
}

/// Same unrooted topology, ignoring lengths.
pub fn topology_matches(t1: &WeightedTopology, t2: &WeightedTopology) -> Result<bool> {
    Ok(rf_distance(t1, t2)? == 0)
}

/// For each edge of `estimate`, `|length - true length|` of the edge with
/// the same split in `truth`. Fails if a split is missing from `truth` or a
/// length is absent.
pub fn length_errors(estimate: &WeightedTopology, truth: &WeightedTopology) -> Result<Vec<f64>> {
    let order = order_against(truth, estimate)?;
    let truth_lengths: HashMap<Split, Option<f64>> = edge_splits(truth)
        .into_iter()
        .zip(truth.edges().iter().map(|e| e.length))
        .collect();
    splits_with_order(estimate, &order)
        .into_iter()
        .zip(estimate.edges())
        .map(|(split, edge)| {
            let want = truth_lengths
                .get(&split)
                .ok_or_else(|| invalid("estimate has an edge that truth lacks"))?
                .ok_or_else(|| invalid("truth edge has no length"))?;
            let got = edge.length.ok_or_else(|| invalid("estimate edge has no length"))?;
            Ok((got - want).abs())
        })
        .collect()
}

/// Largest per-edge length error; see [`length_errors`].
pub fn max_length_error(estimate: &WeightedTopology, truth: &WeightedTopology) -> Result<f64> {
    Ok(length_errors(estimate, truth)?.into_iter().fold(0.0, f64::max))
}

/// The subtree of `t` spanned by the named leaves, with every maximal
/// branchless path replaced by one edge (lengths summed). Leaf ids of the
/// result follow the order of `keep`.
pub fn restrict(t: &WeightedTopology, keep: &[&str]) -> Result<WeightedTopology> {
    let index = t.leaf_index();
    let mut kept = vec![false; t.node_count()];
    let mut leaf_of = vec![None; t.node_count()];
    for (i, name) in keep.iter().enumerate() {
        let leaf = index.get(name).ok_or_else(|| Error::UnknownLeaf((*name).to_string()))?;
        let node = t.leaf_node(*leaf);
        kept[node] = true;
        leaf_of[node] = Some(LeafId(i));
    }
    if keep.len() < 3 {
        return Err(invalid("restriction needs at least 3 leaves"));
    }

    // Keep a node iff it lies on a path between two kept leaves: root at a
    // kept leaf and keep every node with a kept descendant.
    let start = t.leaf_node(*index.get(keep[0]).expect("checked"));
    let mut parent = vec![usize::MAX; t.node_count()];
    let mut order = vec![];
    let mut stack = vec![start];
    parent[start] = start;
    while let Some(u) = stack.pop() {
        order.push(u);
        for &(v, _) in t.neighbors(u) {
            if parent[v] == usize::MAX {
                parent[v] = u;
                stack.push(v);
            }
        }
    }
    let mut has_kept = kept.clone();
    for &u in order.iter().rev() {
        if u != start && has_kept[u] {
            has_kept[parent[u]] = true;
        }
    }
    let degree = |u: usize| {
        t.neighbors(u).iter().filter(|&&(v, _)| has_kept[v] && has_kept[u]).count()
    };

    // Walk from each retained branching node (or leaf) toward the root,
    // skipping degree-2 nodes, to find the retained node above it.
    let retained: Vec<usize> =
        order.iter().copied().filter(|&u| has_kept[u] && (kept[u] || degree(u) >= 3)).collect();
    let mut new_index = vec![usize::MAX; t.node_count()];
    for (i, &u) in retained.iter().enumerate() {
        new_index[u] = i;
    }
    let length_of = |a: usize, b: usize| {
        t.neighbors(a).iter().find(|&&(v, _)| v == b).and_then(|&(_, e)| t.edges()[e].length)
    };
    let mut edges = vec![];
    for &u in &retained {
        if u == start {
            continue;
        }
        let mut total = Some(0.0);
        let mut cur = u;
        loop {
            let up = parent[cur];
            total = match (total, length_of(cur, up)) {
                (Some(acc), Some(l)) => Some(acc + l),
                _ => None,
            };
            cur = up;
            if new_index[cur] != usize::MAX {
                break;
            }
        }
        edges.push(TopoEdge { a: new_index[cur], b: new_index[u], length: total, weight: None });
    }
    let node_leaf = retained.iter().map(|&u| leaf_of[u]).collect();
    WeightedTopology::from_edges(keep.iter().map(|s| s.to_string()).collect(), node_leaf, edges)
}
