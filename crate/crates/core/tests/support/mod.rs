//! Brute-force oracles shared by the integration and acceptance tests.
//! The oracles read the true rooted tree directly; [`audit_run`] drives a
//! reconstruction and compares each intermediate state against them.
#![allow(dead_code)]

use hgt_core::distmat::DistanceMatrix;
use hgt_core::evolve::{exact_distance_matrix, gen_tree, EdgeProbSampler, EvoModel, TreeShape};
use hgt_core::hgt::{delta_min_for, edge_side_leaves, split_edge, ReconTree, Reconstruction, SplitOutcome};
use hgt_core::treecore::{
    max_length_error, restrict, suppress_root, topology_matches, EvoNode, LeafId, RootedEvoTree,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn model() -> EvoModel {
    EvoModel::new(4, 0.05, 0.1).unwrap()
}

pub fn default_delta_min(model: &EvoModel) -> f64 {
    delta_min_for(model, 0.25)
}

pub fn random_tree(n: usize, shape: TreeShape, seed: u64) -> RootedEvoTree {
    let m = model();
    gen_tree(n, shape, &m, EdgeProbSampler::default_for(&m), seed).unwrap()
}

/// Every unrooted binary topology on `n` leaves, each rooted on the pendant
/// edge of leaf 0, with edge probabilities drawn uniformly in `[lo, hi]`.
///
/// Leaves 1..n are placed by stepwise addition: leaf k goes above any of
/// the 2k-3 nodes of the tree on leaves 1..k, which yields each rooted
/// topology on those leaves exactly once.
pub fn all_topologies(n: usize, lo: f64, hi: f64, seed: u64) -> Vec<RootedEvoTree> {
    assert!(n >= 3);
    // Arena of (parent, children, leaf) for the subtree on leaves 1..n.
    #[derive(Clone)]
    struct Partial {
        parent: Vec<Option<usize>>,
        children: Vec<Vec<usize>>,
        leaf: Vec<Option<usize>>,
        root: usize,
    }
    let start = Partial {
        parent: vec![None, Some(0), Some(0)],
        children: vec![vec![1, 2], vec![], vec![]],
        leaf: vec![None, Some(1), Some(2)],
        root: 0,
    };
    let mut layer = vec![start];
    for k in 3..n {
        let mut next = vec![];
        for p in &layer {
            for v in 0..p.parent.len() {
                let mut q = p.clone();
                let w = q.parent.len();
                let leaf = w + 1;
                q.parent.push(p.parent[v]);
                q.children.push(vec![v, leaf]);
                q.leaf.push(None);
                q.parent.push(Some(w));
                q.children.push(vec![]);
                q.leaf.push(Some(k));
                match p.parent[v] {
                    Some(u) => {
                        let slot = q.children[u].iter_mut().find(|c| **c == v).unwrap();
                        *slot = w;
                    }
                    None => q.root = w,
                }
                q.parent[v] = Some(w);
                next.push(q);
            }
        }
        layer = next;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let names: Vec<String> = (0..n).map(|i| format!("t{i}")).collect();
    layer
        .into_iter()
        .map(|p| {
            // New root with children: leaf 0 and the partial root.
            let off = 2;
            let mut nodes = vec![
                EvoNode { parent: None, children: vec![1, p.root + off], leaf: None, mutation_prob: 0.0 },
                EvoNode { parent: Some(0), children: vec![], leaf: Some(LeafId(0)), mutation_prob: 0.0 },
            ];
            for i in 0..p.parent.len() {
                nodes.push(EvoNode {
                    parent: Some(p.parent[i].map_or(0, |u| u + off)),
                    children: p.children[i].iter().map(|c| c + off).collect(),
                    leaf: p.leaf[i].map(LeafId),
                    mutation_prob: 0.0,
                });
            }
            for node in nodes.iter_mut().skip(1) {
                node.mutation_prob = rng.random_range(lo..=hi);
            }
            RootedEvoTree::from_nodes(nodes, 0, names.clone(), 4).unwrap()
        })
        .collect()
}

/// Number of edges on the path between two nodes.
pub fn hops(t: &RootedEvoTree, u: usize, v: usize) -> usize {
    t.path(u, v).len() - 1
}

/// The node where the paths between three leaves meet.
pub fn true_center(t: &RootedEvoTree, x: usize, y: usize, z: usize) -> usize {
    let [a, b, c] = [x, y, z].map(|l| t.leaf_node(LeafId(l)));
    let pab = t.path(a, b);
    let pac = t.path(a, c);
    let pbc = t.path(b, c);
    let common: Vec<usize> =
        pab.iter().copied().filter(|u| pac.contains(u) && pbc.contains(u)).collect();
    assert_eq!(common.len(), 1, "three distinct leaves meet at one node");
    common[0]
}

/// Node of the true tree that a reconstruction node stands for: the leaf
/// itself, or the center of its defining triplet.
pub fn image(t: &RootedEvoTree, r: &ReconTree, node: usize) -> usize {
    let rn = &r.nodes()[node];
    match rn.leaf {
        Some(leaf) => t.leaf_node(leaf),
        None => {
            let d = rn.def();
            true_center(t, d[0], d[1], d[2])
        }
    }
}

/// Exact distance between two nodes of the true tree.
pub fn node_distance(t: &RootedEvoTree, u: usize, v: usize) -> f64 {
    -t.node_closeness(u, v).ln()
}

/// Where the true center of `n x y` lies relative to the true path
/// between the images of `p1` and `p2`, with exact split lengths.
pub fn truth_outcome(
    t: &RootedEvoTree,
    r: &ReconTree,
    (p1, p2): (usize, usize),
    [n, x, y]: [usize; 3],
) -> SplitOutcome {
    let (a, b) = (image(t, r, p1), image(t, r, p2));
    let c = true_center(t, n, x, y);
    if c == a || c == b {
        return SplitOutcome::TooClose;
    }
    if !t.path(a, b).contains(&c) {
        return SplitOutcome::Outside;
    }
    SplitOutcome::Split {
        d1: node_distance(t, a, c),
        d2: node_distance(t, c, b),
        d_np: node_distance(t, c, t.leaf_node(LeafId(n))),
    }
}

pub fn exact(t: &RootedEvoTree) -> DistanceMatrix {
    exact_distance_matrix(t)
}

/// What a checked run covered, and every violation found.
#[derive(Debug, Default)]
pub struct Audit {
    pub runs: usize,
    /// Relevant triplets classified.
    pub triplets: usize,
    /// TooClose, Outside, Split counts among them.
    pub by_kind: [usize; 3],
    pub violations: usize,
    /// The first few violations, for the failure message.
    pub examples: Vec<String>,
}

impl Audit {
    fn fail(&mut self, msg: String) {
        self.violations += 1;
        if self.examples.len() < 20 {
            self.examples.push(msg);
        }
    }
}

/// Every relevant triplet on every edge of the current tree, classified by
/// split_edge and by the oracle.
fn audit_classification(
    t: &RootedEvoTree,
    d: &DistanceMatrix,
    run: &Reconstruction,
    delta_min: f64,
    audit: &mut Audit,
) {
    let r = run.tree();
    let edges: Vec<(usize, usize)> = r.edges().map(|(a, b, _)| (a, b)).collect();
    for (a, b) in edges {
        for (p1, p2) in [(a, b), (b, a)] {
            let (side1, _) = edge_side_leaves(r, p1, p2).unwrap();
            let on1 = |x: usize| side1.contains(&LeafId(x));
            for &x in r.nodes()[p1].def() {
                for &y in r.nodes()[p2].def() {
                    if x == y || on1(x) == on1(y) {
                        continue;
                    }
                    for &n in run.outside() {
                        let got = match split_edge(r, (p1, p2), [n, x, y], d, delta_min) {
                            Ok(got) => got,
                            Err(e) => {
                                audit.fail(format!("split_edge rejected a relevant triplet: {e}"));
                                continue;
                            }
                        };
                        let want = truth_outcome(t, r, (p1, p2), [n, x, y]);
                        audit.triplets += 1;
                        let agree = match (got, want) {
                            (SplitOutcome::TooClose, SplitOutcome::TooClose) => {
                                audit.by_kind[0] += 1;
                                true
                            }
                            (SplitOutcome::Outside, SplitOutcome::Outside) => {
                                audit.by_kind[1] += 1;
                                true
                            }
                            (
                                SplitOutcome::Split { d1, d2, d_np },
                                SplitOutcome::Split { d1: e1, d2: e2, d_np: enp },
                            ) => {
                                audit.by_kind[2] += 1;
                                let star = r.edge_length(p1, p2).unwrap();
                                if (d1 + d2 - star).abs() > 1e-12 {
                                    audit.fail(format!("split identity off by {}", d1 + d2 - star));
                                }
                                (d1 - e1).abs() < 1e-9 && (d2 - e2).abs() < 1e-9 && (d_np - enp).abs() < 1e-9
                            }
                            _ => false,
                        };
                        if !agree {
                            audit.fail(format!("edge {p1}-{p2}, triplet {n} {x} {y}: got {got:?}, want {want:?}"));
                        }
                    }
                }
            }
        }
    }
}

/// Drives one reconstruction on exact distances and checks every
/// intermediate tree: structure, the partial tree against the restricted
/// truth, candidates against the oracle, and optionally every relevant
/// triplet.
pub fn audit_run(t: &RootedEvoTree, classify: bool, audit: &mut Audit) {
    let delta_min = default_delta_min(&model());
    let d = exact(t);
    let truth = suppress_root(t);
    let names = t.names();
    let mut run = match Reconstruction::start(&d, delta_min) {
        Ok(run) => run,
        Err(e) => return audit.fail(format!("start failed: {e}")),
    };
    // Each star edge has a leaf end, so two (x, y) pairs per outside leaf.
    if run.stats().split_edge_calls != 6 * (t.n_leaves() as u64 - 3) {
        audit.fail(format!("initial update made {} calls", run.stats().split_edge_calls));
    }
    loop {
        if let Err(e) = run.check_invariants() {
            audit.fail(e);
        }
        let partial = run.tree().to_topology(names);
        let keep: Vec<&str> = partial.names().iter().map(String::as_str).collect();
        let restricted = restrict(&truth, &keep).unwrap();
        if !topology_matches(&partial, &restricted).unwrap() {
            audit.fail(format!("partial tree on {} leaves differs from the truth", keep.len()));
        } else if max_length_error(&partial, &restricted).unwrap() >= 1e-9 {
            audit.fail("partial tree lengths differ from the truth".into());
        }
        for tuple in run.candidates().iter() {
            let want = truth_outcome(t, run.tree(), (tuple.p1, tuple.p2), [tuple.n, tuple.x, tuple.y]);
            if !matches!(want, SplitOutcome::Split { .. }) {
                audit.fail(format!("candidate {tuple:?} does not split its edge"));
            }
        }
        if classify {
            audit_classification(t, &d, &run, delta_min, audit);
        }
        match run.step() {
            Ok(Some(_)) => {}
            Ok(None) => break,
            Err(e) => return audit.fail(format!("run failed: {e}")),
        }
    }
    audit.runs += 1;
}

fn harmonic(a: f64, b: f64, c: f64) -> f64 {
    3.0 / (1.0 / a + 1.0 / b + 1.0 / c)
}

/// For every triplet, with its leaves ordered by exact closeness to the
/// center so that `c_XP <= c_YP <= c_ZP`: `c_XY <= c_XZ <= c_YZ`,
/// `c_XZ >= (2/3) c_XYZ` and `c_YP^2 >= c_XYZ / 3`.
/// Returns (triplets checked, violations).
pub fn audit_closeness_orderings(t: &RootedEvoTree) -> (usize, usize) {
    let n = t.n_leaves();
    let leaf = |l: usize| t.leaf_node(LeafId(l));
    let c = |a: usize, b: usize| t.node_closeness(leaf(a), leaf(b));
    let (mut checked, mut bad) = (0, 0);
    for a in 0..n {
        for b in a + 1..n {
            for e in b + 1..n {
                let p = true_center(t, a, b, e);
                let mut v = [a, b, e].map(|l| (t.node_closeness(leaf(l), p), l));
                v.sort_by(|u, w| u.partial_cmp(w).unwrap());
                let [(_, x), (cyp, y), (_, z)] = v;
                let (cxy, cxz, cyz) = (c(x, y), c(x, z), c(y, z));
                let cxyz = harmonic(cxy, cxz, cyz);
                let tol = 1e-12;
                let ok = cxy <= cxz + tol
                    && cxz <= cyz + tol
                    && cxz >= 2.0 / 3.0 * cxyz - tol
                    && cyp * cyp >= cxyz / 3.0 - tol;
                checked += 1;
                bad += usize::from(!ok);
            }
        }
    }
    (checked, bad)
}

/// g-depth by cutting every edge and searching both sides for the nearest
/// leaf.
pub fn brute_g_depth(t: &RootedEvoTree) -> usize {
    let nodes = t.nodes();
    let leaves: Vec<usize> = (0..t.n_leaves()).map(|l| t.leaf_node(LeafId(l))).collect();
    let mut depth = 0;
    for v in (0..nodes.len()).filter(|&v| v != t.root()) {
        let u = nodes[v].parent.unwrap();
        // Nearest leaf to `from` among leaves whose path avoids `banned`.
        let nearest = |from: usize, banned: usize| {
            leaves
                .iter()
                .map(|&l| t.path(from, l))
                .filter(|p| !p.contains(&banned))
                .map(|p| p.len() - 1)
                .min()
                .unwrap()
        };
        depth = depth.max(nearest(u, v).max(nearest(v, u)));
    }
    depth
}

/// The two g-depth facts: the tree's g-depth `d` is at most
/// `1 + floor(log2(n - 1))`, and every internal non-root node is the
/// center of a triplet whose leaves are each within `d + 1` edges.
/// Returns (nodes checked, violations).
pub fn audit_g_depth(t: &RootedEvoTree) -> (usize, usize) {
    let n = t.n_leaves();
    let d = brute_g_depth(t);
    let mut bad = usize::from(d > 1 + (n as f64 - 1.0).log2().floor() as usize);
    bad += usize::from(d != hgt_core::treecore::g_depth(t));
    let nodes = t.nodes();
    let mut checked = 0;
    for p in (0..nodes.len()).filter(|&p| p != t.root() && nodes[p].leaf.is_none()) {
        // Nearest leaf through each of the three neighbours of p.
        let mut nearest = std::collections::BTreeMap::new();
        for l in 0..n {
            let path = t.path(p, t.leaf_node(LeafId(l)));
            let e = nearest.entry(path[1]).or_insert((usize::MAX, l));
            if path.len() - 1 < e.0 {
                *e = (path.len() - 1, l);
            }
        }
        let picks: Vec<(usize, usize)> = nearest.into_values().collect();
        let ok = picks.len() == 3
            && true_center(t, picks[0].1, picks[1].1, picks[2].1) == p
            && picks.iter().all(|&(h, _)| h <= d + 1);
        checked += 1;
        bad += usize::from(!ok);
    }
    (checked, bad)
}

/// Every topology on 4 to 7 leaves plus random trees of every shape on 8
/// to 12 leaves.
pub fn small_trees(per_size: u64) -> Vec<RootedEvoTree> {
    let mut trees = vec![];
    for n in 4..=7 {
        trees.extend(all_topologies(n, 0.05, 0.1, 31 * n as u64));
    }
    for n in 8..=12 {
        for seed in 0..per_size {
            let shape = [TreeShape::Uniform, TreeShape::YuleHarding, TreeShape::Caterpillar, TreeShape::Balanced]
                [seed as usize % 4];
            trees.push(random_tree(n, shape, 1000 * n as u64 + seed));
        }
    }
    trees
}
