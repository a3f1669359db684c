//! Generalized Jukes-Cantor simulation: random rooted trees, sequences
//! evolved down them, and the exact closeness oracle.

mod fasta;
mod patterns;

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::distmat::DistanceMatrix;
use crate::error::{invalid, Error, Result};
use crate::treecore::{EvoNode, LeafId, RootedEvoTree};

pub use fasta::{read_fasta, write_fasta};
pub use patterns::{pattern_probabilities, site_pattern_counts, SitePatterns, MAX_PATTERNS};

/// Sites simulated per RNG substream.
pub const BLOCK_SITES: usize = 4096;

/// Alphabet size and the mutation-probability bounds `f <= p_e <= g`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvoModel {
    m: usize,
    f: f64,
    g: f64,
}

impl EvoModel {
    pub fn new(m: usize, f: f64, g: f64) -> Result<Self> {
        if m < 2 {
            return Err(invalid(format!("alphabet size must be at least 2, got {m}")));
        }
        let upper = 1.0 - 1.0 / m as f64;
        if !(f > 0.0 && f <= g && g < upper) {
            return Err(invalid(format!("need 0 < f <= g < {upper}, got f = {f}, g = {g}")));
        }
        Ok(Self { m, f, g })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn f(&self) -> f64 {
        self.f
    }

    pub fn g(&self) -> f64 {
        self.g
    }

    /// `m / (m - 1)`.
    pub fn alpha(&self) -> f64 {
        self.m as f64 / (self.m as f64 - 1.0)
    }

    pub fn alphabet(&self) -> Alphabet {
        Alphabet::for_size(self.m).expect("validated size")
    }
}

const GENERIC_SYMBOLS: &[u8] = b"ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789";

/// Printable symbols for an alphabet of size `m`. Sequences are stored as
/// symbol indices; the alphabet is only consulted for text I/O.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alphabet {
    symbols: Vec<u8>,
}

impl Alphabet {
    /// `ACGT` for `m = 4`, otherwise the first `m` of `A..Z a..z 0..9`.
    pub fn for_size(m: usize) -> Result<Self> {
        if m == 4 {
            return Ok(Self { symbols: b"ACGT".to_vec() });
        }
        if !(2..=GENERIC_SYMBOLS.len()).contains(&m) {
            return Err(invalid(format!(
                "alphabet size must be in 2..={}, got {m}",
                GENERIC_SYMBOLS.len()
            )));
        }
        Ok(Self { symbols: GENERIC_SYMBOLS[..m].to_vec() })
    }

    pub fn size(&self) -> usize {
        self.symbols.len()
    }

    pub fn symbol(&self, index: u8) -> u8 {
        self.symbols[index as usize]
    }

    /// Index of a symbol. Letters match case-insensitively when the
    /// alphabet has no lowercase symbols of its own.
    pub fn index_of(&self, symbol: u8) -> Option<u8> {
        let exact = self.symbols.iter().position(|&s| s == symbol);
        let folded = || {
            if self.size() <= 26 {
                let upper = symbol.to_ascii_uppercase();
                self.symbols.iter().position(|&s| s == upper)
            } else {
                None
            }
        };
        exact.or_else(folded).map(|i| i as u8)
    }

    pub fn encode(&self, text: &str) -> Result<Vec<u8>> {
        text.bytes()
            .map(|b| {
                self.index_of(b)
                    .ok_or_else(|| invalid(format!("symbol {:?} not in alphabet", b as char)))
            })
            .collect()
    }

    pub fn decode(&self, seq: &[u8]) -> String {
        seq.iter().map(|&i| self.symbol(i) as char).collect()
    }
}

/// One sequence per leaf, all of the same length, stored as symbol indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SequenceSet {
    names: Vec<String>,
    alphabet: Alphabet,
    seqs: Vec<Vec<u8>>,
}

impl SequenceSet {
    pub fn new(names: Vec<String>, alphabet: Alphabet, seqs: Vec<Vec<u8>>) -> Result<Self> {
        if names.len() != seqs.len() {
            return Err(invalid("one sequence per name required"));
        }
        let Some(first) = seqs.first() else {
            return Err(invalid("empty sequence set"));
        };
        let ell = first.len();
        if ell == 0 {
            return Err(Error::EmptySequence);
        }
        for s in &seqs {
            if s.len() != ell {
                return Err(Error::LengthMismatch(ell, s.len()));
            }
            if s.iter().any(|&x| x as usize >= alphabet.size()) {
                return Err(invalid("symbol index outside the alphabet"));
            }
        }
        Ok(Self { names, alphabet, seqs })
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn n_taxa(&self) -> usize {
        self.seqs.len()
    }

    pub fn len(&self) -> usize {
        self.seqs[0].len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn seq(&self, i: usize) -> &[u8] {
        &self.seqs[i]
    }

    pub fn seqs(&self) -> &[Vec<u8>] {
        &self.seqs
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TreeShape {
    /// Uniform over labeled rooted binary trees.
    Uniform,
    /// Repeatedly split a uniformly chosen leaf.
    YuleHarding,
    /// Every internal node has a leaf child.
    Caterpillar,
    /// Leaf sets halved recursively.
    Balanced,
}

impl FromStr for TreeShape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "uniform" => Ok(Self::Uniform),
            "yule" | "yule_harding" => Ok(Self::YuleHarding),
            "caterpillar" => Ok(Self::Caterpillar),
            "balanced" => Ok(Self::Balanced),
            _ => Err(invalid(format!("unknown tree shape {s:?}"))),
        }
    }
}

impl fmt::Display for TreeShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Uniform => "uniform",
            Self::YuleHarding => "yule_harding",
            Self::Caterpillar => "caterpillar",
            Self::Balanced => "balanced",
        })
    }
}

/// Distribution of edge mutation probabilities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EdgeProbSampler {
    Uniform { lo: f64, hi: f64 },
    Constant(f64),
}

impl EdgeProbSampler {
    /// Uniform on `[f, g]`.
    pub fn default_for(model: &EvoModel) -> Self {
        Self::Uniform { lo: model.f, hi: model.g }
    }

    fn range(&self) -> (f64, f64) {
        match *self {
            Self::Uniform { lo, hi } => (lo, hi),
            Self::Constant(p) => (p, p),
        }
    }

    fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        match *self {
            Self::Uniform { lo, hi } if lo < hi => rng.random_range(lo..=hi),
            Self::Uniform { lo, .. } => lo,
            Self::Constant(p) => p,
        }
    }
}

/// Arena used while growing a tree.
struct Growing {
    parent: Vec<Option<usize>>,
    children: Vec<Vec<usize>>,
    leaf: Vec<Option<usize>>,
    root: usize,
}

impl Growing {
    fn single_leaf() -> Self {
        Self { parent: vec![None], children: vec![vec![]], leaf: vec![Some(0)], root: 0 }
    }

    fn push(&mut self, parent: Option<usize>, leaf: Option<usize>) -> usize {
        self.parent.push(parent);
        self.children.push(vec![]);
        self.leaf.push(leaf);
        self.parent.len() - 1
    }

    /// Subdivides the edge above `v` (or grows a new root above it) and
    /// hangs a new leaf from the new node.
    fn attach_above(&mut self, v: usize, leaf_id: usize) {
        let above = self.parent[v];
        let w = self.push(above, None);
        let l = self.push(Some(w), Some(leaf_id));
        match above {
            Some(p) => {
                let slot = self.children[p].iter().position(|&c| c == v).expect("linked");
                self.children[p][slot] = w;
            }
            None => self.root = w,
        }
        self.parent[v] = Some(w);
        self.children[w] = vec![v, l];
    }

    fn caterpillar(n: usize) -> Self {
        // Build bottom-up: (t_{n-2}, t_{n-1}) is the deepest cherry.
        let mut g = Self::single_leaf();
        g.leaf[0] = Some(n - 1);
        for id in (0..n - 1).rev() {
            let top = g.root;
            g.attach_above(top, id);
            g.children[g.root].reverse();
        }
        g
    }

    fn balanced(n: usize) -> Self {
        let mut g = Self { parent: vec![], children: vec![], leaf: vec![], root: 0 };
        // (node, first leaf id, leaf count)
        g.push(None, None);
        let mut stack = vec![(0, 0, n)];
        while let Some((node, first, count)) = stack.pop() {
            if count == 1 {
                g.leaf[node] = Some(first);
                continue;
            }
            let left = count.div_ceil(2);
            let a = g.push(Some(node), None);
            let b = g.push(Some(node), None);
            g.children[node] = vec![a, b];
            stack.push((b, first + left, count - left));
            stack.push((a, first, left));
        }
        g
    }
}

/// Random rooted binary tree on `n` leaves named `t0..t{n-1}` with edge
/// probabilities drawn from `sampler`. Deterministic in `seed`.
pub fn gen_tree(
    n: usize,
    shape: TreeShape,
    model: &EvoModel,
    sampler: EdgeProbSampler,
    seed: u64,
) -> Result<RootedEvoTree> {
    if n < 3 {
        return Err(invalid(format!("need at least 3 leaves, got {n}")));
    }
    let (lo, hi) = sampler.range();
    if !(lo <= hi && lo >= model.f && hi <= model.g) {
        return Err(invalid(format!(
            "sampler range [{lo}, {hi}] is not inside [{}, {}]",
            model.f, model.g
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut grown = match shape {
        TreeShape::Uniform => {
            let mut g = Growing::single_leaf();
            for id in 1..n {
                // 2k-1 nodes: each edge plus the slot above the root.
                let v = rng.random_range(0..g.parent.len());
                g.attach_above(v, id);
            }
            g
        }
        TreeShape::YuleHarding => {
            let mut g = Growing::single_leaf();
            let mut leaves = vec![0];
            for id in 1..n {
                let v = leaves[rng.random_range(0..leaves.len())];
                g.attach_above(v, id);
                leaves.push(g.parent.len() - 1);
            }
            g
        }
        TreeShape::Caterpillar => Growing::caterpillar(n),
        TreeShape::Balanced => Growing::balanced(n),
    };
    if matches!(shape, TreeShape::Uniform | TreeShape::YuleHarding) {
        let mut labels: Vec<usize> = (0..n).collect();
        labels.shuffle(&mut rng);
        for leaf in grown.leaf.iter_mut().flatten() {
            *leaf = labels[*leaf];
        }
    }
    let nodes = (0..grown.parent.len())
        .map(|i| EvoNode {
            parent: grown.parent[i],
            children: std::mem::take(&mut grown.children[i]),
            leaf: grown.leaf[i].map(LeafId),
            mutation_prob: if i == grown.root { 0.0 } else { sampler.sample(&mut rng) },
        })
        .collect();
    let names = (0..n).map(|i| format!("t{i}")).collect();
    RootedEvoTree::from_nodes(nodes, grown.root, names, model.m)
}

fn block_rng(seed: u64, block: usize, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((block as u64) << 32) | stream);
    rng
}

/// Evolves `ell` independent sites down `t`.
///
/// The root sequence is `root_seq` if given (symbol indices), otherwise
/// uniform. Sites are simulated in blocks of [`BLOCK_SITES`]; in block `b`
/// the root draws from ChaCha8 stream `b << 32` and the edge above node `v`
/// from stream `(b << 32) | (v + 1)`, so the output does not depend on how
/// blocks are scheduled across threads.
pub fn evolve_sequences(
    t: &RootedEvoTree,
    ell: usize,
    seed: u64,
    root_seq: Option<&[u8]>,
) -> Result<SequenceSet> {
    if ell == 0 {
        return Err(Error::EmptySequence);
    }
    let m = t.alphabet_size();
    if let Some(root) = root_seq {
        if root.len() != ell {
            return Err(Error::LengthMismatch(ell, root.len()));
        }
        if root.iter().any(|&s| s as usize >= m) {
            return Err(invalid("root sequence symbol outside the alphabet"));
        }
    }
    let order = t.preorder();
    let nodes = t.nodes();
    let n = t.n_leaves();
    let blocks = ell.div_ceil(BLOCK_SITES);

    let per_block: Vec<Vec<Vec<u8>>> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let start = b * BLOCK_SITES;
            let len = BLOCK_SITES.min(ell - start);
            let mut seq = vec![Vec::new(); nodes.len()];
            seq[t.root()] = match root_seq {
                Some(root) => root[start..start + len].to_vec(),
                None => {
                    let mut rng = block_rng(seed, b, 0);
                    (0..len).map(|_| rng.random_range(0..m) as u8).collect()
                }
            };
            for &v in &order[1..] {
                let parent = nodes[v].parent.expect("non-root");
                let p = nodes[v].mutation_prob;
                let mut rng = block_rng(seed, b, v as u64 + 1);
                let child: Vec<u8> = seq[parent]
                    .iter()
                    .map(|&s| {
                        if rng.random::<f64>() < p {
                            let r = rng.random_range(0..m - 1) as u8;
                            if r >= s {
                                r + 1
                            } else {
                                r
                            }
                        } else {
                            s
                        }
                    })
                    .collect();
                seq[v] = child;
            }
            (0..n).map(|i| std::mem::take(&mut seq[t.leaf_node(LeafId(i))])).collect()
        })
        .collect();

    let mut seqs = vec![Vec::with_capacity(ell); n];
    for block in per_block {
        for (out, part) in seqs.iter_mut().zip(block) {
            out.extend_from_slice(&part);
        }
    }
    SequenceSet::new(t.names().to_vec(), Alphabet::for_size(m)?, seqs)
}

/// True closeness of two leaves: the product of edge closenesses along
/// their path. Equal leaves have closeness 1.
pub fn exact_closeness(t: &RootedEvoTree, x: LeafId, y: LeafId) -> Result<f64> {
    for leaf in [x, y] {
        if leaf.0 >= t.n_leaves() {
            return Err(Error::UnknownLeaf(leaf.to_string()));
        }
    }
    if x == y {
        return Ok(1.0);
    }
    Ok(t.node_closeness(t.leaf_node(x), t.leaf_node(y)))
}

/// Closeness from leaf `x` to every node, by one traversal.
fn closeness_row(t: &RootedEvoTree, adj: &[Vec<usize>], x: LeafId) -> Vec<f64> {
    let nodes = t.nodes();
    let mut c = vec![f64::NAN; nodes.len()];
    let start = t.leaf_node(x);
    c[start] = 1.0;
    let mut stack = vec![start];
    while let Some(u) = stack.pop() {
        for &v in &adj[u] {
            if c[v].is_nan() {
                let child = if nodes[v].parent == Some(u) { v } else { u };
                c[v] = c[u] * t.edge_closeness(child);
                stack.push(v);
            }
        }
    }
    c
}

/// Matrix of true leaf closenesses, the noise-free input to reconstruction.
pub fn exact_distance_matrix(t: &RootedEvoTree) -> DistanceMatrix {
    let n = t.n_leaves();
    let adj = t.adjacency();
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let row = closeness_row(t, &adj, LeafId(i));
            (i + 1..n).map(|j| row[t.leaf_node(LeafId(j))]).collect()
        })
        .collect();
    // Fill from the upper triangle so rounding cannot break symmetry.
    let mut c = vec![1.0; n * n];
    for (i, row) in rows.iter().enumerate() {
        for (k, &v) in row.iter().enumerate() {
            let j = i + 1 + k;
            c[i * n + j] = v;
            c[j * n + i] = v;
        }
    }
    DistanceMatrix::from_closeness(t.names().to_vec(), c)
        .expect("tree closenesses are a valid matrix")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::treecore::{g_depth, suppress_root};

    fn model() -> EvoModel {
        EvoModel::new(4, 0.05, 0.1).unwrap()
    }

    fn tree(n: usize, shape: TreeShape, seed: u64) -> RootedEvoTree {
        gen_tree(n, shape, &model(), EdgeProbSampler::default_for(&model()), seed).unwrap()
    }

    /// Two-leaf cherry plus an outgroup, with the given edge probabilities
    /// above (outgroup, cherry, cherry-left, cherry-right).
    fn small(p: [f64; 4], m: usize) -> RootedEvoTree {
        let node = |parent, children: Vec<usize>, leaf: Option<usize>, prob| EvoNode {
            parent,
            children,
            leaf: leaf.map(LeafId),
            mutation_prob: prob,
        };
        let nodes = vec![
            node(None, vec![1, 2], None, 0.0),
            node(Some(0), vec![], Some(0), p[0]),
            node(Some(0), vec![3, 4], None, p[1]),
            node(Some(2), vec![], Some(1), p[2]),
            node(Some(2), vec![], Some(2), p[3]),
        ];
        let names = vec!["A".into(), "B".into(), "C".into()];
        RootedEvoTree::from_nodes(nodes, 0, names, m).unwrap()
    }

    #[test]
    fn model_validation() {
        assert!(EvoModel::new(4, 0.05, 0.1).is_ok());
        assert!(EvoModel::new(4, 0.2, 0.1).is_err());
        assert!(EvoModel::new(4, 0.0, 0.1).is_err());
        assert!(EvoModel::new(2, 0.1, 0.5).is_err());
        assert!(EvoModel::new(1, 0.1, 0.1).is_err());
        assert_eq!(model().alpha(), 4.0 / 3.0);
    }

    #[test]
    fn generated_trees_respect_bounds_and_seed() {
        for shape in [
            TreeShape::Uniform,
            TreeShape::YuleHarding,
            TreeShape::Caterpillar,
            TreeShape::Balanced,
        ] {
            for n in [3, 4, 9, 40] {
                let a = tree(n, shape, 5);
                assert_eq!(a.n_leaves(), n);
                a.check_bounds(0.05, 0.1).unwrap();
                assert_eq!(a, tree(n, shape, 5));
            }
        }
        assert!(gen_tree(2, TreeShape::Uniform, &model(), EdgeProbSampler::Constant(0.07), 0)
            .is_err());
        assert!(gen_tree(5, TreeShape::Uniform, &model(), EdgeProbSampler::Constant(0.2), 0)
            .is_err());
    }

    #[test]
    fn three_leaf_trees_cover_all_labelings() {
        let mut seen = std::collections::BTreeSet::new();
        for seed in 0..200 {
            let t = tree(3, TreeShape::Uniform, seed);
            let root = &t.nodes()[t.root()];
            let outgroup = root
                .children
                .iter()
                .find_map(|&c| t.nodes()[c].leaf)
                .expect("one root child is a leaf");
            seen.insert(outgroup.0);
        }
        assert_eq!(seen.len(), 3);
    }

    #[test]
    fn uniform_shape_frequencies_on_four_leaves() {
        // 15 labeled rooted trees on 4 leaves: 12 caterpillars, 3 balanced.
        let trials = 6000;
        let balanced = (0..trials)
            .filter(|&s| {
                let t = tree(4, TreeShape::Uniform, s);
                t.nodes()[t.root()].children.iter().all(|&c| t.nodes()[c].leaf.is_none())
            })
            .count() as f64;
        let p = 0.2;
        let sd = (trials as f64 * p * (1.0 - p)).sqrt();
        assert!((balanced - trials as f64 * p).abs() < 4.0 * sd, "{balanced}");
    }

    #[test]
    fn balanced_eight_has_three_levels() {
        let t = tree(8, TreeShape::Balanced, 0);
        assert!(t.depths().iter().zip(t.nodes()).all(|(&d, n)| n.leaf.is_none() || d == 3));
        assert_eq!(g_depth(&t), 3);
    }

    #[test]
    fn shape_names_parse() {
        for s in ["uniform", "yule_harding", "caterpillar", "balanced"] {
            assert_eq!(s.parse::<TreeShape>().unwrap().to_string(), s);
        }
        assert_eq!("Yule-Harding".parse::<TreeShape>().unwrap(), TreeShape::YuleHarding);
        assert!("star".parse::<TreeShape>().is_err());
    }

    #[test]
    fn zero_mutation_copies_root() {
        let t = small([0.0; 4], 4);
        let root: Vec<u8> = (0..5000).map(|i| (i * 7 % 4) as u8).collect();
        let s = evolve_sequences(&t, root.len(), 3, Some(&root)).unwrap();
        for i in 0..3 {
            assert_eq!(s.seq(i), &root[..]);
        }
        assert!(matches!(
            evolve_sequences(&t, 10, 3, Some(&root)),
            Err(Error::LengthMismatch(10, 5000))
        ));
    }

    #[test]
    fn single_edge_mutation_rate_and_targets() {
        // Only the edge above B mutates.
        let t = small([0.0, 0.0, 0.3, 0.0], 4);
        let ell = 1_000_000;
        let root = vec![0u8; ell];
        let s = evolve_sequences(&t, ell, 17, Some(&root)).unwrap();
        let mut counts = [0usize; 4];
        for &x in s.seq(1) {
            counts[x as usize] += 1;
        }
        let differ = (ell - counts[0]) as f64;
        let rate = differ / ell as f64;
        assert!((rate - 0.3).abs() < 0.002, "{rate}");
        let sd = (differ * (1.0 / 3.0) * (2.0 / 3.0)).sqrt();
        for &c in &counts[1..] {
            assert!((c as f64 - differ / 3.0).abs() < 3.0 * sd, "{counts:?}");
        }
    }

    #[test]
    fn simulation_is_deterministic_across_thread_counts() {
        let t = tree(10, TreeShape::Uniform, 2);
        let a = evolve_sequences(&t, 3 * BLOCK_SITES + 17, 99, None).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| evolve_sequences(&t, 3 * BLOCK_SITES + 17, 99, None).unwrap());
        assert_eq!(a, b);
        assert_ne!(a, evolve_sequences(&t, 3 * BLOCK_SITES + 17, 100, None).unwrap());
    }

    #[test]
    fn sites_are_uncorrelated() {
        // Match indicators at two fixed sites across independent replicates.
        let t = small([0.2, 0.1, 0.1, 0.2], 4);
        let reps = 4000;
        let (mut sx, mut sy, mut sxy) = (0.0, 0.0, 0.0);
        for r in 0..reps {
            let s = evolve_sequences(&t, 2, r, None).unwrap();
            let x = f64::from(u8::from(s.seq(0)[0] == s.seq(1)[0]));
            let y = f64::from(u8::from(s.seq(0)[1] == s.seq(1)[1]));
            sx += x;
            sy += y;
            sxy += x * y;
        }
        let n = reps as f64;
        let cov = sxy / n - (sx / n) * (sy / n);
        assert!(cov.abs() < 4.0 * 0.25 / n.sqrt(), "{cov}");
    }

    #[test]
    fn exact_closeness_examples() {
        let t = small([0.3, 0.0, 0.3, 0.0], 4);
        // A and B are joined by the two 0.3 edges.
        let c = exact_closeness(&t, LeafId(0), LeafId(1)).unwrap();
        assert!((c - 0.36).abs() < 1e-12);
        assert_eq!(exact_closeness(&t, LeafId(2), LeafId(2)).unwrap(), 1.0);
        assert!(exact_closeness(&t, LeafId(0), LeafId(7)).is_err());
        let d = exact_distance_matrix(&t);
        assert!((d.distance(0, 1).finite().unwrap() - 1.021651247531982).abs() < 1e-12);
        assert_eq!(d.distance(1, 1).finite(), Some(0.0));
    }

    #[test]
    fn exact_distances_are_additive() {
        for seed in 0..10 {
            let t = tree(12, TreeShape::Uniform, seed);
            let d = exact_distance_matrix(&t);
            let topo = suppress_root(&t);
            for i in 0..12 {
                for j in 0..12 {
                    let a = topo.leaf_node(LeafId(i));
                    let b = topo.leaf_node(LeafId(j));
                    let path = topo.path_length(a, b).unwrap();
                    assert!((d.distance(i, j).finite().unwrap() - path).abs() < 1e-10);
                    // Closeness multiplies along the path.
                    let c = t.node_closeness(t.leaf_node(LeafId(i)), t.leaf_node(LeafId(j)));
                    assert!((d.closeness(i, j) - c).abs() <= 1e-12 * c);
                }
            }
        }
    }

    #[test]
    fn alphabet_round_trip() {
        let dna = Alphabet::for_size(4).unwrap();
        assert_eq!(dna.encode("ACgT").unwrap(), vec![0, 1, 2, 3]);
        assert_eq!(dna.decode(&[3, 2, 1, 0]), "TGCA");
        assert!(dna.encode("ACN").is_err());
        let bin = Alphabet::for_size(2).unwrap();
        assert_eq!(bin.decode(&[0, 1]), "AB");
        assert!(Alphabet::for_size(63).is_err());
    }
}
