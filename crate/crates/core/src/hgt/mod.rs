//! Fast harmonic greedy triplets: grows an unrooted tree one leaf at a time,
//! always inserting the leaf whose best splitting triplet has the largest
//! harmonic closeness.
//!
//! Steps, as referred to in failure reports:
//!
//! * F1 pick leaf 0 as A and the positive triplet ABC of largest closeness;
//!   F2 fail if there is none.
//! * F3-F5 start from the star on ABC, legs as edge lengths, def(D) = ABC.
//! * F6 fill the candidate array from the three star edges.
//! * F7-F15 repeat: F8 fail if no candidate is left; F9 take the best
//!   candidate; F10-F12 split its edge, attach the leaf, record def;
//!   F13 drop candidates on the split edge; F14 refill from the three new
//!   edges; F15 until all leaves are in.
//! * F16 output.

mod candidates;
mod params;
mod split;
mod tree;

use std::fmt;

use crate::distmat::{harmonic, DistanceMatrix};
use crate::error::Result;

pub use candidates::{CandidateArray, SplittingTuple};
pub use params::{
    delta_min_for, event_bounds, min_edge_length, sample_length, thresholds, HgtParams,
    SampleLength, Thresholds,
};
pub use split::{split_edge, SplitOutcome};
pub use tree::{edge_side_leaves, EdgeSides, ReconNode, ReconTree};

use split::PairContext;

/// Which step gave up.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FailureLine {
    /// No positive starting triplet.
    F2,
    /// Leaves remain but no candidate insertion exists.
    F8,
}

impl fmt::Display for FailureLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FailureLine::F2 => "F2",
            FailureLine::F8 => "F8",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("reconstruction failed at {line} (iteration {iteration}, {inserted} leaves inserted)")]
pub struct HgtFailure {
    pub line: FailureLine,
    /// Loop iterations completed before failing.
    pub iteration: usize,
    pub inserted: usize,
}

/// Work counters for one run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct HgtStats {
    pub iterations: usize,
    pub split_edge_calls: u64,
    pub update_calls: u64,
    pub peak_live_tuples: usize,
    pub tree_nodes: usize,
}

/// F1: the positive triplet `a b c` of largest closeness over all `b < c`,
/// ties to the smallest `(b, c)`.
pub fn init_triplet(a: usize, d: &DistanceMatrix) -> Option<[usize; 3]> {
    let n = d.n();
    let row = d.closeness_row(a);
    let mut best: Option<(f64, usize, usize)> = None;
    for b in (0..n).filter(|&b| b != a && row[b] > 0.0) {
        let rb = d.closeness_row(b);
        for c in (b + 1..n).filter(|&c| c != a && row[c] > 0.0 && rb[c] > 0.0) {
            let h = harmonic(row[b], row[c], rb[c]);
            if best.is_none_or(|(bh, _, _)| h > bh) {
                best = Some((h, b, c));
            }
        }
    }
    best.map(|(_, b, c)| [a, b, c])
}

/// What one loop iteration inserted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Insertion {
    pub tuple: SplittingTuple,
    /// The new internal node.
    pub center: usize,
    pub leaf_node: usize,
}

/// A run in progress, exposed so callers can inspect every intermediate
/// tree. [`fast_hgt`] drives it to completion.
pub struct Reconstruction<'a> {
    d: &'a DistanceMatrix,
    delta_min: f64,
    tree: ReconTree,
    s: CandidateArray,
    /// Leaves not yet inserted, ascending.
    outside: Vec<usize>,
    sides: EdgeSides,
    stats: HgtStats,
}

impl<'a> Reconstruction<'a> {
    /// F1-F6.
    pub fn start(d: &'a DistanceMatrix, delta_min: f64) -> Result<Self, HgtFailure> {
        let n = d.n();
        let fail = HgtFailure { line: FailureLine::F2, iteration: 0, inserted: 0 };
        if n < 3 {
            return Err(fail);
        }
        let abc = init_triplet(0, d).ok_or(fail)?;
        let tree = ReconTree::star(n, d, abc);
        let outside = (0..n).filter(|x| !abc.contains(x)).collect();
        let mut run = Self {
            d,
            delta_min,
            tree,
            s: CandidateArray::new(n),
            outside,
            sides: EdgeSides::default(),
            stats: HgtStats::default(),
        };
        for x in abc {
            let leaf = run.tree.leaf_node(x).expect("inserted");
            run.update_s(leaf, 0);
        }
        run.note_sizes();
        Ok(run)
    }

    /// Update-S for edge `q1 q2`: offer every splitting tuple on it.
    fn update_s(&mut self, q1: usize, q2: usize) {
        self.stats.update_calls += 1;
        self.sides.mark(&self.tree, q1, q2);
        let nodes = self.tree.nodes();
        let mut pairs = arrayvec::ArrayVec::<(usize, usize), 9>::new();
        for &x in nodes[q1].def() {
            for &y in nodes[q2].def() {
                let side = |leaf| self.sides.on_q1_side(self.tree.leaf_node(leaf).expect("inserted"));
                if x != y && side(x) != side(y) && self.d.closeness(x, y) > 0.0 {
                    pairs.push((x, y));
                }
            }
        }
        for (x, y) in pairs {
            let ctx = PairContext::new(&self.tree, &self.sides, self.d, (q1, q2), (x, y), self.delta_min);
            let (cx, cy) = (self.d.closeness_row(x), self.d.closeness_row(y));
            let cxy = cx[y];
            for &m in &self.outside {
                if cx[m] <= 0.0 || cy[m] <= 0.0 {
                    continue;
                }
                self.stats.split_edge_calls += 1;
                let outcome = ctx.classify(self.d.finite_distance(x, m), self.d.finite_distance(y, m));
                if let SplitOutcome::Split { d1, d2, d_np } = outcome {
                    self.s.offer(SplittingTuple {
                        p1: q1,
                        p2: q2,
                        n: m,
                        x,
                        y,
                        d1,
                        d2,
                        d_np,
                        closeness: harmonic(cx[m], cy[m], cxy),
                    });
                }
            }
        }
    }

    fn note_sizes(&mut self) {
        self.stats.peak_live_tuples = self.s.peak();
        self.stats.tree_nodes = self.tree.node_count();
    }

    pub fn is_complete(&self) -> bool {
        self.outside.is_empty()
    }

    /// One loop iteration (F8-F14). `Ok(None)` once every leaf is in.
    pub fn step(&mut self) -> Result<Option<Insertion>, HgtFailure> {
        if self.outside.is_empty() {
            return Ok(None);
        }
        let Some(&tuple) = self.s.best() else {
            return Err(HgtFailure {
                line: FailureLine::F8,
                iteration: self.stats.iterations,
                inserted: self.tree.n_inserted(),
            });
        };
        let SplittingTuple { p1, p2, n, x, y, d1, d2, d_np, .. } = tuple;
        let center = self.tree.insert(self.d, p1, p2, [n, x, y], d1, d2, d_np);
        let leaf_node = self.tree.leaf_node(n).expect("just inserted");
        self.s.take(n);
        let pos = self.outside.binary_search(&n).expect("n was outside");
        self.outside.remove(pos);
        self.s.clear_edge(p1, p2);
        self.update_s(p1, center);
        self.update_s(p2, center);
        self.update_s(leaf_node, center);
        self.stats.iterations += 1;
        self.note_sizes();
        Ok(Some(Insertion { tuple, center, leaf_node }))
    }

    pub fn tree(&self) -> &ReconTree {
        &self.tree
    }

    pub fn candidates(&self) -> &CandidateArray {
        &self.s
    }

    pub fn outside(&self) -> &[usize] {
        &self.outside
    }

    pub fn stats(&self) -> HgtStats {
        self.stats
    }

    /// Checks the structural invariants that must hold between iterations:
    /// every edge's endpoints share a def leaf, internal nodes have degree 3,
    /// and every candidate names a live edge and an outside leaf.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        let t = &self.tree;
        for (a, b, _) in t.edges() {
            let (da, db) = (t.nodes()[a].def(), t.nodes()[b].def());
            if !da.iter().any(|x| db.contains(x)) {
                return Err(format!("edge {a}-{b}: def sets {da:?} and {db:?} are disjoint"));
            }
        }
        for (i, node) in t.nodes().iter().enumerate() {
            let want = if node.leaf.is_some() { 1 } else { 3 };
            if node.adj.len() != want {
                return Err(format!("node {i} has degree {}", node.adj.len()));
            }
        }
        for tuple in self.s.iter() {
            if !t.has_edge(tuple.p1, tuple.p2) {
                return Err(format!("candidate for {} on dead edge {}-{}", tuple.n, tuple.p1, tuple.p2));
            }
            if t.contains_leaf(tuple.n) {
                return Err(format!("candidate for inserted leaf {}", tuple.n));
            }
            if (tuple.d1 + tuple.d2 - t.edge_length(tuple.p1, tuple.p2).unwrap()).abs() > 1e-12 {
                return Err(format!("candidate for {} breaks the length sum", tuple.n));
            }
        }
        if self.s.live() != self.s.iter().count() {
            return Err("live count out of sync".into());
        }
        Ok(())
    }

    pub fn finish(self) -> HgtOutput {
        HgtOutput { tree: self.tree, stats: self.stats }
    }
}

#[derive(Debug, Clone)]
pub struct HgtOutput {
    pub tree: ReconTree,
    pub stats: HgtStats,
}

/// Reconstructs a tree from estimated closenesses and the threshold
/// `delta_min`.
pub fn fast_hgt(d: &DistanceMatrix, delta_min: f64) -> Result<HgtOutput, HgtFailure> {
    d.precompute_distances();
    let mut run = Reconstruction::start(d, delta_min)?;
    while run.step()?.is_some() {}
    Ok(run.finish())
}
