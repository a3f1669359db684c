use super::tree::{EdgeSides, ReconTree};
use crate::distmat::{is_positive, DistanceMatrix};
use crate::error::{Error, Result};

/// Where the center of a relevant triplet falls relative to an edge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SplitOutcome {
    /// Within `delta_min` of an endpoint, so not a new node.
    TooClose,
    /// Beyond one of the endpoints.
    Outside,
    /// Strictly inside: the lengths of the two halves and of the new
    /// pendant edge.
    Split { d1: f64, d2: f64, d_np: f64 },
}

/// Everything Split-Edge needs that does not depend on the new leaf, for
/// one edge `p1 p2` and one leaf pair `x in def(p1)`, `y in def(p2)`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct PairContext {
    dxy: f64,
    d_star: f64,
    delta_min: f64,
    /// Whether the leaf measured against `p2` is `x` (else `y`).
    x2_is_x: bool,
    leg1: f64,
    leg2: f64,
    flip1: bool,
    flip2: bool,
}

impl PairContext {
    /// `sides` must be marked for `p1 p2` with `p1` as the first end.
    pub(crate) fn new(
        t: &ReconTree,
        sides: &EdgeSides,
        d: &DistanceMatrix,
        (p1, p2): (usize, usize),
        (x, y): (usize, usize),
        delta_min: f64,
    ) -> Self {
        debug_assert_eq!(sides.edge(), (p1, p2));
        let (n1, n2) = (&t.nodes()[p1], &t.nodes()[p2]);
        let x2_is_x = n2.def().contains(&x);
        let x2 = if x2_is_x { x } else { y };
        let leg1 = n1.leg(x).expect("x in def(p1)");
        let leg2 = n2.leg(x2).expect("x2 in def(p2)");
        let node = |leaf| t.leaf_node(leaf).expect("inserted");
        Self {
            dxy: d.finite_distance(x, y),
            d_star: t.edge_length(p1, p2).expect("edge exists"),
            delta_min,
            x2_is_x,
            leg1,
            leg2,
            // x beyond p2 as seen from p1, and x2 beyond p1 as seen from p2.
            flip1: !sides.on_q1_side(node(x)),
            flip2: sides.on_q1_side(node(x2)),
        }
    }

    /// Classifies the center of `n x y` given `d(x, n)` and `d(y, n)`.
    #[inline]
    pub(crate) fn classify(&self, dxn: f64, dyn_: f64) -> SplitOutcome {
        let dxp = (dxn + self.dxy - dyn_) / 2.0;
        let dyp = (dyn_ + self.dxy - dxn) / 2.0;
        let delta1 = dxp - self.leg1;
        let delta2 = if self.x2_is_x { dxp } else { dyp } - self.leg2;
        if delta1.abs() < self.delta_min || delta2.abs() < self.delta_min {
            return SplitOutcome::TooClose;
        }
        let delta1 = if self.flip1 { -delta1 } else { delta1 };
        let delta2 = if self.flip2 { -delta2 } else { delta2 };
        let d1 = (delta1 + self.d_star - delta2) / 2.0;
        let d2 = (delta2 + self.d_star - delta1) / 2.0;
        if d1 >= self.d_star || d2 >= self.d_star {
            return SplitOutcome::Outside;
        }
        SplitOutcome::Split { d1, d2, d_np: (dxn + dyn_ - self.dxy) / 2.0 }
    }
}

/// Split-Edge for edge `p1 p2` and triplet `n x y`, with the relevance
/// precondition checked: the triplet is positive, `n` is not inserted,
/// `x in def(p1)`, `y in def(p2)`, and the edge lies on the `x`-`y` path.
pub fn split_edge(
    t: &ReconTree,
    (p1, p2): (usize, usize),
    [n, x, y]: [usize; 3],
    d: &DistanceMatrix,
    delta_min: f64,
) -> Result<SplitOutcome> {
    let contract = |m: &str| Err(Error::Contract(format!("split_edge: {m}")));
    if !t.has_edge(p1, p2) {
        return contract("not an edge");
    }
    if t.contains_leaf(n) || !t.contains_leaf(x) || !t.contains_leaf(y) {
        return contract("n must be outside the tree and x, y inside");
    }
    if !t.nodes()[p1].def().contains(&x) || !t.nodes()[p2].def().contains(&y) {
        return contract("x must be in def(p1) and y in def(p2)");
    }
    if !is_positive(d.closeness(n, x), d.closeness(n, y), d.closeness(x, y)) {
        return contract("triplet is not positive");
    }
    let mut sides = EdgeSides::default();
    sides.mark(t, p1, p2);
    let node = |leaf| t.leaf_node(leaf).expect("inserted");
    if sides.on_q1_side(node(x)) == sides.on_q1_side(node(y)) {
        return contract("edge is not on the path between x and y");
    }
    let ctx = PairContext::new(t, &sides, d, (p1, p2), (x, y), delta_min);
    Ok(ctx.classify(d.finite_distance(x, n), d.finite_distance(y, n)))
}
