/// A way to insert leaf `n`: split edge `p1 p2` at the center of triplet
/// `n x y`, with the three new edge lengths.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplittingTuple {
    pub p1: usize,
    pub p2: usize,
    pub n: usize,
    pub x: usize,
    pub y: usize,
    pub d1: f64,
    pub d2: f64,
    pub d_np: f64,
    pub closeness: f64,
}

impl SplittingTuple {
    pub fn on_edge(&self, a: usize, b: usize) -> bool {
        (self.p1 == a && self.p2 == b) || (self.p1 == b && self.p2 == a)
    }
}

/// Best known splitting tuple per leaf; an empty slot counts as
/// closeness 0.
#[derive(Debug, Clone)]
pub struct CandidateArray {
    slots: Vec<Option<SplittingTuple>>,
    live: usize,
    peak: usize,
}

impl CandidateArray {
    pub fn new(n: usize) -> Self {
        Self { slots: vec![None; n], live: 0, peak: 0 }
    }

    pub fn get(&self, m: usize) -> Option<&SplittingTuple> {
        self.slots[m].as_ref()
    }

    /// Stores `t` in slot `t.n` if its closeness is strictly greater than
    /// the incumbent's. Returns whether it was stored.
    pub fn offer(&mut self, t: SplittingTuple) -> bool {
        let slot = &mut self.slots[t.n];
        let incumbent = slot.map_or(0.0, |s| s.closeness);
        if t.closeness <= incumbent {
            return false;
        }
        if slot.is_none() {
            self.live += 1;
            self.peak = self.peak.max(self.live);
        }
        *slot = Some(t);
        true
    }

    pub fn take(&mut self, m: usize) -> Option<SplittingTuple> {
        let t = self.slots[m].take();
        if t.is_some() {
            self.live -= 1;
        }
        t
    }

    /// Empties every slot whose tuple splits edge `a b`.
    pub fn clear_edge(&mut self, a: usize, b: usize) {
        for slot in &mut self.slots {
            if slot.is_some_and(|t| t.on_edge(a, b)) {
                *slot = None;
                self.live -= 1;
            }
        }
    }

    /// The tuple with the largest closeness; ties go to the smallest leaf.
    pub fn best(&self) -> Option<&SplittingTuple> {
        let mut best: Option<&SplittingTuple> = None;
        for t in self.slots.iter().flatten() {
            if best.is_none_or(|b| t.closeness > b.closeness) {
                best = Some(t);
            }
        }
        best
    }

    pub fn iter(&self) -> impl Iterator<Item = &SplittingTuple> {
        self.slots.iter().flatten()
    }

    pub fn live(&self) -> usize {
        self.live
    }

    pub fn peak(&self) -> usize {
        self.peak
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tuple(n: usize, closeness: f64, edge: (usize, usize)) -> SplittingTuple {
        SplittingTuple {
            p1: edge.0,
            p2: edge.1,
            n,
            x: 0,
            y: 1,
            d1: 0.1,
            d2: 0.1,
            d_np: 0.1,
            closeness,
        }
    }

    #[test]
    fn incumbent_wins_ties() {
        let mut s = CandidateArray::new(5);
        assert!(s.offer(tuple(3, 0.4, (0, 1))));
        assert!(!s.offer(tuple(3, 0.4, (1, 2))));
        assert_eq!(s.get(3).unwrap().p2, 1);
        assert!(s.offer(tuple(3, 0.5, (1, 2))));
        assert_eq!(s.live(), 1);
    }

    #[test]
    fn best_prefers_smallest_leaf_on_ties() {
        let mut s = CandidateArray::new(6);
        s.offer(tuple(4, 0.3, (0, 1)));
        s.offer(tuple(2, 0.3, (0, 1)));
        s.offer(tuple(5, 0.2, (0, 1)));
        assert_eq!(s.best().unwrap().n, 2);
        assert_eq!(s.peak(), 3);
    }

    #[test]
    fn clearing_an_edge_matches_either_orientation() {
        let mut s = CandidateArray::new(6);
        s.offer(tuple(3, 0.3, (0, 1)));
        s.offer(tuple(4, 0.3, (1, 0)));
        s.offer(tuple(5, 0.3, (1, 2)));
        s.clear_edge(1, 0);
        assert_eq!(s.live(), 1);
        assert_eq!(s.iter().map(|t| t.n).collect::<Vec<_>>(), vec![5]);
        assert_eq!(s.peak(), 3);
    }
}
