//! Closeness and distance estimates, triplet geometry, and tail bounds.

mod phylip;
pub mod tail;

use std::sync::OnceLock;

use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::evolve::{SequenceSet, SitePatterns};

pub use phylip::{read_phylip, write_phylip};
pub use tail::{center_error_tail, center_tail, greedy_tail, hoeffding_pair_tail, TailBoundParams};

/// An estimated distance: `-ln c` for positive closeness, otherwise the
/// explicit infinite marker.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Distance {
    Finite(f64),
    Infinite,
}

impl Distance {
    pub fn finite(self) -> Option<f64> {
        match self {
            Distance::Finite(d) => Some(d),
            Distance::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        self == Distance::Infinite
    }
}

/// `-ln c` if `c > 0`, else infinite. Zero counts as non-positive.
pub fn closeness_to_distance(c: f64) -> Distance {
    if c > 0.0 {
        // Subtracting from +0 keeps identical sequences at +0 rather than -0.
        Distance::Finite(0.0 - c.ln())
    } else {
        Distance::Infinite
    }
}

/// Mean agreement indicator of two sequences of symbol indices: 1 per
/// matching site, `-1/(m-1)` per mismatch.
pub fn estimate_closeness(x: &[u8], y: &[u8], m: usize) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch(x.len(), y.len()));
    }
    if x.is_empty() {
        return Err(Error::EmptySequence);
    }
    if m < 2 {
        return Err(invalid("alphabet size must be at least 2"));
    }
    let matches = x.iter().zip(y).filter(|(a, b)| a == b).count() as u64;
    Ok(closeness_from_matches(matches, x.len() as u64, m))
}

/// `(m * matches - ell) / (ell * (m - 1))`, the same mean in closed form.
fn closeness_from_matches(matches: u64, ell: u64, m: usize) -> f64 {
    let m = m as f64;
    (m * matches as f64 - ell as f64) / (ell as f64 * (m - 1.0))
}

pub fn is_positive(cxy: f64, cxz: f64, cyz: f64) -> bool {
    cxy > 0.0 && cxz > 0.0 && cyz > 0.0
}

/// Harmonic mean of the three pairwise closenesses.
pub fn triplet_closeness(cxy: f64, cxz: f64, cyz: f64) -> Result<f64> {
    if !is_positive(cxy, cxz, cyz) {
        return Err(Error::NonPositiveTriplet);
    }
    Ok(harmonic(cxy, cxz, cyz))
}

#[inline]
pub(crate) fn harmonic(cxy: f64, cxz: f64, cyz: f64) -> f64 {
    3.0 / (1.0 / cxy + 1.0 / cxz + 1.0 / cyz)
}

/// Distance from X to the center of XYZ: `(d_XY + d_XZ - d_YZ) / 2`.
pub fn center_leg(dxy: Distance, dxz: Distance, dyz: Distance) -> Result<f64> {
    match (dxy, dxz, dyz) {
        (Distance::Finite(a), Distance::Finite(b), Distance::Finite(c)) => Ok((a + b - c) / 2.0),
        _ => Err(Error::InfiniteDistance("center_leg")),
    }
}

/// Symmetric leaf-pair closenesses, with distances derived on demand.
#[derive(Debug)]
pub struct DistanceMatrix {
    names: Vec<String>,
    closeness: Vec<f64>,
    // -ln c, or +inf standing for the infinite marker; never exposed raw.
    distance: OnceLock<Vec<f64>>,
}

impl Clone for DistanceMatrix {
    fn clone(&self) -> Self {
        Self {
            names: self.names.clone(),
            closeness: self.closeness.clone(),
            distance: OnceLock::new(),
        }
    }
}

impl PartialEq for DistanceMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.names == other.names && self.closeness == other.closeness
    }
}

impl DistanceMatrix {
    /// From a row-major `n * n` closeness array. The diagonal is forced to 1.
    pub fn from_closeness(names: Vec<String>, mut closeness: Vec<f64>) -> Result<Self> {
        let n = names.len();
        if closeness.len() != n * n {
            return Err(invalid(format!("{n} names need {} entries, got {}", n * n, closeness.len())));
        }
        let mut seen = std::collections::HashSet::new();
        for name in &names {
            if !seen.insert(name.as_str()) {
                return Err(Error::DuplicateLeaf(name.clone()));
            }
        }
        for i in 0..n {
            closeness[i * n + i] = 1.0;
            for j in 0..i {
                let (a, b) = (closeness[i * n + j], closeness[j * n + i]);
                if !a.is_finite() || a != b {
                    return Err(invalid(format!("closeness ({i}, {j}) is {a} / {b}")));
                }
            }
        }
        Ok(Self { names, closeness, distance: OnceLock::new() })
    }

    /// Pairwise estimates from sequences, in parallel over rows.
    pub fn from_sequences(s: &SequenceSet) -> Result<Self> {
        let n = s.n_taxa();
        let m = s.alphabet().size();
        let ell = s.len() as u64;
        let upper: Vec<Vec<f64>> = (0..n)
            .into_par_iter()
            .map(|i| {
                (i + 1..n)
                    .map(|j| {
                        let matches =
                            s.seq(i).iter().zip(s.seq(j)).filter(|(a, b)| a == b).count();
                        closeness_from_matches(matches as u64, ell, m)
                    })
                    .collect()
            })
            .collect();
        let mut c = vec![1.0; n * n];
        for (i, row) in upper.iter().enumerate() {
            for (k, &v) in row.iter().enumerate() {
                let j = i + 1 + k;
                c[i * n + j] = v;
                c[j * n + i] = v;
            }
        }
        Self::from_closeness(s.names().to_vec(), c)
    }

    /// Estimates from multinomial site-pattern counts.
    pub fn from_site_patterns(names: Vec<String>, p: &SitePatterns) -> Self {
        let c = p
            .match_counts()
            .into_iter()
            .map(|k| closeness_from_matches(k, p.ell, p.m))
            .collect();
        Self::from_closeness(names, c).expect("pattern counts are symmetric")
    }

    pub fn n(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    #[inline]
    pub fn closeness(&self, i: usize, j: usize) -> f64 {
        self.closeness[i * self.n() + j]
    }

    /// Row `i` of the closeness array.
    #[inline]
    pub fn closeness_row(&self, i: usize) -> &[f64] {
        let n = self.n();
        &self.closeness[i * n..(i + 1) * n]
    }

    fn distances(&self) -> &[f64] {
        self.distance.get_or_init(|| {
            self.closeness.iter().map(|&c| closeness_to_distance(c).finite().unwrap_or(f64::INFINITY)).collect()
        })
    }

    pub fn distance(&self, i: usize, j: usize) -> Distance {
        let d = self.distances()[i * self.n() + j];
        if d.is_finite() {
            Distance::Finite(d)
        } else {
            Distance::Infinite
        }
    }

    /// Distance for a pair already known to have positive closeness.
    #[inline]
    pub(crate) fn finite_distance(&self, i: usize, j: usize) -> f64 {
        let d = self.distances()[i * self.n() + j];
        debug_assert!(d.is_finite());
        d
    }

    /// Warms the distance cache, so timing excludes it.
    pub fn precompute_distances(&self) {
        self.distances();
    }

    pub fn triplet_closeness(&self, x: usize, y: usize, z: usize) -> Result<f64> {
        triplet_closeness(self.closeness(x, y), self.closeness(x, z), self.closeness(y, z))
    }

    pub fn center_leg(&self, x: usize, y: usize, z: usize) -> Result<f64> {
        center_leg(self.distance(x, y), self.distance(x, z), self.distance(y, z))
    }
}
