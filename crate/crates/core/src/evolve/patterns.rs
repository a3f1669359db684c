//! Site-pattern view of the simulation.
//!
//! Sites are i.i.d., so the joint leaf column of a site is one of `m^n`
//! patterns drawn from a fixed distribution, and the count vector of `ell`
//! sites is multinomial. Sampling the counts directly gives the same
//! distribution of closeness estimates as simulating every site, at a cost
//! independent of `ell`. Only practical for small trees.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

use crate::error::{invalid, Error, Result};
use crate::treecore::RootedEvoTree;

/// Largest pattern space accepted.
pub const MAX_PATTERNS: usize = 1 << 22;

/// Counts of each leaf-symbol pattern over `ell` sites. Pattern index
/// `sum_i s_i * m^i`, where `s_i` is the symbol at leaf `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SitePatterns {
    pub n_taxa: usize,
    pub m: usize,
    pub ell: u64,
    pub counts: Vec<u64>,
}

impl SitePatterns {
    /// Matching sites for every leaf pair, row-major `n * n`.
    pub fn match_counts(&self) -> Vec<u64> {
        let n = self.n_taxa;
        let mut matches = vec![0u64; n * n];
        let mut symbols = vec![0usize; n];
        for (mut pattern, &count) in self.counts.iter().enumerate() {
            if count == 0 {
                continue;
            }
            for s in symbols.iter_mut() {
                *s = pattern % self.m;
                pattern /= self.m;
            }
            for i in 0..n {
                for j in i + 1..n {
                    if symbols[i] == symbols[j] {
                        matches[i * n + j] += count;
                    }
                }
            }
        }
        for i in 0..n {
            matches[i * n + i] = self.ell;
            for j in 0..i {
                matches[i * n + j] = matches[j * n + i];
            }
        }
        matches
    }
}

fn pattern_space(n: usize, m: usize) -> Result<usize> {
    (0..n)
        .try_fold(1usize, |acc, _| acc.checked_mul(m))
        .filter(|&size| size <= MAX_PATTERNS)
        .ok_or_else(|| invalid(format!("{m}^{n} site patterns is too many")))
}

/// Probability of every site pattern under a uniform root, by pruning.
pub fn pattern_probabilities(t: &RootedEvoTree) -> Result<Vec<f64>> {
    let n = t.n_leaves();
    let m = t.alphabet_size();
    let size = pattern_space(n, m)?;
    let nodes = t.nodes();
    let post: Vec<usize> = t.preorder().into_iter().rev().collect();

    let mut partial = vec![vec![0.0; m]; nodes.len()];
    let mut probs = Vec::with_capacity(size);
    let mut symbols = vec![0usize; n];
    for mut pattern in 0..size {
        for s in symbols.iter_mut() {
            *s = pattern % m;
            pattern /= m;
        }
        for &u in &post {
            let mut l = vec![1.0; m];
            if let Some(leaf) = nodes[u].leaf {
                l.fill(0.0);
                l[symbols[leaf.0]] = 1.0;
            }
            for &c in &nodes[u].children {
                let p = nodes[c].mutation_prob;
                let lc = &partial[c];
                let total: f64 = lc.iter().sum();
                for (s, ls) in l.iter_mut().enumerate() {
                    *ls *= (1.0 - p) * lc[s] + p / (m as f64 - 1.0) * (total - lc[s]);
                }
            }
            partial[u] = l;
        }
        probs.push(partial[t.root()].iter().sum::<f64>() / m as f64);
    }
    Ok(probs)
}

/// Draws the pattern counts of `ell` simulated sites (uniform root) as one
/// multinomial sample, by sequential conditional binomials.
pub fn site_pattern_counts(t: &RootedEvoTree, ell: u64, seed: u64) -> Result<SitePatterns> {
    if ell == 0 {
        return Err(Error::EmptySequence);
    }
    let probs = pattern_probabilities(t)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = vec![0u64; probs.len()];
    let mut remaining = ell;
    let mut mass = 1.0f64;
    let last = probs.len() - 1;
    for (i, &p) in probs.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        if i == last || p >= mass {
            counts[i] = remaining;
            break;
        }
        let q = (p / mass).clamp(0.0, 1.0);
        let k = Binomial::new(remaining, q).expect("q in [0, 1]").sample(&mut rng);
        counts[i] = k;
        remaining -= k;
        mass -= p;
    }
    Ok(SitePatterns { n_taxa: t.n_leaves(), m: t.alphabet_size(), ell, counts })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distmat::DistanceMatrix;
    use crate::evolve::{
        evolve_sequences, exact_distance_matrix, gen_tree, EdgeProbSampler, EvoModel, TreeShape,
    };

    fn tree(n: usize, m: usize, seed: u64) -> RootedEvoTree {
        let model = EvoModel::new(m, 0.05, 0.2).unwrap();
        gen_tree(n, TreeShape::Uniform, &model, EdgeProbSampler::default_for(&model), seed)
            .unwrap()
    }

    #[test]
    fn probabilities_sum_to_one_and_match_pair_closeness() {
        let t = tree(5, 4, 1);
        let probs = pattern_probabilities(&t).unwrap();
        assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        // Expected match rate of a pair gives back its exact closeness.
        let exact = exact_distance_matrix(&t);
        let alpha = 4.0 / 3.0;
        for (i, j) in [(0, 1), (2, 4), (1, 3)] {
            let matched: f64 = probs
                .iter()
                .enumerate()
                .filter(|(k, _)| (k / 4usize.pow(i)) % 4 == (k / 4usize.pow(j)) % 4)
                .map(|(_, p)| p)
                .sum();
            let c = alpha * matched - 1.0 / 3.0;
            assert!((c - exact.closeness(i as usize, j as usize)).abs() < 1e-12);
        }
    }

    #[test]
    fn counts_total_ell() {
        let t = tree(6, 2, 4);
        let s = site_pattern_counts(&t, 123_457, 9).unwrap();
        assert_eq!(s.counts.iter().sum::<u64>(), 123_457);
        assert_eq!(s, site_pattern_counts(&t, 123_457, 9).unwrap());
    }

    #[test]
    fn agrees_in_distribution_with_site_simulation() {
        // Mean and spread of one pair's estimate under both samplers.
        let t = tree(4, 4, 7);
        let ell = 500;
        let reps = 3000;
        let mut by_sites = vec![];
        let mut by_patterns = vec![];
        for r in 0..reps {
            let s = evolve_sequences(&t, ell, r, None).unwrap();
            by_sites.push(DistanceMatrix::from_sequences(&s).unwrap().closeness(0, 3));
            let p = site_pattern_counts(&t, ell as u64, r).unwrap();
            by_patterns.push(DistanceMatrix::from_site_patterns(t.names().to_vec(), &p).closeness(0, 3));
        }
        let stats = |v: &[f64]| {
            let mean = v.iter().sum::<f64>() / v.len() as f64;
            let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (v.len() - 1) as f64;
            (mean, var)
        };
        let (m1, v1) = stats(&by_sites);
        let (m2, v2) = stats(&by_patterns);
        let se = ((v1 + v2) / reps as f64).sqrt();
        assert!((m1 - m2).abs() < 4.0 * se, "{m1} vs {m2}");
        assert!((v1 / v2 - 1.0).abs() < 0.15, "{v1} vs {v2}");
        let exact = exact_distance_matrix(&t).closeness(0, 3);
        assert!((m2 - exact).abs() < 4.0 * (v2 / reps as f64).sqrt());
    }

    #[test]
    fn oversized_space_is_rejected() {
        assert!(pattern_probabilities(&tree(40, 4, 0)).is_err());
    }
}
