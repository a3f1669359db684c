//! Reconstruction of evolutionary trees with the Fast Harmonic Greedy
//! Triplets algorithm, plus the generalized Jukes-Cantor machinery used to
//! generate ground truth for it.
//!
//! The crate is split the same way the pipeline runs:
//!
//! * [`evolve`] draws random rooted trees and evolves sequences down them.
//! * [`distmat`] turns sequences into closeness/distance estimates and holds
//!   the triplet geometry and tail-bound formulas.
//! * [`hgt`] rebuilds the unrooted weighted topology from a distance matrix
//!   in quadratic time and linear working space.
//! * [`treecore`] has the tree types, bipartitions, Robinson-Foulds distance,
//!   g-depth and Newick I/O shared by all of the above.

pub mod distmat;
pub mod error;
pub mod evolve;
mod fmt;
pub mod hgt;
pub mod treecore;

pub use error::{Error, Result};
pub use fmt::fmt_real;
