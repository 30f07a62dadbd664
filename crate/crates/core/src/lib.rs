//! Combinatorics of rearranged Walsh systems.
//!
//! The crate builds the usual rearrangements of the Walsh system (Paley,
//! original Walsh, Kaczmarz, Kronecker, arbitrary GF(2)-linear and
//! piecewise-linear maps), counts the solution sets of the mixed
//! ordinary/dyadic additive equations that govern the L4 norms of the
//! kernels `F(s,t) = sum_k e_k(s) w_{sigma(k)}(t)`, evaluates those norms by
//! exact quadrature, checks the perturbation inequalities, and runs a
//! branch-and-bound search over permutations for the homomorphism-pair
//! count `#B`.
//!
//! Module map:
//!
//! - [`dyadic`]: binary expansions and the carry-free sum.
//! - [`orderings`]: permutations of `[2^n]` and GF(2) matrices.
//! - [`functions`]: Walsh/trigonometric evaluation and grid norms.
//! - [`combinatorics`]: exact counters for the witness sets.
//! - [`perturbation`]: deviation-based inclusion checks.
//! - [`search`]: exhaustive and pruned permutation search with checkpoints.

pub mod combinatorics;
pub mod dyadic;
mod error;
pub mod functions;
pub mod orderings;
pub mod perturbation;
pub mod search;

pub use error::{Error, Result};
