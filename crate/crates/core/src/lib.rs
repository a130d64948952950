//! Numerical solver and verification harness for the Dirichlet problem of
//! the special Lagrangian curvature potential equation
//!
//! ```text
//! Σ_i arctan κ_i(D²u, Du) = h(x)  in Ω,    u = φ  on ∂Ω,
//! ```
//!
//! where `κ_i` are the principal curvatures of the graph of `u`.
//!
//! The equation is solved in its concave form `−exp(−A·F) = −exp(−A·h)` by
//! damped Newton iteration inside a continuation in the gradient slot.

pub mod cli_io;
pub mod cone;
pub mod error;
pub mod geometry;
pub mod grid;
pub mod harness;
pub mod linearize;
pub mod smalldense;
pub mod solver;

pub use error::{Error, Result};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Deterministic RNG used everywhere a seed is accepted.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
