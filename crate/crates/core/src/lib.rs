//! Invariant noninformative priors on the probability simplex and their use
//! as a nonparametric posterior engine.
//!
//! The crate is organised bottom-up:
//!
//! - [`simplex`]: probability vectors, the rescale-and-renormalise group acting
//!   on them, and its Radon–Nikodym derivative.
//! - [`density`]: the invariant generalized density `1/∏θᵢ`, the invariance
//!   functional equation and its stability envelope.
//! - [`dirichlet`]: `Dir(α, F₀)` in concentration/mean form, its normaliser and
//!   the ε-invariance margin.
//! - [`process`]: Dirichlet processes over real-valued outcomes, conjugate
//!   updating, stick-breaking and the Bayesian bootstrap `DP(n, F̂ₙ)`.
//! - [`inference`]: posterior functionals and two-arm comparisons.
//! - [`verify`]: the executable theorem suite producing a [`verify::VerificationReport`].
//!
//! All randomness is drawn from counter-based substreams (see [`rng`]) so that
//! results depend only on the seed, never on thread scheduling.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod density;
pub mod dirichlet;
mod error;
pub mod inference;
pub mod ks;
pub mod process;
pub mod rng;
pub mod simplex;
pub mod verify;

pub use error::{Error, Result};
