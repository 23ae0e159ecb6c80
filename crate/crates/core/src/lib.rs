//! Maximization of cumulative prospect theory (CPT) utility over an
//! empirical distribution of asset returns.
//!
//! The CPT objective combines an S-shaped value function with rank-dependent
//! probability reweighting, which makes it non-concave and often multimodal
//! in the portfolio weights. This crate provides:
//!
//! - [`utility`]: evaluation of the CPT utility and an analytic supergradient,
//! - [`constraints`]: budget + box feasible sets and exact Euclidean projection,
//! - [`mm`]: minorization-maximization via a concave global minorant,
//! - [`cc`]: an iterated convex-concave procedure with a trust region,
//! - [`ga`]: projected gradient ascent with batched multi-start,
//! - [`mv`]: the mean-variance frontier and the MV heuristic,
//! - [`oracle`]: brute-force grid search for 2 and 3 assets, used as ground
//!   truth in tests.
//!
//! The crate is `no_std` (with `alloc`); all floating-point math is routed
//! through `libm` so results are bit-reproducible across targets. IO, RNG,
//! and the command-line interface live in the companion `cptport-cli` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod cc;
pub mod constraints;
pub mod error;
pub mod ga;
pub mod mm;
pub mod mv;
pub mod oracle;
pub mod params;
pub mod returns;
pub mod solve;
pub mod utility;
pub mod weights;

mod math;
mod psg;

pub use constraints::ConstraintSet;
pub use error::CptError;
pub use params::CptParams;
pub use returns::{Portfolio, ReturnsMatrix};
pub use solve::Termination;
pub use weights::DecisionWeights;
