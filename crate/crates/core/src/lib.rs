//! Multi-peak monotone submodular valuations and the welfare / max-min /
//! public-project gap instances built from them.
//!
//! The crate is organised bottom-up:
//!
//! * [`itemset`] and [`rational`] are the shared currency: bitset item sets
//!   and exact `i128` rationals.
//! * [`valuation`], [`continuous`] and [`verify`] construct multi-peak
//!   functions, evaluate them exactly, and check monotonicity,
//!   submodularity and the smooth gluing of their continuous extension.
//! * [`set_systems`] generates random partition families, disjointness
//!   inputs and ingests cover systems.
//! * [`instances`] assembles auction and public-project instances and
//!   evaluates the closed-form YES values and NO bounds.
//! * [`solvers`] holds exact brute force, greedy baselines, the exact demand
//!   oracle and the structured / grid optimizers for the normalized NO bound.

pub mod continuous;
pub mod error;
pub mod itemset;
pub mod rational;
pub mod instances;
pub mod set_systems;
pub mod solvers;
pub mod valuation;
pub mod verify;

pub use error::{Error, Result};
pub use itemset::ItemSet;
pub use rational::Rational;
pub use valuation::{MultiPeakValuation, PeakFamily, SetFunction};

/// Version tag written into every JSON document this crate produces.
pub const SCHEMA_VERSION: u32 = 1;
