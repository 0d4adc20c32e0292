//! Curie-Weiss random-field Ising model toolkit.
//!
//! The model couples N Ising spins through a mean-field interaction and a
//! quenched configuration of ±1 random fields. This crate provides
//!
//! * closed-form scalar functions of the model ([`model`]): the field shift
//!   induced by summing out the random fields, the Curie-Weiss magnetization,
//!   the free-energy landscape of the single-parameter approximant joint
//!   measure and its single-site kernel,
//! * fixed-point solvers and landscape classification ([`solvers`]),
//!   including the neutral set of (h0, lambda) pairs and its gap endpoint,
//! * exact finite-N computations by combinatorial sums ([`exact`]): quenched
//!   partition functions, the stochastic chemical potential lambda_N, exact
//!   joint laws of (spin average, lambda_N), and brute-force enumeration
//!   oracles,
//! * a seeded Metropolis cross-check sampler ([`mc`]),
//! * the aggregated verification suites ([`verify`]).
//!
//! All computations are pure functions of their inputs; there is no shared
//! mutable state anywhere in the crate.

pub mod error;
pub mod exact;
pub mod mc;
pub mod model;
pub mod numerics;
pub mod solvers;
pub mod verify;

pub use error::{Error, Result};
pub use model::{ModelParams, MoritaParams, Side, SingleSiteKernel};
