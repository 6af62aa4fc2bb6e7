//! Caching placement optimization for a two-tier wireless caching network in
//! which fixed helpers and a fraction of mobile users hold content caches and
//! requests are served from the local cache, a nearby device (D2D), or a nearby
//! helper before falling back to the cellular network.
//!
//! The crate provides:
//!
//! - [`model`] — domain types (scenario parameters, Zipf popularity, paired
//!   caching-probability vectors) and the closed-form per-content / total
//!   offloading probabilities with exact gradients.
//! - [`projection`] — Euclidean projection onto a capped simplex and a generic
//!   monotone bisection root finder, shared by every solver.
//! - [`dc_solver`] — the joint two-tier placement optimizer: the non-convex
//!   objective is split into a difference of convex functions and minimized by
//!   successive linearized convex subproblems (projected gradient descent with
//!   Armijo backtracking on the inner solve).
//! - [`extreme_solvers`] — closed-form/convex solvers for the two one-tier
//!   special cases: helper-only water-filling and the user-only separable
//!   convex problem solved by dual bisection.
//! - [`baselines`] — popular-cache, even-cache, and non-joint comparison
//!   placements.
//! - [`simulator`] — a Poisson-point-process Monte Carlo simulator that
//!   realizes caches from a placement, executes the content access protocol
//!   for a reference user at the origin, and estimates empirical offloading
//!   probabilities with confidence intervals.

pub mod baselines;
pub mod dc_solver;
mod error;
pub mod extreme_solvers;
pub mod model;
pub mod projection;
pub mod simulator;

pub use error::{Error, Result};
pub use model::{OffloadReport, Placement, PlacementGrad, Popularity, ReportKind, ScenarioConfig};
