//! Random bipartite allocation graphs (the cuckoo-hashing model), the
//! Karp-Sipser greedy matcher, and the closed-form threshold and fluid-limit
//! formulas that predict how far its first phase gets.
//!
//! The crate is split the same way an experiment is:
//!
//! * [`graph_model`] samples graphs: `n` left vertices each choosing `d`
//!   right vertices uniformly with replacement, or a core graph with right
//!   degrees at least two built from the configuration model.
//! * [`matching`] runs Karp-Sipser, an exact Hopcroft-Karp matcher and a
//!   brute-force oracle for tiny instances.
//! * [`analysis`] solves for the thresholds and evaluates the trajectory.
//! * [`montecarlo`] runs seeded trials and compares them with [`analysis`].
//! * [`cli`] is the command-line front end.

// Range checks are written as `!(x > 0.0)` so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod cli;
pub mod error;
pub mod graph_model;
pub mod matching;
pub mod montecarlo;

pub use error::{Error, Result};
pub use graph_model::{BipartiteGraph, DegreeState, ModelParams};
pub use matching::{KsResult, Matching};
