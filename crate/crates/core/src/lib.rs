//! Harmonic influence of nodes in weighted social graphs.
//!
//! The influence of a leader node is the sum of entries of the solution of
//! a discrete Dirichlet problem pinning the leader's opinion to 1 and a
//! distinguished *field* node's opinion to 0. This crate computes it two
//! ways: exactly, by solving grounded-Laplacian linear systems, and
//! approximately, by a synchronous distributed message passing algorithm
//! that estimates all leaders at once. On top of the two solvers sit the
//! experiment drivers: dynamic topology changes applied to a running
//! message state, ranking comparisons and community summaries, convergence
//! sweeps, and a local stability probe of the message fixed point.

pub mod analysis;
pub mod dynamic;
pub mod error;
pub mod exact;
pub mod gen;
pub mod graph;
pub mod io;
pub mod mpa;

pub use error::{Error, Result};
pub use exact::{exact_influence_all, solve_dirichlet, InfluenceProfile, ProfileKind};
pub use graph::{NodeId, WeightedFieldGraph, FIELD};
pub use mpa::{estimate, estimate_all, mpa_init, mpa_run, mpa_step, MessageState, StoppingConfig};
