//! Event-driven Monte Carlo core for the contact process on random
//! d-regular graphs and on the infinite d-regular tree.
//!
//! The crate is `no_std` (with `alloc`): it holds the pure simulation
//! machinery — configuration-model graph sampling, two contact-process
//! engines (aggregate-rate Gillespie and the graphical representation),
//! an exact CTMC oracle for tiny instances, the lazy infinite-tree
//! process with border/pioneer tracking, the grow-and-explore couplings,
//! and the growth-rate / survival estimators. File formats, CLI and
//! parallel experiment drivers live in the companion `contact-sim` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod brw;
pub mod contact;
pub mod ctmc;
pub mod error;
pub mod estimate;
pub mod explore;
pub mod graph;
pub mod graphical;
pub mod indexed_set;
pub mod oracle;
pub mod rng;
pub mod stats;
pub mod tree;

pub use error::CoreError;
pub use graph::{HalfEdge, Multigraph, SimpleRegularGraph, Topology};
