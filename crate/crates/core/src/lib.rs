//! Simulation and analysis of controlled SI epidemics on graphs.
//!
//! The crate is organised by concern:
//!
//! - [`graph`]: topologies, cuts, crusades and exact CutWidth.
//! - [`engine`]: the discrete-time cure-then-infect state machine, flag
//!   observations, seeded RNG streams and trajectories.
//! - [`strategies`]: curing policies that turn observations into budget
//!   allocations.
//! - [`analysis`]: closed-form bound evaluators and Monte-Carlo helpers
//!   for the quantities the lower-bound argument is built from.
//! - [`harness`]: config files, replicated experiments and CSV output.

pub mod analysis;
pub mod engine;
pub mod graph;
pub mod harness;
pub mod strategies;

pub use graph::{Crusade, DfsOrder, GraphError, GraphTopology, NodeSet};
