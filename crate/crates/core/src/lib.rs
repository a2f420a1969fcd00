//! Discrete-event simulator and analytical toolkit for TTU-aware cache
//! networks.
//!
//! The crate is organised bottom-up:
//!
//! - [`workload`]: content catalog, Zipf popularity, Poisson arrivals, TTU stamps
//! - [`cache`]: per-node cache state, rate estimators and the FIFO/LRU/LFU baselines
//! - [`tlru`]: the time-aware LRU policy (local TTU, admission, contraction set)
//! - [`sim`]: tree topologies, the event loop and metric collection
//! - [`analytics`]: Che approximation, Newton solver, hit probabilities, M/M/1 delay
//! - [`ergodicity`]: exhaustive small-instance state-graph analysis of policies
//! - [`config`] and [`experiment`]: declarative experiments and CLI subcommands

pub mod analytics;
pub mod cache;
pub mod config;
pub mod ergodicity;
pub mod error;
pub mod experiment;
pub mod sim;
pub mod tlru;
pub mod workload;

pub use error::{Error, Result};

/// Simulated time in seconds.
pub type SimTime = f64;

/// Content identifier. Identifiers run from 1 to the catalog size and double
/// as popularity ranks (id 1 is the most popular).
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ContentId(pub u32);

impl ContentId {
    /// Zero-based position in catalog-indexed vectors.
    pub fn index(self) -> usize {
        (self.0 - 1) as usize
    }
}

impl std::fmt::Display for ContentId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Index of a node inside a [`sim::Topology`].
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl std::fmt::Display for NodeId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "n{}", self.0)
    }
}
