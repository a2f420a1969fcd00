//! Event-driven simulation of a tree of cache nodes.
//!
//! Requests enter at nodes with exogenous Poisson streams and climb toward
//! the publisher until some node holds a live copy. The copy is then pushed
//! back down the miss path at the same instant (zero download delay), each
//! node on the way applying its own policy's admission and eviction rules.

mod engine;
mod metrics;
mod topology;

pub use engine::{run_simulation, ExogenousSource, Network, SimConfig, SimEvent, SimEventKind};
pub use metrics::{aggregate_rate, Counters, Metrics, WindowCounts};
pub use topology::{NodeSpec, Topology};
