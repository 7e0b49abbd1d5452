//! Round-synchronous message-passing simulation with a suite of distributed
//! shortest-path algorithms, sequential oracles to check them against, and
//! dilation/congestion metering.
//!
//! The engine ([`engine`]) drives per-node programs in lockstep rounds and
//! records how many messages cross each edge. On top of it sit the pipelined
//! short-range SSSP family ([`short_range`]), collections of truncated
//! shortest-path trees ([`csssp`]), greedy blocker-set selection
//! ([`blocker`]), and three APSP-style compositions ([`ksp`], [`rand_apsp`],
//! [`approx`]). Everything distributed has a sequential counterpart in
//! [`oracle`] computed by independent means.

pub mod approx;
pub mod blocker;
pub mod csssp;
pub mod engine;
pub mod generate;
pub mod graph;
pub mod ksp;
pub mod num;
pub mod oracle;
pub mod rand_apsp;
pub mod short_range;
pub mod spanning;

pub use engine::{
    BandwidthMode, CommScope, EngineConfig, EngineError, NodeProgram, NodeView, Payload,
    PhasedMetrics, RoundMetrics,
};
pub use graph::{NodeId, WeightedGraph, WeightMode};
pub use oracle::Dist;
