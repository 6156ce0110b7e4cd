//! Construction and clustering of scale-free overlay networks.
//!
//! The crate builds overlay graphs whose degree distribution follows a
//! discrete power law `p(k) = k^{-gamma} / zeta(gamma, k_min)`, partitions
//! them into clusters around high-degree core nodes, and measures how close
//! an empirical degree distribution comes to the theoretical target.
//!
//! Two construction routes are provided:
//!
//! * [`centralized`] — a master process rewires a node set by probabilistic
//!   edge acceptance, then assigns every server node to its nearest core by
//!   breadth-first distance.
//! * [`rewire`] — every edge of an existing graph is rewired by a pair of
//!   degree- and id-biased random walks, using only neighbor-local
//!   information.
//!
//! Clustering likewise comes in a centralized form ([`centralized::assign_clusters`])
//! and as an asynchronous message-passing protocol ([`protocol`]) executed on a
//! deterministic discrete-event network ([`simnet`]).

pub mod centralized;
pub mod graph;
pub mod metrics;
pub mod powerlaw;
pub mod protocol;
pub mod rewire;
pub mod simnet;
pub mod topology;
pub mod walk;

pub use graph::{Graph, GraphBuilder, NodeId};
pub use powerlaw::{DegreeDistribution, PowerLawParams};
