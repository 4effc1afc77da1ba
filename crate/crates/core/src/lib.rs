//! Simulator for grid-organized heterogeneous sensor networks that route
//! cross-sensor queries through per-grid coordinators and a typed cloud store.
//!
//! The pipeline is: partition sensors into type-homogeneous grids
//! ([`partition`]), elect the member nearest each grid centroid as
//! coordinator ([`election`]), register everything with the simulated cloud
//! ([`cloud`]), then execute a workload under either coordinator-mediated
//! routing ([`protocol`]) or a direct peer-to-peer baseline, charging every
//! message to per-node energy ledgers ([`energy`]). [`sim`] wires the stages
//! together deterministically; [`scenario`] is the on-disk input format.

pub mod cloud;
pub mod election;
pub mod energy;
pub mod model;
pub mod partition;
pub mod protocol;
pub mod scenario;
pub mod sim;

pub use model::{euclidean_distance, GridId, NodeId, Position, Reading, SensorNode, SensorType};
pub use partition::{compute_grids, Grid, Threshold};
