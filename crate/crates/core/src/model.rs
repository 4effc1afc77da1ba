//! Core domain types shared by every stage of the pipeline.
//!
//! A sensor is the five-attribute tuple `[node id, type, grid id, position,
//! coordinator flag]`. All types here are immutable values; cloning is cheap
//! and runs never share mutable state through them.

use serde::{Deserialize, Serialize};
use std::fmt;

/// Unique identifier of a sensor. Ordering is lexicographic and total, which
/// is what makes every downstream tie-break deterministic.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub String);

impl NodeId {
    pub fn new(id: impl Into<String>) -> Self {
        NodeId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for NodeId {
    fn from(s: &str) -> Self {
        NodeId(s.to_owned())
    }
}

/// Sensor classification tag ("environment", "activity", ...). The set is
/// open; equality is exact string equality with no subtype hierarchy.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SensorType(pub String);

impl SensorType {
    pub fn new(name: impl Into<String>) -> Self {
        SensorType(name.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for SensorType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for SensorType {
    fn from(s: &str) -> Self {
        SensorType(s.to_owned())
    }
}

/// Unique identifier of a grid: "g1", "g2", ... in creation order.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GridId(pub String);

impl GridId {
    /// Id for the `n`-th grid created, 1-based.
    pub fn nth(n: usize) -> Self {
        GridId(format!("g{n}"))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for GridId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Deployment location in meters. Coordinates must be finite.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Position {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Position {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Position { x, y, z }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

/// One sensor with its full attribute tuple. `grid_id` is `None` before
/// partitioning; a coordinator always has a grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SensorNode {
    pub node_id: NodeId,
    pub sensor_type: SensorType,
    pub grid_id: Option<GridId>,
    pub position: Position,
    pub coordinator: bool,
}

impl SensorNode {
    /// A node as it enters the system: no grid, not a coordinator.
    pub fn new(node_id: NodeId, sensor_type: SensorType, position: Position) -> Self {
        SensorNode {
            node_id,
            sensor_type,
            grid_id: None,
            position,
            coordinator: false,
        }
    }
}

/// One timestamped scalar measurement owned by a single node.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Reading {
    pub node_id: NodeId,
    /// Simulation time in seconds, non-negative.
    pub sim_time: f64,
    pub value: f64,
    pub unit: String,
}

/// Straight-line distance in meters between two deployment positions.
pub fn euclidean_distance(a: Position, b: Position) -> f64 {
    let dx = a.x - b.x;
    let dy = a.y - b.y;
    let dz = a.z - b.z;
    (dx * dx + dy * dy + dz * dz).sqrt()
}
