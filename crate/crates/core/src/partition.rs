//! Sequential seed-distance partition of sensors into type-homogeneous grids.
//!
//! Nodes are processed in input order. The first node founds `g1`; each later
//! node joins the first existing grid (in creation order) whose type matches
//! and whose seed node lies strictly within the threshold distance, otherwise
//! it founds a new grid. Membership is always tested against the grid's seed,
//! never against other members, so the result depends only on input order.

use crate::model::{euclidean_distance, GridId, NodeId, SensorNode, SensorType};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use thiserror::Error;

/// A type-homogeneous group of sensors. The seed is the first member and the
/// anchor for all membership distance tests.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub grid_id: GridId,
    pub sensor_type: SensorType,
    pub seed: NodeId,
    pub members: Vec<NodeId>,
    pub coordinator: Option<NodeId>,
}

/// Pre-decided grid membership distance bound, meters. Strictly positive.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Threshold(pub f64);

impl Threshold {
    pub fn meters(self) -> f64 {
        self.0
    }

    pub fn is_valid(self) -> bool {
        self.0.is_finite() && self.0 > 0.0
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum PartitionError {
    #[error("duplicate node id {0}")]
    DuplicateNodeId(NodeId),
}

/// Assign every node to exactly one grid and return the grids in creation
/// order together with the nodes updated with their grid assignment
/// (`coordinator` reset to false; election happens later).
pub fn compute_grids(
    nodes: &[SensorNode],
    threshold: Threshold,
) -> Result<(Vec<Grid>, Vec<SensorNode>), PartitionError> {
    let mut seen = BTreeSet::new();
    for node in nodes {
        if !seen.insert(&node.node_id) {
            return Err(PartitionError::DuplicateNodeId(node.node_id.clone()));
        }
    }

    let mut grids: Vec<Grid> = Vec::new();
    let mut assigned: Vec<SensorNode> = Vec::with_capacity(nodes.len());
    // seed positions kept alongside to avoid re-looking them up
    let mut seed_positions = Vec::new();

    for node in nodes {
        let slot = grids.iter().zip(&seed_positions).position(|(g, &seed_pos)| {
            g.sensor_type == node.sensor_type
                && euclidean_distance(node.position, seed_pos) < threshold.meters()
        });
        let grid_id = match slot {
            Some(i) => {
                grids[i].members.push(node.node_id.clone());
                grids[i].grid_id.clone()
            }
            None => {
                let grid_id = GridId::nth(grids.len() + 1);
                grids.push(Grid {
                    grid_id: grid_id.clone(),
                    sensor_type: node.sensor_type.clone(),
                    seed: node.node_id.clone(),
                    members: vec![node.node_id.clone()],
                    coordinator: None,
                });
                seed_positions.push(node.position);
                grid_id
            }
        };
        let mut updated = node.clone();
        updated.grid_id = Some(grid_id);
        updated.coordinator = false;
        assigned.push(updated);
    }

    Ok((grids, assigned))
}
