//! Centroid computation and coordinator election.
//!
//! Each grid's centroid is the arithmetic mean of member positions; the
//! member nearest the centroid (ties broken by smallest node id) becomes the
//! grid's coordinator. Election runs once per scenario; there is no
//! re-election on depletion or failure.

use crate::model::{euclidean_distance, GridId, NodeId, Position};
use crate::partition::Grid;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

/// Mean position of a grid's members, kept at full precision.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Centroid {
    pub grid_id: GridId,
    pub point: Position,
}

#[derive(Debug, Error, PartialEq)]
pub enum ElectionError {
    #[error("no position known for member {0}")]
    MissingPosition(NodeId),
    #[error("grid {0} has no members")]
    EmptyGrid(GridId),
}

/// Arithmetic mean of the member positions.
pub fn centroid(
    grid: &Grid,
    positions: &BTreeMap<NodeId, Position>,
) -> Result<Centroid, ElectionError> {
    if grid.members.is_empty() {
        return Err(ElectionError::EmptyGrid(grid.grid_id.clone()));
    }
    let mut sum = Position::new(0.0, 0.0, 0.0);
    for member in &grid.members {
        let p = positions
            .get(member)
            .ok_or_else(|| ElectionError::MissingPosition(member.clone()))?;
        sum.x += p.x;
        sum.y += p.y;
        sum.z += p.z;
    }
    let k = grid.members.len() as f64;
    Ok(Centroid {
        grid_id: grid.grid_id.clone(),
        point: Position::new(sum.x / k, sum.y / k, sum.z / k),
    })
}

/// The member closest to the grid centroid; distance ties go to the smallest
/// node id.
pub fn elect_coordinator(
    grid: &Grid,
    positions: &BTreeMap<NodeId, Position>,
) -> Result<NodeId, ElectionError> {
    let c = centroid(grid, positions)?.point;
    let mut best: Option<(f64, &NodeId)> = None;
    for member in &grid.members {
        let p = positions
            .get(member)
            .ok_or_else(|| ElectionError::MissingPosition(member.clone()))?;
        let d = euclidean_distance(*p, c);
        let closer = match best {
            None => true,
            Some((bd, bid)) => d < bd || (d == bd && member < bid),
        };
        if closer {
            best = Some((d, member));
        }
    }
    Ok(best.expect("grid non-empty").1.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{SensorNode, SensorType};
    use crate::partition::{compute_grids, Threshold};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn grid_of(ids: &[&str]) -> Grid {
        Grid {
            grid_id: GridId::nth(1),
            sensor_type: SensorType::from("environment"),
            seed: NodeId::from(ids[0]),
            members: ids.iter().map(|&i| NodeId::from(i)).collect(),
            coordinator: None,
        }
    }

    fn positions(entries: &[(&str, f64, f64, f64)]) -> BTreeMap<NodeId, Position> {
        entries
            .iter()
            .map(|&(id, x, y, z)| (NodeId::from(id), Position::new(x, y, z)))
            .collect()
    }

    #[test]
    fn g1_centroid_and_coordinator() {
        let g = grid_of(&["A", "D", "H"]);
        let pos = positions(&[
            ("A", 30.0, 40.0, 10.0),
            ("D", 70.0, 80.0, 100.0),
            ("H", 72.0, 78.0, 90.0),
        ]);
        let c = centroid(&g, &pos).unwrap();
        assert_abs_diff_eq!(c.point.x, 57.3333, epsilon = 1e-3);
        assert_abs_diff_eq!(c.point.y, 66.0, epsilon = 1e-3);
        assert_abs_diff_eq!(c.point.z, 66.6667, epsilon = 1e-3);
        assert_eq!(elect_coordinator(&g, &pos).unwrap(), NodeId::from("H"));
    }

    #[test]
    fn g2_centroid_and_coordinator() {
        let g = grid_of(&["B", "C", "F"]);
        let pos = positions(&[
            ("B", 40.0, 20.0, 70.0),
            ("C", 50.0, 70.0, 120.0),
            ("F", 65.0, 60.0, 150.0),
        ]);
        let c = centroid(&g, &pos).unwrap();
        assert_abs_diff_eq!(c.point.x, 51.6667, epsilon = 1e-3);
        assert_abs_diff_eq!(c.point.y, 50.0, epsilon = 1e-3);
        assert_abs_diff_eq!(c.point.z, 113.3333, epsilon = 1e-3);
        assert_eq!(elect_coordinator(&g, &pos).unwrap(), NodeId::from("C"));
    }

    #[test]
    fn singleton_centroid_is_member_position() {
        let g = grid_of(&["E"]);
        let pos = positions(&[("E", 80.0, 15.0, 110.0)]);
        let c = centroid(&g, &pos).unwrap();
        assert_eq!(c.point, Position::new(80.0, 15.0, 110.0));
        assert_eq!(elect_coordinator(&g, &pos).unwrap(), NodeId::from("E"));
    }

    #[test]
    fn equidistant_tie_breaks_to_smaller_id() {
        // symmetric about the centroid (5,0,0)
        let g = grid_of(&["Q", "P"]);
        let pos = positions(&[("Q", 0.0, 0.0, 0.0), ("P", 10.0, 0.0, 0.0)]);
        assert_eq!(elect_coordinator(&g, &pos).unwrap(), NodeId::from("P"));
    }

    #[test]
    fn missing_position_reported() {
        let g = grid_of(&["A", "B"]);
        let pos = positions(&[("A", 0.0, 0.0, 0.0)]);
        assert_eq!(
            centroid(&g, &pos),
            Err(ElectionError::MissingPosition(NodeId::from("B")))
        );
    }

    fn arb_members() -> impl Strategy<Value = Vec<(String, Position)>> {
        prop::collection::btree_map(
            "[a-z][a-z0-9]{0,4}",
            (0.0..200.0f64, 0.0..200.0f64, 0.0..200.0f64),
            1..50,
        )
        .prop_map(|m| {
            m.into_iter()
                .map(|(id, (x, y, z))| (id, Position::new(x, y, z)))
                .collect()
        })
    }

    /// Gap between the best and second-best centroid distance. Equivariance
    /// under translation/scaling only holds in exact arithmetic, so the
    /// property tests skip near-ties that rounding could flip.
    fn runner_up_gap(g: &Grid, pos: &BTreeMap<NodeId, Position>) -> f64 {
        let c = centroid(g, pos).unwrap().point;
        let mut ds: Vec<f64> = g.members.iter().map(|m| euclidean_distance(pos[m], c)).collect();
        ds.sort_by(|a, b| a.partial_cmp(b).unwrap());
        if ds.len() < 2 {
            f64::INFINITY
        } else {
            ds[1] - ds[0]
        }
    }

    fn build(members: &[(String, Position)]) -> (Grid, BTreeMap<NodeId, Position>) {
        let g = Grid {
            grid_id: GridId::nth(1),
            sensor_type: SensorType::from("environment"),
            seed: NodeId::new(members[0].0.clone()),
            members: members.iter().map(|(id, _)| NodeId::new(id.clone())).collect(),
            coordinator: None,
        };
        let pos = members
            .iter()
            .map(|(id, p)| (NodeId::new(id.clone()), *p))
            .collect();
        (g, pos)
    }

    proptest! {
        #[test]
        fn argmin_matches_brute_force(members in arb_members()) {
            let (g, pos) = build(&members);
            let elected = elect_coordinator(&g, &pos).unwrap();
            let c = centroid(&g, &pos).unwrap().point;
            let elected_d = euclidean_distance(pos[&elected], c);
            for m in &g.members {
                prop_assert!(euclidean_distance(pos[m], c) >= elected_d);
            }
        }

        #[test]
        fn centroid_in_bounding_box(members in arb_members()) {
            let (g, pos) = build(&members);
            let c = centroid(&g, &pos).unwrap().point;
            let xs: Vec<f64> = g.members.iter().map(|m| pos[m].x).collect();
            let ys: Vec<f64> = g.members.iter().map(|m| pos[m].y).collect();
            let zs: Vec<f64> = g.members.iter().map(|m| pos[m].z).collect();
            let eps = 1e-9;
            prop_assert!(c.x >= xs.iter().cloned().fold(f64::INFINITY, f64::min) - eps);
            prop_assert!(c.x <= xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max) + eps);
            prop_assert!(c.y >= ys.iter().cloned().fold(f64::INFINITY, f64::min) - eps);
            prop_assert!(c.y <= ys.iter().cloned().fold(f64::NEG_INFINITY, f64::max) + eps);
            prop_assert!(c.z >= zs.iter().cloned().fold(f64::INFINITY, f64::min) - eps);
            prop_assert!(c.z <= zs.iter().cloned().fold(f64::NEG_INFINITY, f64::max) + eps);
        }

        #[test]
        fn translation_equivariance(
            members in arb_members(),
            dx in -50.0..50.0f64, dy in -50.0..50.0f64, dz in -50.0..50.0f64,
        ) {
            let (g, pos) = build(&members);
            prop_assume!(runner_up_gap(&g, &pos) > 1e-6);
            let shifted: BTreeMap<NodeId, Position> = pos
                .iter()
                .map(|(id, p)| (id.clone(), Position::new(p.x + dx, p.y + dy, p.z + dz)))
                .collect();
            let c0 = centroid(&g, &pos).unwrap().point;
            let c1 = centroid(&g, &shifted).unwrap().point;
            prop_assert!((c1.x - c0.x - dx).abs() < 1e-6);
            prop_assert!((c1.y - c0.y - dy).abs() < 1e-6);
            prop_assert!((c1.z - c0.z - dz).abs() < 1e-6);
            prop_assert_eq!(
                elect_coordinator(&g, &pos).unwrap(),
                elect_coordinator(&g, &shifted).unwrap()
            );
        }

        #[test]
        fn scaling_about_centroid_preserves_winner(members in arb_members(), scale in 0.1..10.0f64) {
            let (g, pos) = build(&members);
            prop_assume!(runner_up_gap(&g, &pos) > 1e-6);
            let c = centroid(&g, &pos).unwrap().point;
            let scaled: BTreeMap<NodeId, Position> = pos
                .iter()
                .map(|(id, p)| {
                    (id.clone(), Position::new(
                        c.x + (p.x - c.x) * scale,
                        c.y + (p.y - c.y) * scale,
                        c.z + (p.z - c.z) * scale,
                    ))
                })
                .collect();
            prop_assert_eq!(
                elect_coordinator(&g, &pos).unwrap(),
                elect_coordinator(&g, &scaled).unwrap()
            );
        }
    }

    // Also verify the paper grouping end to end from partition output.
    #[test]
    fn paper8_all_coordinators() {
        let nodes: Vec<SensorNode> = crate::partition::tests::paper8();
        let (grids, _) = compute_grids(&nodes, Threshold(110.0)).unwrap();
        let pos: BTreeMap<NodeId, Position> =
            nodes.iter().map(|n| (n.node_id.clone(), n.position)).collect();
        let coordinators: Vec<String> = grids
            .iter()
            .map(|g| elect_coordinator(g, &pos).unwrap().0)
            .collect();
        assert_eq!(coordinators, ["H", "C", "E", "G"]);
    }
}
