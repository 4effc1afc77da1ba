//! Shared scenario generators for the benchmarks.

use qcps_core::energy::RadioParams;
use qcps_core::model::{NodeId, Position, SensorNode, SensorType};
use qcps_core::protocol::Framing;
use qcps_core::sim::{Model, Scenario};
use qcps_core::Threshold;

/// Deterministic deployment of `n` nodes spread over a 200 m cube, cycling
/// through three sensor types. No RNG so benchmark inputs never drift.
pub fn synthetic_scenario(n: usize) -> Scenario {
    let types = ["environment", "activity", "electric"];
    let nodes = (0..n)
        .map(|i| {
            // low-discrepancy-ish spread via integer mixing
            let h = (i as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15);
            let x = (h % 2000) as f64 / 10.0;
            let y = ((h >> 16) % 2000) as f64 / 10.0;
            let z = ((h >> 32) % 2000) as f64 / 10.0;
            SensorNode::new(
                NodeId::new(format!("n{i:04}")),
                SensorType::from(types[i % types.len()]),
                Position::new(x, y, z),
            )
        })
        .collect();
    Scenario {
        nodes,
        threshold: Threshold(60.0),
        radio: RadioParams {
            e_elec_nj: 50.0,
            e_amp_pj: 100.0,
            compute_cost_nj: 5.0,
            gateway: Position::new(100.0, 100.0, 100.0),
        },
        framing: Framing {
            header_bits: 64,
            reading_bits: 256,
        },
        workload: Vec::new(),
        seed: 42,
        model: Model::Qcps,
    }
}
