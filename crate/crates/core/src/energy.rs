//! First-order radio energy accounting and the QCPS-vs-direct comparison.
//!
//! Transmitting `b` bits over distance `d` costs `(e_elec + e_amp * d^2) * b`
//! joules; receiving costs `e_elec * b`. Only sensors are tracked: the cloud
//! gateway is assumed mains-powered, so a cloud-originated message charges
//! just the sensor receiver.

use crate::model::{NodeId, Position};
use crate::protocol::{Message, Principal};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

/// Radio and compute cost constants plus the cloud uplink position.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadioParams {
    /// Transceiver electronics energy, nJ per bit.
    pub e_elec_nj: f64,
    /// Amplifier energy, pJ per bit per square meter.
    pub e_amp_pj: f64,
    /// Energy for one aggregation operation performed at a sensor, nJ.
    pub compute_cost_nj: f64,
    /// Where the cloud uplink sits; coordinators transmit to this point.
    pub gateway: Position,
}

impl RadioParams {
    pub fn e_elec_j(&self) -> f64 {
        self.e_elec_nj * 1e-9
    }

    pub fn e_amp_j(&self) -> f64 {
        self.e_amp_pj * 1e-12
    }

    pub fn compute_cost_j(&self) -> f64 {
        self.compute_cost_nj * 1e-9
    }

    /// Transmit energy for `bits` over `distance` meters.
    pub fn tx_energy(&self, bits: u64, distance: f64) -> f64 {
        (self.e_elec_j() + self.e_amp_j() * distance * distance) * bits as f64
    }

    /// Receive energy for `bits`.
    pub fn rx_energy(&self, bits: u64) -> f64 {
        self.e_elec_j() * bits as f64
    }
}

/// Accumulated costs for one sensor.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct NodeEnergy {
    pub tx_j: f64,
    pub rx_j: f64,
    pub compute_j: f64,
    pub msgs_sent: u64,
    pub msgs_received: u64,
}

impl NodeEnergy {
    pub fn radio_j(&self) -> f64 {
        self.tx_j + self.rx_j
    }

    pub fn total_j(&self) -> f64 {
        self.tx_j + self.rx_j + self.compute_j
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum EnergyError {
    #[error("ledgers cover different node sets")]
    ScenarioMismatch,
}

/// Per-node energy and message accumulators plus the cloud-side operation
/// count. Created with the full node roster so untouched nodes still report
/// zeroes.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EnergyLedger {
    pub nodes: BTreeMap<NodeId, NodeEnergy>,
    pub cloud_ops: u64,
}

impl EnergyLedger {
    pub fn with_nodes<'a>(ids: impl IntoIterator<Item = &'a NodeId>) -> Self {
        EnergyLedger {
            nodes: ids
                .into_iter()
                .map(|id| (id.clone(), NodeEnergy::default()))
                .collect(),
            cloud_ops: 0,
        }
    }

    /// Charge one message: sender pays transmit energy over `distance`,
    /// a sensor receiver pays receive energy, the cloud pays nothing.
    pub fn charge_message(&mut self, msg: &Message, distance: f64, params: &RadioParams) {
        debug_assert!(distance >= 0.0);
        if let Principal::Node(src) = &msg.src {
            let e = self.nodes.entry(src.clone()).or_default();
            e.tx_j += params.tx_energy(msg.payload_bits, distance);
            e.msgs_sent += 1;
        }
        if let Principal::Node(dst) = &msg.dst {
            let e = self.nodes.entry(dst.clone()).or_default();
            e.rx_j += params.rx_energy(msg.payload_bits);
            e.msgs_received += 1;
        }
    }

    /// Charge one aggregation operation performed at a sensor.
    pub fn charge_compute(&mut self, node: &NodeId, params: &RadioParams) {
        self.nodes.entry(node.clone()).or_default().compute_j += params.compute_cost_j();
    }

    /// Count one cloud-side computation (fetch or aggregate).
    pub fn record_cloud_op(&mut self) {
        self.cloud_ops += 1;
    }

    pub fn total_radio_j(&self) -> f64 {
        self.nodes.values().map(NodeEnergy::radio_j).sum()
    }

    pub fn total_compute_j(&self) -> f64 {
        self.nodes.values().map(|e| e.compute_j).sum()
    }

    pub fn total_j(&self) -> f64 {
        self.nodes.values().map(NodeEnergy::total_j).sum()
    }
}

/// Per-node and total comparison between a QCPS run and the direct baseline
/// on the same scenario and workload.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostComparison {
    pub rows: Vec<ComparisonRow>,
    pub qcps_total: NodeEnergy,
    pub baseline_total: NodeEnergy,
    pub qcps_cloud_ops: u64,
    pub baseline_cloud_ops: u64,
    /// QCPS total sensor energy over baseline total; absent when the
    /// baseline total is zero.
    pub energy_ratio: Option<f64>,
    /// True iff QCPS total sensor energy is strictly below baseline.
    pub qcps_cheaper: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub node_id: NodeId,
    pub qcps: NodeEnergy,
    pub baseline: NodeEnergy,
}

fn sum(nodes: &BTreeMap<NodeId, NodeEnergy>) -> NodeEnergy {
    let mut total = NodeEnergy::default();
    for e in nodes.values() {
        total.tx_j += e.tx_j;
        total.rx_j += e.rx_j;
        total.compute_j += e.compute_j;
        total.msgs_sent += e.msgs_sent;
        total.msgs_received += e.msgs_received;
    }
    total
}

/// Compare two finished ledgers from the same scenario.
pub fn compare_costs(
    qcps: &EnergyLedger,
    baseline: &EnergyLedger,
) -> Result<CostComparison, EnergyError> {
    if qcps.nodes.keys().ne(baseline.nodes.keys()) {
        return Err(EnergyError::ScenarioMismatch);
    }
    let rows = qcps
        .nodes
        .iter()
        .map(|(id, e)| ComparisonRow {
            node_id: id.clone(),
            qcps: *e,
            baseline: baseline.nodes[id],
        })
        .collect();
    let qcps_total = sum(&qcps.nodes);
    let baseline_total = sum(&baseline.nodes);
    let (q, b) = (qcps.total_j(), baseline.total_j());
    Ok(CostComparison {
        rows,
        qcps_total,
        baseline_total,
        qcps_cloud_ops: qcps.cloud_ops,
        baseline_cloud_ops: baseline.cloud_ops,
        energy_ratio: if b > 0.0 { Some(q / b) } else { None },
        qcps_cheaper: q < b,
    })
}

impl CostComparison {
    /// CSV with one row per node and model:
    /// `node_id,model,tx_j,rx_j,compute_j,msgs_sent,msgs_received`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("node_id,model,tx_j,rx_j,compute_j,msgs_sent,msgs_received\n");
        for row in &self.rows {
            for (model, e) in [("qcps", &row.qcps), ("baseline", &row.baseline)] {
                out.push_str(&format!(
                    "{},{},{:.9e},{:.9e},{:.9e},{},{}\n",
                    row.node_id, model, e.tx_j, e.rx_j, e.compute_j, e.msgs_sent, e.msgs_received
                ));
            }
        }
        out
    }

    /// Human-readable table for standard output.
    pub fn render_table(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "{:<10} {:>14} {:>14} {:>14} {:>14} {:>6} {:>6}\n",
            "node", "qcps_radio_j", "base_radio_j", "qcps_comp_j", "base_comp_j", "q_msg", "b_msg"
        ));
        for row in &self.rows {
            out.push_str(&format!(
                "{:<10} {:>14.6e} {:>14.6e} {:>14.6e} {:>14.6e} {:>6} {:>6}\n",
                row.node_id,
                row.qcps.radio_j(),
                row.baseline.radio_j(),
                row.qcps.compute_j,
                row.baseline.compute_j,
                row.qcps.msgs_sent + row.qcps.msgs_received,
                row.baseline.msgs_sent + row.baseline.msgs_received,
            ));
        }
        out.push_str(&format!(
            "total radio: qcps {:.6e} J, baseline {:.6e} J\n",
            self.qcps_total.radio_j(),
            self.baseline_total.radio_j()
        ));
        out.push_str(&format!(
            "total compute: qcps {:.6e} J, baseline {:.6e} J\n",
            self.qcps_total.compute_j, self.baseline_total.compute_j
        ));
        out.push_str(&format!(
            "cloud ops: qcps {}, baseline {}\n",
            self.qcps_cloud_ops, self.baseline_cloud_ops
        ));
        match self.energy_ratio {
            Some(r) => out.push_str(&format!("energy ratio qcps/baseline: {r:.4}\n")),
            None => out.push_str("energy ratio qcps/baseline: n/a (baseline total is zero)\n"),
        }
        out.push_str(&format!(
            "QCPS cheaper: {}\n",
            if self.qcps_cheaper { "yes" } else { "no" }
        ));
        out
    }
}
