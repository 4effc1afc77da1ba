//! On-disk scenario format: a single TOML document carrying the node roster,
//! threshold, radio constants, workload, and seed. Node order in the file is
//! authoritative because the partition is order-dependent. Unknown keys are
//! rejected.
//!
//! ```toml
//! seed = 7
//! threshold = 110.0
//!
//! [radio]
//! e_elec_nj = 50.0
//! e_amp_pj = 100.0
//! header_bits = 64
//! reading_bits = 256
//! gateway = { x = 60.0, y = 55.0, z = 100.0 }
//!
//! [[nodes]]
//! id = "A"
//! type = "environment"
//! x = 30.0
//! y = 40.0
//! z = 10.0
//!
//! [[workload]]
//! at = 1.0
//! action = { sense = { node = "A", value = 21.5, unit = "C" } }
//! ```

use crate::energy::RadioParams;
use crate::model::{NodeId, Position, SensorNode, SensorType};
use crate::partition::Threshold;
use crate::protocol::Framing;
use crate::sim::{Model, Scenario, WorkloadItem};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("scenario parse error: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("node {0}: coordinate is not a finite number")]
    BadCoordinate(NodeId),
    #[error("invalid scenario value: {0}")]
    InvalidValue(String),
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    seed: u64,
    threshold: f64,
    radio: RadioSection,
    nodes: Vec<NodeEntry>,
    workload: Vec<WorkloadItem>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NodeEntry {
    id: String,
    #[serde(rename = "type")]
    sensor_type: String,
    x: f64,
    y: f64,
    z: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RadioSection {
    e_elec_nj: f64,
    e_amp_pj: f64,
    #[serde(default = "default_compute_cost")]
    compute_cost_nj: f64,
    header_bits: u64,
    reading_bits: u64,
    gateway: GatewayEntry,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GatewayEntry {
    x: f64,
    y: f64,
    z: f64,
}

fn default_compute_cost() -> f64 {
    5.0
}

/// Parse a scenario document. The resulting scenario defaults to the QCPS
/// model; callers override via `--model`.
pub fn parse_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    let file: ScenarioFile = toml::from_str(text)?;

    let mut nodes = Vec::with_capacity(file.nodes.len());
    for entry in &file.nodes {
        let id = NodeId::new(entry.id.clone());
        if id.as_str().is_empty() {
            return Err(ScenarioError::InvalidValue("empty node id".into()));
        }
        let position = Position::new(entry.x, entry.y, entry.z);
        if !position.is_finite() {
            return Err(ScenarioError::BadCoordinate(id));
        }
        nodes.push(SensorNode::new(
            id,
            SensorType::new(entry.sensor_type.clone()),
            position,
        ));
    }

    if !(file.threshold.is_finite() && file.threshold > 0.0) {
        return Err(ScenarioError::InvalidValue(
            "threshold must be finite and positive".into(),
        ));
    }
    let r = &file.radio;
    let gateway = Position::new(r.gateway.x, r.gateway.y, r.gateway.z);
    for (name, v) in [
        ("e_elec_nj", r.e_elec_nj),
        ("e_amp_pj", r.e_amp_pj),
        ("compute_cost_nj", r.compute_cost_nj),
    ] {
        if !(v.is_finite() && v >= 0.0) {
            return Err(ScenarioError::InvalidValue(format!(
                "radio.{name} must be finite and non-negative"
            )));
        }
    }
    if !gateway.is_finite() {
        return Err(ScenarioError::InvalidValue(
            "radio.gateway coordinates must be finite".into(),
        ));
    }
    if r.header_bits == 0 || r.reading_bits == 0 {
        return Err(ScenarioError::InvalidValue(
            "radio bit sizes must be positive".into(),
        ));
    }
    for (i, item) in file.workload.iter().enumerate() {
        if !(item.at.is_finite() && item.at >= 0.0) {
            return Err(ScenarioError::InvalidValue(format!(
                "workload[{i}].at must be finite and non-negative"
            )));
        }
    }

    Ok(Scenario {
        nodes,
        threshold: Threshold(file.threshold),
        radio: RadioParams {
            e_elec_nj: r.e_elec_nj,
            e_amp_pj: r.e_amp_pj,
            compute_cost_nj: r.compute_cost_nj,
            gateway,
        },
        framing: Framing {
            header_bits: r.header_bits,
            reading_bits: r.reading_bits,
        },
        workload: file.workload,
        seed: file.seed,
        model: Model::Qcps,
    })
}

/// Render a scenario back into document form. `parse_scenario` of the output
/// reproduces the input scenario (model aside, which the file does not carry).
pub fn to_file_text(scenario: &Scenario) -> String {
    let file = ScenarioFile {
        seed: scenario.seed,
        threshold: scenario.threshold.meters(),
        radio: RadioSection {
            e_elec_nj: scenario.radio.e_elec_nj,
            e_amp_pj: scenario.radio.e_amp_pj,
            compute_cost_nj: scenario.radio.compute_cost_nj,
            header_bits: scenario.framing.header_bits,
            reading_bits: scenario.framing.reading_bits,
            gateway: GatewayEntry {
                x: scenario.radio.gateway.x,
                y: scenario.radio.gateway.y,
                z: scenario.radio.gateway.z,
            },
        },
        nodes: scenario
            .nodes
            .iter()
            .map(|n| NodeEntry {
                id: n.node_id.as_str().to_owned(),
                sensor_type: n.sensor_type.as_str().to_owned(),
                x: n.position.x,
                y: n.position.y,
                z: n.position.z,
            })
            .collect(),
        workload: scenario.workload.clone(),
    };
    toml::to_string_pretty(&file).expect("scenario serializes")
}
