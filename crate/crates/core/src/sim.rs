//! Deterministic scenario runner.
//!
//! A run wires the stages in a fixed order: partition, election, cloud
//! registration, then workload execution under either coordinator-mediated
//! routing (`qcps`) or direct peer-to-peer routing (`baseline`). Everything
//! is driven by virtual time; identical inputs produce bit-identical output.

use crate::cloud::{
    AggregateKind, AggregateResult, Cloud, CloudError, RegistrationRecord, TypeDatabase,
};
use crate::election::{centroid, elect_coordinator, Centroid, ElectionError};
use crate::energy::{compare_costs, CostComparison, EnergyError, EnergyLedger, RadioParams};
use crate::model::{euclidean_distance, GridId, NodeId, Position, Reading, SensorNode, SensorType};
use crate::partition::{compute_grids, Grid, PartitionError, Threshold};
use crate::protocol::{
    CrossGridQuery, Framing, Message, MessageKind, Payload, Principal, ProtocolError,
    ProtocolState, Topology,
};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

/// Which routing model a run uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    Qcps,
    Baseline,
}

/// One timestamped workload step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WorkloadItem {
    pub at: f64,
    pub action: WorkloadAction,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WorkloadAction {
    /// A node takes a measurement and (under QCPS) reports it to its
    /// coordinator; under baseline it is stored locally.
    Sense {
        node: NodeId,
        value: f64,
        #[serde(default)]
        unit: String,
    },
    /// A grid's coordinator flushes its buffer to the cloud. Baseline no-op.
    Sync { grid: GridId },
    /// One sensor asks for another sensor's latest data.
    CrossQuery { requester: NodeId, target: NodeId },
    /// A user poses an aggregate directly to the cloud (QCPS) or to a
    /// designated sink node (baseline).
    UserAggregate {
        sensor_type: SensorType,
        kind: AggregateKind,
    },
}

/// Complete simulation input.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub nodes: Vec<SensorNode>,
    pub threshold: Threshold,
    pub radio: RadioParams,
    pub framing: Framing,
    pub workload: Vec<WorkloadItem>,
    pub seed: u64,
    pub model: Model,
}

/// Answer delivered to the requester of a cross-grid query.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QueryAnswer {
    pub requester: NodeId,
    pub target: NodeId,
    pub data: Option<Reading>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AggregateAnswer {
    pub sensor_type: SensorType,
    pub kind: AggregateKind,
    pub result: AggregateResult,
}

/// Everything a run produces.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub grids: Vec<Grid>,
    pub centroids: Vec<Centroid>,
    pub nodes: Vec<SensorNode>,
    pub ledger: EnergyLedger,
    pub trace: Vec<Message>,
    pub query_answers: Vec<QueryAnswer>,
    pub aggregate_answers: Vec<AggregateAnswer>,
    /// Final cloud database contents, keyed by sensor type. Empty rows under
    /// the baseline model, which has no cloud.
    pub databases: BTreeMap<SensorType, TypeDatabase>,
}

impl RunResult {
    /// The line-oriented trace export, one message per line.
    pub fn trace_text(&self) -> String {
        let mut out = String::new();
        for msg in &self.trace {
            out.push_str(&msg.trace_line());
            out.push('\n');
        }
        out
    }

    pub fn coordinator_of(&self, grid: &GridId) -> Option<&NodeId> {
        self.grids
            .iter()
            .find(|g| &g.grid_id == grid)
            .and_then(|g| g.coordinator.as_ref())
    }
}

/// Failure of one workload item, with enough context to name the culprit.
#[derive(Debug, Error, PartialEq)]
pub enum ActionError {
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error(transparent)]
    Cloud(#[from] CloudError),
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("unknown grid {0}")]
    UnknownGrid(GridId),
}

#[derive(Debug, Error, PartialEq)]
pub enum SimError {
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error(transparent)]
    Partition(#[from] PartitionError),
    #[error(transparent)]
    Election(#[from] ElectionError),
    #[error("registration failed: {0}")]
    Registration(CloudError),
    #[error("workload item {index}: {source}")]
    Workload {
        index: usize,
        #[source]
        source: ActionError,
    },
}

fn validate(scenario: &Scenario) -> Result<(), SimError> {
    if !scenario.threshold.is_valid() {
        return Err(SimError::InvalidScenario(
            "threshold must be finite and positive".into(),
        ));
    }
    for node in &scenario.nodes {
        if node.node_id.as_str().is_empty() {
            return Err(SimError::InvalidScenario("empty node id".into()));
        }
        if !node.position.is_finite() {
            return Err(SimError::InvalidScenario(format!(
                "node {} has a non-finite coordinate",
                node.node_id
            )));
        }
    }
    let r = &scenario.radio;
    if !(r.e_elec_nj >= 0.0 && r.e_amp_pj >= 0.0 && r.compute_cost_nj >= 0.0)
        || !r.gateway.is_finite()
    {
        return Err(SimError::InvalidScenario(
            "radio parameters must be finite and non-negative".into(),
        ));
    }
    if scenario.framing.reading_bits < 1 || scenario.framing.header_bits < 1 {
        return Err(SimError::InvalidScenario(
            "framing bit sizes must be positive".into(),
        ));
    }
    for item in &scenario.workload {
        if !(item.at >= 0.0) {
            return Err(SimError::InvalidScenario(
                "workload times must be non-negative".into(),
            ));
        }
    }
    Ok(())
}

struct Engine<'s> {
    scenario: &'s Scenario,
    roster: BTreeMap<NodeId, SensorNode>,
    topology: Topology,
    cloud: Cloud,
    proto: ProtocolState,
    ledger: EnergyLedger,
    trace: Vec<Message>,
    query_answers: Vec<QueryAnswer>,
    aggregate_answers: Vec<AggregateAnswer>,
    // baseline-only state
    local_latest: BTreeMap<NodeId, Reading>,
    next_seq: u64,
}

impl<'s> Engine<'s> {
    fn position_of(&self, p: &Principal) -> Position {
        match p {
            Principal::Node(id) => self.roster[id].position,
            Principal::Cloud => self.scenario.radio.gateway,
        }
    }

    fn charge_and_record(&mut self, msg: Message) {
        let d = euclidean_distance(self.position_of(&msg.src), self.position_of(&msg.dst));
        self.ledger.charge_message(&msg, d, &self.scenario.radio);
        self.trace.push(msg);
    }

    fn node(&self, id: &NodeId) -> Result<SensorNode, ActionError> {
        self.roster
            .get(id)
            .cloned()
            .ok_or_else(|| ActionError::UnknownNode(id.clone()))
    }

    fn run_qcps_item(&mut self, item: &WorkloadItem) -> Result<(), ActionError> {
        let framing = self.scenario.framing;
        match &item.action {
            WorkloadAction::Sense { node, value, unit } => {
                let member = self.node(node)?;
                let reading = Reading {
                    node_id: node.clone(),
                    sim_time: item.at,
                    value: *value,
                    unit: unit.clone(),
                };
                if let Some(msg) =
                    self.proto
                        .report_reading(&member, reading, &self.topology, framing, item.at)?
                {
                    self.charge_and_record(msg);
                }
            }
            WorkloadAction::Sync { grid } => {
                let coordinator_id = self
                    .topology
                    .coordinator_of
                    .get(grid)
                    .cloned()
                    .ok_or_else(|| ActionError::UnknownGrid(grid.clone()))?;
                let coordinator = self.node(&coordinator_id)?;
                if let Some((msg, _stored)) =
                    self.proto
                        .sync_to_cloud(&coordinator, &mut self.cloud, framing, item.at)?
                {
                    self.charge_and_record(msg);
                }
            }
            WorkloadAction::CrossQuery { requester, target } => {
                let requester_node = self.node(requester)?;
                let query = CrossGridQuery {
                    requester: requester.clone(),
                    target: target.clone(),
                    issued_at: item.at,
                };
                let res = self.proto.resolve_query(
                    &query,
                    &requester_node,
                    &self.cloud,
                    &self.topology,
                    framing,
                )?;
                self.ledger.record_cloud_op();
                for msg in res.messages {
                    self.charge_and_record(msg);
                }
                self.query_answers.push(QueryAnswer {
                    requester: requester.clone(),
                    target: target.clone(),
                    data: res.data,
                });
            }
            WorkloadAction::UserAggregate { sensor_type, kind } => {
                let result = self.cloud.user_query(sensor_type, *kind)?;
                self.ledger.record_cloud_op();
                self.aggregate_answers.push(AggregateAnswer {
                    sensor_type: sensor_type.clone(),
                    kind: *kind,
                    result,
                });
            }
        }
        Ok(())
    }

    fn emit_baseline(
        &mut self,
        time: f64,
        kind: MessageKind,
        src: NodeId,
        dst: NodeId,
        payload_bits: u64,
        payload: Payload,
    ) {
        let msg = Message {
            seq: self.next_seq,
            time,
            kind,
            src: Principal::Node(src),
            dst: Principal::Node(dst),
            payload_bits,
            payload,
        };
        self.next_seq += 1;
        self.charge_and_record(msg);
    }

    fn run_baseline_item(&mut self, item: &WorkloadItem) -> Result<(), ActionError> {
        let framing = self.scenario.framing;
        match &item.action {
            WorkloadAction::Sense { node, value, unit } => {
                self.node(node)?;
                self.local_latest.insert(
                    node.clone(),
                    Reading {
                        node_id: node.clone(),
                        sim_time: item.at,
                        value: *value,
                        unit: unit.clone(),
                    },
                );
            }
            WorkloadAction::Sync { grid } => {
                // no cloud in the baseline; nothing to flush
                if !self.topology.coordinator_of.contains_key(grid) {
                    return Err(ActionError::UnknownGrid(grid.clone()));
                }
            }
            WorkloadAction::CrossQuery { requester, target } => {
                self.node(requester)?;
                self.node(target)?;
                let data = self.local_latest.get(target).cloned();
                if requester != target {
                    self.emit_baseline(
                        item.at,
                        MessageKind::QueryRequest,
                        requester.clone(),
                        target.clone(),
                        framing.header_bits,
                        Payload::Query(CrossGridQuery {
                            requester: requester.clone(),
                            target: target.clone(),
                            issued_at: item.at,
                        }),
                    );
                    let bits = framing.header_bits
                        + framing.reading_bits * data.iter().count() as u64;
                    self.emit_baseline(
                        item.at,
                        MessageKind::QueryReply,
                        target.clone(),
                        requester.clone(),
                        bits,
                        Payload::Data(data.clone()),
                    );
                }
                self.query_answers.push(QueryAnswer {
                    requester: requester.clone(),
                    target: target.clone(),
                    data,
                });
            }
            WorkloadAction::UserAggregate { sensor_type, kind } => {
                // aggregate at a designated sink: the smallest node id of the
                // queried type; every other node of that type with data
                // transmits its latest reading directly to the sink
                let mut members: Vec<NodeId> = self
                    .roster
                    .values()
                    .filter(|n| &n.sensor_type == sensor_type)
                    .map(|n| n.node_id.clone())
                    .collect();
                if members.is_empty() {
                    return Err(ActionError::Cloud(CloudError::UnknownType(
                        sensor_type.clone(),
                    )));
                }
                members.sort();
                let sink = members[0].clone();
                let mut collected: Vec<Reading> = Vec::new();
                for member in &members {
                    if let Some(r) = self.local_latest.get(member).cloned() {
                        if member != &sink {
                            self.emit_baseline(
                                item.at,
                                MessageKind::Report,
                                member.clone(),
                                sink.clone(),
                                self.scenario.framing.reading_bits
                                    + self.scenario.framing.header_bits,
                                Payload::Readings(vec![r.clone()]),
                            );
                        }
                        collected.push(r);
                    }
                }
                self.ledger.charge_compute(&sink, &self.scenario.radio);
                let result = baseline_aggregate(*kind, &collected);
                self.aggregate_answers.push(AggregateAnswer {
                    sensor_type: sensor_type.clone(),
                    kind: *kind,
                    result,
                });
            }
        }
        Ok(())
    }
}

fn baseline_aggregate(kind: AggregateKind, readings: &[Reading]) -> AggregateResult {
    let values = || readings.iter().map(|r| r.value);
    match kind {
        AggregateKind::Count => AggregateResult::Count(readings.len() as u64),
        AggregateKind::Min => AggregateResult::Scalar(values().reduce(f64::min)),
        AggregateKind::Max => AggregateResult::Scalar(values().reduce(f64::max)),
        AggregateKind::Mean => AggregateResult::Scalar(if readings.is_empty() {
            None
        } else {
            Some(values().sum::<f64>() / readings.len() as f64)
        }),
        AggregateKind::Latest => AggregateResult::Latest(
            readings
                .iter()
                .map(|r| (r.node_id.clone(), r.clone()))
                .collect(),
        ),
    }
}

/// Execute one scenario under its configured model.
pub fn run(scenario: &Scenario) -> Result<RunResult, SimError> {
    validate(scenario)?;

    let (mut grids, mut nodes) = compute_grids(&scenario.nodes, scenario.threshold)?;
    let positions: BTreeMap<NodeId, Position> = nodes
        .iter()
        .map(|n| (n.node_id.clone(), n.position))
        .collect();

    let mut centroids = Vec::with_capacity(grids.len());
    let mut topology = Topology::default();
    for grid in &mut grids {
        centroids.push(centroid(grid, &positions)?);
        let coordinator = elect_coordinator(grid, &positions)?;
        grid.coordinator = Some(coordinator.clone());
        topology
            .coordinator_of
            .insert(grid.grid_id.clone(), coordinator.clone());
        for node in nodes.iter_mut() {
            if node.grid_id.as_ref() == Some(&grid.grid_id) {
                node.coordinator = node.node_id == coordinator;
            }
        }
    }

    let mut cloud = Cloud::new();
    for node in &nodes {
        cloud
            .register(RegistrationRecord {
                node_id: node.node_id.clone(),
                sensor_type: node.sensor_type.clone(),
                grid_id: node.grid_id.clone().expect("assigned by partition"),
                coordinator: node.coordinator,
            })
            .map_err(SimError::Registration)?;
    }

    let mut engine = Engine {
        scenario,
        roster: nodes.iter().map(|n| (n.node_id.clone(), n.clone())).collect(),
        topology,
        cloud,
        proto: ProtocolState::new(),
        ledger: EnergyLedger::with_nodes(nodes.iter().map(|n| &n.node_id)),
        trace: Vec::new(),
        query_answers: Vec::new(),
        aggregate_answers: Vec::new(),
        local_latest: BTreeMap::new(),
        next_seq: 0,
    };

    // stable order: (time, position in the workload list)
    let mut order: Vec<usize> = (0..scenario.workload.len()).collect();
    order.sort_by(|&a, &b| {
        scenario.workload[a]
            .at
            .partial_cmp(&scenario.workload[b].at)
            .expect("workload times finite")
    });

    for index in order {
        let item = &scenario.workload[index];
        let outcome = match scenario.model {
            Model::Qcps => engine.run_qcps_item(item),
            Model::Baseline => engine.run_baseline_item(item),
        };
        outcome.map_err(|source| SimError::Workload { index, source })?;
    }

    Ok(RunResult {
        grids,
        centroids,
        nodes,
        ledger: engine.ledger,
        trace: engine.trace,
        query_answers: engine.query_answers,
        aggregate_answers: engine.aggregate_answers,
        databases: engine.cloud.databases().clone(),
    })
}

/// Both models on identical inputs, plus the cost comparison.
#[derive(Clone, Debug, PartialEq)]
pub struct PairResult {
    pub qcps: RunResult,
    pub baseline: RunResult,
    pub comparison: CostComparison,
}

/// Run QCPS and baseline on the same workload and compare ledgers. The
/// scenario's own `model` field is ignored.
pub fn run_pair(scenario: &Scenario) -> Result<PairResult, SimError> {
    let mut qcps_scenario = scenario.clone();
    qcps_scenario.model = Model::Qcps;
    let mut baseline_scenario = scenario.clone();
    baseline_scenario.model = Model::Baseline;
    let qcps = run(&qcps_scenario)?;
    let baseline = run(&baseline_scenario)?;
    let comparison = compare_costs(&qcps.ledger, &baseline.ledger).map_err(|e| match e {
        EnergyError::ScenarioMismatch => {
            SimError::InvalidScenario("run_pair ledgers diverged".into())
        }
    })?;
    Ok(PairResult {
        qcps,
        baseline,
        comparison,
    })
}

/// Append `n` seeded cross-grid queries to the scenario's workload. Targets
/// are drawn from grids other than the requester's whenever such a node
/// exists; requesters are drawn uniformly. Fully determined by the seed.
pub fn append_random_queries(scenario: &mut Scenario, n: usize) -> Result<(), SimError> {
    if n == 0 {
        return Ok(());
    }
    validate(scenario)?;
    let (_, assigned) = compute_grids(&scenario.nodes, scenario.threshold)?;
    if assigned.is_empty() {
        return Err(SimError::InvalidScenario(
            "cannot generate queries for an empty deployment".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(scenario.seed);
    let start = scenario
        .workload
        .iter()
        .map(|w| w.at)
        .fold(0.0f64, f64::max)
        + 1.0;
    for i in 0..n {
        let requester = assigned.choose(&mut rng).expect("non-empty").clone();
        let foreign: Vec<&SensorNode> = assigned
            .iter()
            .filter(|t| t.grid_id != requester.grid_id)
            .collect();
        let target = match foreign.as_slice() {
            [] => &requester, // single-grid deployment: self-query
            list => list.choose(&mut rng).expect("non-empty"),
        };
        scenario.workload.push(WorkloadItem {
            at: start + i as f64,
            action: WorkloadAction::CrossQuery {
                requester: requester.node_id.clone(),
                target: target.node_id.clone(),
            },
        });
    }
    Ok(())
}
