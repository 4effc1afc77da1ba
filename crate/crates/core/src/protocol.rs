//! Coordinator-mediated message flow: member-to-coordinator reporting,
//! coordinator-to-cloud sync, and the four-hop cross-grid query.
//!
//! All inter-grid data moves through the cloud; a non-coordinator sensor only
//! ever transmits to its own grid's coordinator. A query resolves as
//! requester -> coordinator -> cloud -> coordinator -> requester, with the
//! first and last hops elided when the requester is itself the coordinator.

use crate::cloud::Cloud;
use crate::model::{GridId, NodeId, Reading, SensorNode};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

/// Message endpoint: a sensor or the cloud gateway.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Principal {
    Node(NodeId),
    Cloud,
}

impl fmt::Display for Principal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Principal::Node(id) => f.write_str(id.as_str()),
            Principal::Cloud => f.write_str("cloud"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MessageKind {
    Report,
    Sync,
    QueryRequest,
    CloudFetch,
    CloudReply,
    QueryReply,
}

impl fmt::Display for MessageKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            MessageKind::Report => "report",
            MessageKind::Sync => "sync",
            MessageKind::QueryRequest => "query_request",
            MessageKind::CloudFetch => "cloud_fetch",
            MessageKind::CloudReply => "cloud_reply",
            MessageKind::QueryReply => "query_reply",
        };
        f.write_str(s)
    }
}

/// What a message carries, for oracle checks; the radio model only sees
/// `payload_bits`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Payload {
    Readings(Vec<Reading>),
    Query(CrossGridQuery),
    /// Fetched data, absent when the target never reported.
    Data(Option<Reading>),
    Control,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Message {
    pub seq: u64,
    pub time: f64,
    pub kind: MessageKind,
    pub src: Principal,
    pub dst: Principal,
    pub payload_bits: u64,
    pub payload: Payload,
}

impl Message {
    /// One line of the exportable trace: `seq time kind src dst bits`.
    pub fn trace_line(&self) -> String {
        format!(
            "{} {:.3} {} {} {} {}",
            self.seq, self.time, self.kind, self.src, self.dst, self.payload_bits
        )
    }
}

/// One sensor asking for another sensor's data, possibly across grids.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossGridQuery {
    pub requester: NodeId,
    pub target: NodeId,
    pub issued_at: f64,
}

/// Message sizing constants, configurable per scenario.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Framing {
    pub header_bits: u64,
    pub reading_bits: u64,
}

impl Framing {
    fn batch_bits(&self, count: usize) -> u64 {
        self.header_bits + self.reading_bits * count as u64
    }

    fn data_bits(&self, data: &Option<Reading>) -> u64 {
        self.batch_bits(data.iter().count())
    }
}

/// Grid-to-coordinator map produced by election; the routing table for every
/// protocol operation.
#[derive(Clone, Debug, Default)]
pub struct Topology {
    pub coordinator_of: BTreeMap<GridId, NodeId>,
}

#[derive(Debug, Error, PartialEq)]
pub enum ProtocolError {
    #[error("node {0} has no coordinator (election has not run)")]
    NoCoordinator(NodeId),
    #[error("node {0} is not a coordinator")]
    NotCoordinator(NodeId),
    #[error(transparent)]
    Cloud(#[from] crate::cloud::CloudError),
}

/// Trace and outcome of one resolved query.
#[derive(Clone, Debug, PartialEq)]
pub struct QueryResolution {
    pub messages: Vec<Message>,
    pub data: Option<Reading>,
}

/// Mutable protocol state: per-coordinator reading buffers and the global
/// message sequence counter.
#[derive(Clone, Debug, Default)]
pub struct ProtocolState {
    next_seq: u64,
    buffers: BTreeMap<NodeId, Vec<Reading>>,
}

impl ProtocolState {
    pub fn new() -> Self {
        ProtocolState::default()
    }

    pub fn buffered(&self, coordinator: &NodeId) -> usize {
        self.buffers.get(coordinator).map_or(0, Vec::len)
    }

    fn emit(
        &mut self,
        time: f64,
        kind: MessageKind,
        src: Principal,
        dst: Principal,
        payload_bits: u64,
        payload: Payload,
    ) -> Message {
        let seq = self.next_seq;
        self.next_seq += 1;
        Message {
            seq,
            time,
            kind,
            src,
            dst,
            payload_bits,
            payload,
        }
    }

    fn coordinator_for<'t>(
        &self,
        member: &SensorNode,
        topology: &'t Topology,
    ) -> Result<&'t NodeId, ProtocolError> {
        member
            .grid_id
            .as_ref()
            .and_then(|g| topology.coordinator_of.get(g))
            .ok_or_else(|| ProtocolError::NoCoordinator(member.node_id.clone()))
    }

    /// Deliver one reading to the member's own coordinator. A coordinator
    /// reporting its own reading buffers it locally with no radio message.
    pub fn report_reading(
        &mut self,
        member: &SensorNode,
        reading: Reading,
        topology: &Topology,
        framing: Framing,
        time: f64,
    ) -> Result<Option<Message>, ProtocolError> {
        let coordinator = self.coordinator_for(member, topology)?.clone();
        let buffer = self.buffers.entry(coordinator.clone()).or_default();
        if coordinator == member.node_id {
            buffer.push(reading);
            return Ok(None);
        }
        buffer.push(reading.clone());
        Ok(Some(self.emit(
            time,
            MessageKind::Report,
            Principal::Node(member.node_id.clone()),
            Principal::Node(coordinator),
            framing.batch_bits(1),
            Payload::Readings(vec![reading]),
        )))
    }

    /// Flush a coordinator's buffer to the cloud in one batch message.
    /// An empty buffer emits nothing.
    pub fn sync_to_cloud(
        &mut self,
        coordinator: &SensorNode,
        cloud: &mut Cloud,
        framing: Framing,
        time: f64,
    ) -> Result<Option<(Message, usize)>, ProtocolError> {
        if !coordinator.coordinator {
            return Err(ProtocolError::NotCoordinator(coordinator.node_id.clone()));
        }
        let batch = match self.buffers.get_mut(&coordinator.node_id) {
            Some(b) if !b.is_empty() => std::mem::take(b),
            _ => return Ok(None),
        };
        let stored = cloud.classify_and_store(&coordinator.node_id, &batch)?;
        let msg = self.emit(
            time,
            MessageKind::Sync,
            Principal::Node(coordinator.node_id.clone()),
            Principal::Cloud,
            framing.batch_bits(batch.len()),
            Payload::Readings(batch),
        );
        Ok(Some((msg, stored)))
    }

    /// Run one query through the coordinator and cloud. Only readings already
    /// synced to the cloud are visible; buffered readings are not.
    pub fn resolve_query(
        &mut self,
        query: &CrossGridQuery,
        requester: &SensorNode,
        cloud: &Cloud,
        topology: &Topology,
        framing: Framing,
    ) -> Result<QueryResolution, ProtocolError> {
        let coordinator = self.coordinator_for(requester, topology)?.clone();
        let time = query.issued_at;
        let elide = coordinator == requester.node_id;
        let mut messages = Vec::with_capacity(4);

        if !elide {
            messages.push(self.emit(
                time,
                MessageKind::QueryRequest,
                Principal::Node(requester.node_id.clone()),
                Principal::Node(coordinator.clone()),
                framing.header_bits,
                Payload::Query(query.clone()),
            ));
        }
        messages.push(self.emit(
            time,
            MessageKind::CloudFetch,
            Principal::Node(coordinator.clone()),
            Principal::Cloud,
            framing.header_bits,
            Payload::Query(query.clone()),
        ));
        let data = cloud.fetch_latest(&coordinator, &query.target)?;
        messages.push(self.emit(
            time,
            MessageKind::CloudReply,
            Principal::Cloud,
            Principal::Node(coordinator.clone()),
            framing.data_bits(&data),
            Payload::Data(data.clone()),
        ));
        if !elide {
            messages.push(self.emit(
                time,
                MessageKind::QueryReply,
                Principal::Node(coordinator),
                Principal::Node(requester.node_id.clone()),
                framing.data_bits(&data),
                Payload::Data(data.clone()),
            ));
        }
        Ok(QueryResolution { messages, data })
    }
}
