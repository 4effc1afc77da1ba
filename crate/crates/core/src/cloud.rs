//! Simulated cloud: one append-only database per sensor type, a recognize
//! engine that gates sensor-side access on registered coordinator status, and
//! aggregate computation for user central queries.
//!
//! Sensors must come through a verified coordinator; human users query the
//! cloud directly and bypass verification. The cloud's own energy is not
//! tracked, only a count of cloud-side computations.

use crate::model::{GridId, NodeId, Reading, SensorType};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

/// Snapshot of a node's attribute tuple taken at registration time. The
/// recognize engine compares against exactly this.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegistrationRecord {
    pub node_id: NodeId,
    pub sensor_type: SensorType,
    pub grid_id: GridId,
    pub coordinator: bool,
}

/// Append-only store for one sensor type. Rows are ordered by
/// `(sim_time, arrival sequence)`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TypeDatabase {
    pub rows: Vec<StoredReading>,
}

/// A reading plus the global arrival sequence number assigned on store.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StoredReading {
    pub arrival: u64,
    pub reading: Reading,
}

/// Aggregates a user may ask the cloud to compute over one type database.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AggregateKind {
    Latest,
    Count,
    Min,
    Max,
    Mean,
}

impl fmt::Display for AggregateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            AggregateKind::Latest => "latest",
            AggregateKind::Count => "count",
            AggregateKind::Min => "min",
            AggregateKind::Max => "max",
            AggregateKind::Mean => "mean",
        };
        f.write_str(s)
    }
}

/// Result of a user central query.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum AggregateResult {
    /// Latest reading per node, keyed by node id.
    Latest(BTreeMap<NodeId, Reading>),
    Count(u64),
    /// `None` when the database holds no rows.
    Scalar(Option<f64>),
}

#[derive(Debug, Error, PartialEq)]
pub enum CloudError {
    #[error("node {0} already registered with different attributes")]
    ConflictingRegistration(NodeId),
    #[error("access denied for {0}")]
    AccessDenied(NodeId),
    #[error("no registration for originating node {0}")]
    UnknownOrigin(NodeId),
    #[error("no database for sensor type {0}")]
    UnknownType(SensorType),
}

/// Whether the recognize engine lets an accessor touch the databases.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Access {
    Granted,
    Denied,
}

/// The storage and computation unit. One instance per simulation run.
#[derive(Clone, Debug, Default)]
pub struct Cloud {
    registrations: BTreeMap<NodeId, RegistrationRecord>,
    databases: BTreeMap<SensorType, TypeDatabase>,
    next_arrival: u64,
}

impl Cloud {
    pub fn new() -> Self {
        Cloud::default()
    }

    /// Store a node's attribute tuple. Idempotent for identical records;
    /// conflicting re-registration is rejected.
    pub fn register(&mut self, record: RegistrationRecord) -> Result<(), CloudError> {
        if let Some(existing) = self.registrations.get(&record.node_id) {
            if *existing != record {
                return Err(CloudError::ConflictingRegistration(record.node_id));
            }
            return Ok(());
        }
        self.databases
            .entry(record.sensor_type.clone())
            .or_default();
        self.registrations.insert(record.node_id.clone(), record);
        Ok(())
    }

    /// The recognize engine: grants sensor-side access iff the accessor is
    /// registered as a coordinator. Denial is a result, not an error.
    pub fn verify(&self, accessor: &NodeId) -> Access {
        match self.registrations.get(accessor) {
            Some(r) if r.coordinator => Access::Granted,
            _ => Access::Denied,
        }
    }

    pub fn registration(&self, node: &NodeId) -> Option<&RegistrationRecord> {
        self.registrations.get(node)
    }

    /// Append a batch of readings, each to the database of its originating
    /// node's registered type. Returns the number stored.
    pub fn classify_and_store(
        &mut self,
        accessor: &NodeId,
        batch: &[Reading],
    ) -> Result<usize, CloudError> {
        if self.verify(accessor) == Access::Denied {
            return Err(CloudError::AccessDenied(accessor.clone()));
        }
        // validate the whole batch before mutating anything
        for reading in batch {
            if !self.registrations.contains_key(&reading.node_id) {
                return Err(CloudError::UnknownOrigin(reading.node_id.clone()));
            }
        }
        for reading in batch {
            let ty = self.registrations[&reading.node_id].sensor_type.clone();
            let arrival = self.next_arrival;
            self.next_arrival += 1;
            self.databases
                .get_mut(&ty)
                .expect("database created at registration")
                .rows
                .push(StoredReading {
                    arrival,
                    reading: reading.clone(),
                });
        }
        Ok(batch.len())
    }

    /// The target's reading with the greatest `(sim_time, arrival)`, if any.
    pub fn fetch_latest(
        &self,
        accessor: &NodeId,
        target: &NodeId,
    ) -> Result<Option<Reading>, CloudError> {
        if self.verify(accessor) == Access::Denied {
            return Err(CloudError::AccessDenied(accessor.clone()));
        }
        let record = self
            .registrations
            .get(target)
            .ok_or_else(|| CloudError::UnknownOrigin(target.clone()))?;
        Ok(self.latest_of(&record.sensor_type, target))
    }

    fn latest_of(&self, ty: &SensorType, node: &NodeId) -> Option<Reading> {
        let db = self.databases.get(ty)?;
        db.rows
            .iter()
            .filter(|r| &r.reading.node_id == node)
            .max_by(|a, b| {
                (a.reading.sim_time, a.arrival)
                    .partial_cmp(&(b.reading.sim_time, b.arrival))
                    .expect("sim_time finite")
            })
            .map(|r| r.reading.clone())
    }

    /// User central query, computed cloud-side; no verification for users.
    pub fn user_query(
        &self,
        sensor_type: &SensorType,
        kind: AggregateKind,
    ) -> Result<AggregateResult, CloudError> {
        let db = self
            .databases
            .get(sensor_type)
            .ok_or_else(|| CloudError::UnknownType(sensor_type.clone()))?;
        let values = || db.rows.iter().map(|r| r.reading.value);
        let result = match kind {
            AggregateKind::Count => AggregateResult::Count(db.rows.len() as u64),
            AggregateKind::Min => {
                AggregateResult::Scalar(values().reduce(f64::min))
            }
            AggregateKind::Max => {
                AggregateResult::Scalar(values().reduce(f64::max))
            }
            AggregateKind::Mean => {
                let n = db.rows.len();
                AggregateResult::Scalar(if n == 0 {
                    None
                } else {
                    Some(values().sum::<f64>() / n as f64)
                })
            }
            AggregateKind::Latest => {
                let mut latest = BTreeMap::new();
                for row in &db.rows {
                    let node = row.reading.node_id.clone();
                    if let Some(r) = self.latest_of(sensor_type, &node) {
                        latest.insert(node, r);
                    }
                }
                AggregateResult::Latest(latest)
            }
        };
        Ok(result)
    }

    /// Databases keyed by type, in type order. Used for dumps and
    /// invariant checks.
    pub fn databases(&self) -> &BTreeMap<SensorType, TypeDatabase> {
        &self.databases
    }
}
