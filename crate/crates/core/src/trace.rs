//! Finite, time-stamped trace prefixes.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::formula::Value;

/// A single event `p(a1, ..., ak)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Event {
    pub name: String,
    pub args: Vec<Value>,
}

impl Event {
    pub fn new(name: &str, args: Vec<Value>) -> Self {
        Event {
            name: name.to_string(),
            args,
        }
    }
}

/// The set of events observed at one time-point.
pub type Database = BTreeSet<Event>;

/// Builds a database from `(name, integer args)` pairs.
pub fn db_from_ints(events: &[(&str, &[i64])]) -> Database {
    events
        .iter()
        .map(|(name, args)| Event::new(name, args.iter().map(|&a| Value::Int(a)).collect()))
        .collect()
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TraceError {
    #[error("time-stamp {got} is smaller than the previous time-stamp {last}")]
    MonotonicityViolation { last: u64, got: u64 },
    #[error("time-point {index} is beyond the prefix of length {len}")]
    OutOfRange { index: usize, len: usize },
}

/// A finite prefix of a trace. Time-stamps are non-decreasing.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TracePrefix {
    entries: Vec<(Database, u64)>,
}

impl TracePrefix {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a prefix from a sequence of entries, checking monotonicity.
    pub fn from_entries(
        entries: impl IntoIterator<Item = (Database, u64)>,
    ) -> Result<Self, TraceError> {
        let mut p = TracePrefix::new();
        for (db, ts) in entries {
            p.append(db, ts)?;
        }
        Ok(p)
    }

    pub fn append(&mut self, db: Database, ts: u64) -> Result<(), TraceError> {
        if let Some(&(_, last)) = self.entries.last() {
            if ts < last {
                return Err(TraceError::MonotonicityViolation { last, got: ts });
            }
        }
        self.entries.push((db, ts));
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn gamma(&self, i: usize) -> Result<&Database, TraceError> {
        self.entries
            .get(i)
            .map(|(db, _)| db)
            .ok_or(TraceError::OutOfRange {
                index: i,
                len: self.len(),
            })
    }

    pub fn tau(&self, i: usize) -> Result<u64, TraceError> {
        self.entries
            .get(i)
            .map(|&(_, ts)| ts)
            .ok_or(TraceError::OutOfRange {
                index: i,
                len: self.len(),
            })
    }

    /// All time-stamps, in order.
    pub fn stamps(&self) -> Vec<u64> {
        self.entries.iter().map(|&(_, ts)| ts).collect()
    }

    pub fn entries(&self) -> &[(Database, u64)] {
        &self.entries
    }

    pub fn active_domain(&self) -> BTreeSet<Value> {
        self.entries
            .iter()
            .flat_map(|(db, _)| db.iter())
            .flat_map(|e| e.args.iter().cloned())
            .collect()
    }
}
