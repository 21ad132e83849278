//! Query access to an environment, with bookkeeping the experiments rely on:
//! every lookup is counted and transcribed, non-adaptive testers must declare
//! their whole query set before seeing any value, and the oracle tracks
//! whether values were revealed in non-decreasing step order
//! (time-conforming access).

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::env::Environment;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("vertex {0} out of range (n = {1})")]
    VertexOutOfRange(u32, usize),
    #[error("step {0} out of range (T = {1})")]
    StepOutOfRange(u32, u32),
    #[error("query ({0}, {1}) was not registered up front")]
    UnregisteredQuery(u32, u32),
    #[error("non-adaptive oracle: registration after the first query")]
    RegisterAfterQuery,
    #[error("query at step {t} after a step-{max_seen} query breaks time-conforming order")]
    TimeConformityBreach { t: u32, max_seen: u32 },
}

/// Whether the tester must commit to its queries before seeing any answer.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum OracleMode {
    NonAdaptive,
    Adaptive,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OraclePolicy {
    pub mode: OracleMode,
    /// When set, a backwards-in-time query is an error instead of just
    /// clearing the time-conforming flag.
    pub enforce_time_conforming: bool,
}

impl OraclePolicy {
    pub fn non_adaptive() -> Self {
        OraclePolicy {
            mode: OracleMode::NonAdaptive,
            enforce_time_conforming: false,
        }
    }

    pub fn adaptive() -> Self {
        OraclePolicy {
            mode: OracleMode::Adaptive,
            enforce_time_conforming: false,
        }
    }

    pub fn enforcing(mut self) -> Self {
        self.enforce_time_conforming = true;
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryRecord {
    pub v: u32,
    pub t: u32,
    pub value: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranscriptSummary {
    pub queries: u64,
    pub distinct_cells: u64,
    pub time_conforming: bool,
}

/// Full record of one tester run against the oracle.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transcript {
    pub entries: Vec<QueryRecord>,
    pub summary: TranscriptSummary,
}

impl Transcript {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("transcript serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

/// Counted, transcribed access to the colors of one environment.
#[derive(Debug)]
pub struct QueryOracle<'a> {
    env: &'a Environment,
    policy: OraclePolicy,
    registered: BTreeSet<(u32, u32)>,
    seen_cells: BTreeSet<(u32, u32)>,
    entries: Vec<QueryRecord>,
    max_step_seen: u32,
    time_conforming: bool,
}

impl<'a> QueryOracle<'a> {
    pub fn new(env: &'a Environment, policy: OraclePolicy) -> Self {
        QueryOracle {
            env,
            policy,
            registered: BTreeSet::new(),
            seen_cells: BTreeSet::new(),
            entries: Vec::new(),
            max_step_seen: 0,
            time_conforming: true,
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.env.graph().vertex_count()
    }

    pub fn horizon(&self) -> u32 {
        self.env.horizon()
    }

    fn check_range(&self, v: u32, t: u32) -> Result<(), OracleError> {
        let n = self.vertex_count();
        if v as usize >= n {
            return Err(OracleError::VertexOutOfRange(v, n));
        }
        if t < 1 || t > self.horizon() {
            return Err(OracleError::StepOutOfRange(t, self.horizon()));
        }
        Ok(())
    }

    /// Declares queries a non-adaptive tester will make. Must happen before
    /// the first `query`; several batches are fine. No-op when adaptive.
    pub fn register(&mut self, queries: impl IntoIterator<Item = (u32, u32)>) -> Result<(), OracleError> {
        if self.policy.mode == OracleMode::Adaptive {
            return Ok(());
        }
        if !self.entries.is_empty() {
            return Err(OracleError::RegisterAfterQuery);
        }
        for (v, t) in queries {
            self.check_range(v, t)?;
            self.registered.insert((v, t));
        }
        Ok(())
    }

    /// Reveals the color at (v, t), counting the call and appending it to the
    /// transcript. Repeated cells count every time.
    pub fn query(&mut self, v: u32, t: u32) -> Result<bool, OracleError> {
        self.check_range(v, t)?;
        if self.policy.mode == OracleMode::NonAdaptive && !self.registered.contains(&(v, t)) {
            return Err(OracleError::UnregisteredQuery(v, t));
        }
        if t < self.max_step_seen {
            if self.policy.enforce_time_conforming {
                return Err(OracleError::TimeConformityBreach {
                    t,
                    max_seen: self.max_step_seen,
                });
            }
            self.time_conforming = false;
        }
        self.max_step_seen = self.max_step_seen.max(t);
        let value = self.env.get(v, t);
        self.seen_cells.insert((v, t));
        self.entries.push(QueryRecord { v, t, value });
        Ok(value)
    }

    pub fn queries_used(&self) -> u64 {
        self.entries.len() as u64
    }

    pub fn distinct_cells(&self) -> u64 {
        self.seen_cells.len() as u64
    }

    /// True while every value so far was revealed in non-decreasing step order.
    pub fn time_conforming(&self) -> bool {
        self.time_conforming
    }

    pub fn transcript(&self) -> Transcript {
        Transcript {
            entries: self.entries.clone(),
            summary: TranscriptSummary {
                queries: self.queries_used(),
                distinct_cells: self.distinct_cells(),
                time_conforming: self.time_conforming,
            },
        }
    }
}
