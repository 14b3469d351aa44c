//! Polls, sessions and their wire shapes.

use std::collections::BTreeMap;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use peakpoll_core::elicit::ElicitReport;
use peakpoll_core::text::Alternatives;
use peakpoll_core::{AlternativeId, CardinalLayout, OrdinalAxis, Ranking};

use crate::engine::Plan;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PollMode {
    OrdinalKnown,
    CardinalKnown,
    UnknownPositions,
}

/// `POST /polls` body.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CreatePoll {
    pub name: String,
    pub alternatives: Vec<String>,
    pub mode: PollMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub axis: Option<Vec<String>>,
    /// Alternative name → decimal string.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub positions: Option<BTreeMap<String, String>>,
    #[serde(default)]
    pub robust: bool,
}

/// A validated poll as written to `polls.jsonl`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PollRecord {
    pub poll_id: String,
    pub name: String,
    pub alternatives: Vec<String>,
    pub mode: PollMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub axis: Option<OrdinalAxis>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub layout: Option<CardinalLayout>,
    pub robust: bool,
    pub created_at: DateTime<Utc>,
}

impl PollRecord {
    pub fn names(&self) -> Alternatives {
        Alternatives::new(self.alternatives.iter().cloned()).expect("validated at creation")
    }

    /// The axis the poll's votes should be single-peaked on, if known.
    pub fn known_axis(&self) -> Option<OrdinalAxis> {
        match (&self.axis, &self.layout) {
            (Some(axis), _) => Some(axis.clone()),
            (None, Some(layout)) => Some(layout.induced_axis()),
            _ => None,
        }
    }
}

/// A poll with the state derived from its completed sessions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Poll {
    pub record: PollRecord,
    pub known_vote: Option<Ranking>,
    pub consecutive_fallbacks: usize,
    pub last_verified: Option<Ranking>,
    /// Completed sessions in completion order.
    pub completed: Vec<String>,
}

impl Poll {
    pub fn new(record: PollRecord) -> Self {
        Poll {
            record,
            known_vote: None,
            consecutive_fallbacks: 0,
            last_verified: None,
            completed: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SessionState {
    AwaitingAnswer,
    Completed,
    Expired,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Session {
    pub session_id: String,
    pub poll_id: String,
    pub plan: Plan,
    pub answers: Vec<bool>,
    pub state: SessionState,
    pub pending: Option<(AlternativeId, AlternativeId)>,
    pub report: Option<ElicitReport>,
    pub failure: Option<String>,
    pub last_activity: DateTime<Utc>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Choice {
    Left,
    Right,
}

/// `POST /sessions/{id}/answer` body. `asked`, when present, must equal the
/// number of answers already given; a stale resubmission is then rejected
/// instead of being applied to the next question.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnswerRequest {
    pub prefer: Choice,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub asked: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryView {
    pub left: String,
    pub right: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Progress {
    pub asked: usize,
    pub bound: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportView {
    pub ranking: Vec<String>,
    pub queries_used: usize,
    pub verified: bool,
    pub fell_back: bool,
}

impl ReportView {
    pub fn new(names: &Alternatives, report: &ElicitReport) -> Self {
        ReportView {
            ranking: names.ranking_names(&report.ranking),
            queries_used: report.queries_used,
            verified: report.verified,
            fell_back: report.fell_back,
        }
    }
}

/// Response of session creation, `next` and `answer`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionView {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub session_id: Option<String>,
    pub done: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub query: Option<QueryView>,
    pub progress: Progress,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub result: Option<ReportView>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AggregateStatus {
    Complete,
    Partial,
    Cyclic,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AggregateView {
    pub status: AggregateStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ranking: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub winner: Option<String>,
    pub margins: Vec<Vec<i64>>,
    pub respondents: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PollCreated {
    pub poll_id: String,
}

/// One line of the session event log.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Event {
    pub seq: u64,
    pub ts: DateTime<Utc>,
    pub session: String,
    #[serde(flatten)]
    pub kind: EventKind,
}

/// `created` and `answer` drive state; the other kinds are an audit trail
/// of what the service said and are recomputed on replay.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum EventKind {
    Created { poll: String, plan: Plan },
    Query { left: AlternativeId, right: AlternativeId },
    Answer { left: AlternativeId, right: AlternativeId, prefer: Choice },
    Completed { report: ElicitReport },
    Failed { reason: String },
    Expired,
}
