//! Polls and sessions over a write-ahead event log.
//!
//! Every mutation is first written as events, then applied to memory through
//! [`State::apply`], the same function used on restart. A session's pending
//! query is always recomputed from its plan and answers, so replaying the log
//! rebuilds it exactly.

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;
use std::sync::{Arc, Mutex, MutexGuard};

use chrono::{DateTime, TimeDelta, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use peakpoll_core::elicit::{ElicitReport, ElicitationContext};
use peakpoll_core::single_peaked::is_single_peaked;
use peakpoll_core::spverify::{aggregate_ranking, median_peak_winner, pairwise_matrix, SpverifyError};
use peakpoll_core::text::Alternatives;
use peakpoll_core::types::parse_rational;
use peakpoll_core::{CardinalLayout, CoreError, OrdinalAxis, Profile};

use crate::engine::{advance, Plan, Step};
use crate::model::{
    AggregateStatus, AggregateView, AnswerRequest, Choice, CreatePoll, Event, EventKind, Poll, PollMode, PollRecord,
    Progress, QueryView, ReportView, Session, SessionState, SessionView,
};
use crate::store::{Store, StoreError, StoreOptions};

/// Consecutive fallbacks after which a robust poll replaces its known vote.
pub const FALLBACK_SWITCH_THRESHOLD: usize = 3;

pub trait Clock: Send + Sync {
    fn now(&self) -> DateTime<Utc>;
}

#[derive(Debug, Default, Clone, Copy)]
pub struct SystemClock;

impl Clock for SystemClock {
    fn now(&self) -> DateTime<Utc> {
        Utc::now()
    }
}

/// A clock moved by hand, for tests.
#[derive(Debug)]
pub struct ManualClock(Mutex<DateTime<Utc>>);

impl ManualClock {
    pub fn new(start: DateTime<Utc>) -> Self {
        ManualClock(Mutex::new(start))
    }

    pub fn advance(&self, by: TimeDelta) {
        let mut now = self.0.lock().unwrap_or_else(|e| e.into_inner());
        *now += by;
    }
}

impl Clock for ManualClock {
    fn now(&self) -> DateTime<Utc> {
        *self.0.lock().unwrap_or_else(|e| e.into_inner())
    }
}

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    /// `None` keeps everything in memory.
    pub data_dir: Option<PathBuf>,
    pub session_timeout: TimeDelta,
    /// Events between snapshots.
    pub snapshot_every: usize,
    pub sync: bool,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            data_dir: None,
            session_timeout: TimeDelta::minutes(30),
            snapshot_every: 1000,
            sync: true,
        }
    }
}

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error("unknown poll {0}")]
    UnknownPoll(String),
    #[error("unknown session {0}")]
    UnknownSession(String),
    #[error("{field}: {message}")]
    Validation { field: &'static str, message: String },
    #[error("session is {0:?}, not awaiting an answer")]
    WrongState(SessionState),
    #[error("answer refers to question {got} but {expected} answers were already recorded")]
    StaleAnswer { expected: usize, got: usize },
    #[error("session expired")]
    Expired,
    #[error("session failed: {0}")]
    Failed(String),
    #[error("session has not completed")]
    NotCompleted,
    #[error("poll has no completed sessions")]
    NoCompletedSessions,
    #[error(transparent)]
    Storage(#[from] StoreError),
    #[error("replaying the log failed: {0}")]
    Replay(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl ServiceError {
    pub fn code(&self) -> &'static str {
        match self {
            ServiceError::UnknownPoll(_) => "unknown_poll",
            ServiceError::UnknownSession(_) => "unknown_session",
            ServiceError::Validation { .. } => "validation",
            ServiceError::WrongState(_) => "wrong_state",
            ServiceError::StaleAnswer { .. } => "stale_answer",
            ServiceError::Expired => "expired",
            ServiceError::Failed(_) => "failed",
            ServiceError::NotCompleted => "not_completed",
            ServiceError::NoCompletedSessions => "no_completed_sessions",
            ServiceError::Storage(_) => "storage",
            ServiceError::Replay(_) => "replay",
            ServiceError::Internal(_) => "internal",
        }
    }
}

fn invalid(field: &'static str, message: impl Into<String>) -> ServiceError {
    ServiceError::Validation {
        field,
        message: message.into(),
    }
}

/// Everything the service knows; also the snapshot format.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct State {
    pub polls: BTreeMap<String, Poll>,
    pub sessions: BTreeMap<String, Session>,
}

impl State {
    pub fn apply(&mut self, event: &Event) -> Result<(), String> {
        let id = &event.session;
        match &event.kind {
            EventKind::Created { poll, plan } => {
                if !self.polls.contains_key(poll) {
                    return Err(format!("session {id} refers to unknown poll {poll}"));
                }
                if self.sessions.contains_key(id) {
                    return Err(format!("session {id} created twice"));
                }
                self.sessions.insert(
                    id.clone(),
                    Session {
                        session_id: id.clone(),
                        poll_id: poll.clone(),
                        plan: plan.clone(),
                        answers: Vec::new(),
                        state: SessionState::AwaitingAnswer,
                        pending: None,
                        report: None,
                        failure: None,
                        last_activity: event.ts,
                    },
                );
                self.refresh(id);
            }
            EventKind::Answer { left, right, prefer } => {
                let session = self.sessions.get_mut(id).ok_or_else(|| format!("unknown session {id}"))?;
                if session.state != SessionState::AwaitingAnswer || session.pending != Some((*left, *right)) {
                    return Err(format!("answer to {left} vs {right} does not match session {id}"));
                }
                session.answers.push(*prefer == Choice::Left);
                session.last_activity = event.ts;
                self.refresh(id);
            }
            EventKind::Expired => {
                let session = self.sessions.get_mut(id).ok_or_else(|| format!("unknown session {id}"))?;
                session.state = SessionState::Expired;
                session.pending = None;
            }
            EventKind::Query { .. } | EventKind::Completed { .. } | EventKind::Failed { .. } => {}
        }
        Ok(())
    }

    fn refresh(&mut self, id: &str) {
        let session = self.sessions.get_mut(id).expect("present");
        match advance(&session.plan, &session.answers) {
            Step::Ask { left, right } => session.pending = Some((left, right)),
            Step::Done(report) => {
                session.state = SessionState::Completed;
                session.pending = None;
                session.report = Some(report.clone());
                let poll_id = session.poll_id.clone();
                self.on_complete(&poll_id, id, &report);
            }
            Step::Failed(reason) => {
                session.state = SessionState::Failed;
                session.pending = None;
                session.failure = Some(reason);
            }
        }
    }

    /// The known-vote policy. The first completed session fixes the known
    /// vote; a robust poll replaces it with the most recently verified
    /// ranking after [`FALLBACK_SWITCH_THRESHOLD`] fallbacks in a row.
    fn on_complete(&mut self, poll_id: &str, session_id: &str, report: &ElicitReport) {
        let poll = self.polls.get_mut(poll_id).expect("checked at creation");
        poll.completed.push(session_id.to_string());
        if poll.record.mode != PollMode::UnknownPositions {
            return;
        }
        if poll.known_vote.is_none() {
            poll.known_vote = Some(report.ranking.clone());
        }
        if !poll.record.robust {
            return;
        }
        if report.verified {
            poll.last_verified = Some(report.ranking.clone());
            poll.consecutive_fallbacks = 0;
        } else if report.fell_back {
            poll.consecutive_fallbacks += 1;
            if poll.consecutive_fallbacks >= FALLBACK_SWITCH_THRESHOLD {
                if let Some(v) = &poll.last_verified {
                    poll.known_vote = Some(v.clone());
                    poll.consecutive_fallbacks = 0;
                }
            }
        }
    }
}

struct Inner {
    state: State,
    store: Option<Store>,
    next_seq: u64,
    since_snapshot: usize,
}

pub struct PollService {
    inner: Mutex<Inner>,
    clock: Arc<dyn Clock>,
    config: ServiceConfig,
}

impl std::fmt::Debug for PollService {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PollService").field("config", &self.config).finish_non_exhaustive()
    }
}

fn step_event(step: &Step) -> EventKind {
    match step {
        Step::Ask { left, right } => EventKind::Query {
            left: *left,
            right: *right,
        },
        Step::Done(report) => EventKind::Completed { report: report.clone() },
        Step::Failed(reason) => EventKind::Failed { reason: reason.clone() },
    }
}

fn validate_alternatives(names: &[String]) -> Result<Alternatives, ServiceError> {
    if names.is_empty() {
        return Err(invalid("alternatives", "at least one alternative is required"));
    }
    if names.iter().any(|n| n.trim().is_empty()) {
        return Err(invalid("alternatives", "names must not be blank"));
    }
    Alternatives::new(names.iter().cloned()).map_err(|e| invalid("alternatives", e.to_string()))
}

impl PollService {
    pub fn open(config: ServiceConfig, clock: Arc<dyn Clock>) -> Result<Self, ServiceError> {
        let (state, store, next_seq) = match &config.data_dir {
            None => (State::default(), None, 1),
            Some(dir) => {
                let (store, loaded) = Store::open::<State>(dir, StoreOptions { sync: config.sync })?;
                let mut state = loaded.snapshot.map(|(_, s)| s).unwrap_or_default();
                for record in loaded.polls {
                    state
                        .polls
                        .entry(record.poll_id.clone())
                        .or_insert_with(|| Poll::new(record));
                }
                for event in &loaded.events {
                    state.apply(event).map_err(ServiceError::Replay)?;
                }
                let next = store.next_seq();
                (state, Some(store), next)
            }
        };
        Ok(PollService {
            inner: Mutex::new(Inner {
                state,
                store,
                next_seq,
                since_snapshot: 0,
            }),
            clock,
            config,
        })
    }

    pub fn in_memory() -> Self {
        Self::open(ServiceConfig::default(), Arc::new(SystemClock)).expect("no storage to fail")
    }

    fn lock(&self) -> MutexGuard<'_, Inner> {
        self.inner.lock().unwrap_or_else(|e| e.into_inner())
    }

    /// A copy of the current state.
    pub fn state(&self) -> State {
        self.lock().state.clone()
    }

    fn commit(&self, inner: &mut Inner, kinds: Vec<(String, EventKind)>) -> Result<(), ServiceError> {
        let ts = self.clock.now();
        let events: Vec<Event> = kinds
            .into_iter()
            .enumerate()
            .map(|(k, (session, kind))| Event {
                seq: inner.next_seq + k as u64,
                ts,
                session,
                kind,
            })
            .collect();
        if let Some(store) = inner.store.as_mut() {
            store.append_events(&events)?;
        }
        inner.next_seq += events.len() as u64;
        for event in &events {
            inner.state.apply(event).map_err(ServiceError::Internal)?;
        }
        inner.since_snapshot += events.len();
        if inner.since_snapshot >= self.config.snapshot_every {
            if let Some(store) = inner.store.as_mut() {
                store.write_snapshot(inner.next_seq - 1, &inner.state)?;
            }
            inner.since_snapshot = 0;
        }
        Ok(())
    }

    pub fn create_poll(&self, request: CreatePoll) -> Result<String, ServiceError> {
        let names = validate_alternatives(&request.alternatives)?;
        if request.name.trim().is_empty() {
            return Err(invalid("name", "must not be blank"));
        }
        let (axis, layout) = match request.mode {
            PollMode::OrdinalKnown => {
                if request.positions.is_some() {
                    return Err(invalid("positions", "not used in ordinal-known mode"));
                }
                let order = request
                    .axis
                    .as_ref()
                    .ok_or_else(|| invalid("axis", "required in ordinal-known mode"))?;
                let ids = names.parse_names(order).map_err(|e| invalid("axis", e.to_string()))?;
                if ids.len() != names.len() {
                    return Err(invalid("axis", "must list every alternative once"));
                }
                let axis = OrdinalAxis::new(ids).map_err(|e| invalid("axis", e.to_string()))?;
                (Some(axis), None)
            }
            PollMode::CardinalKnown => {
                if request.axis.is_some() {
                    return Err(invalid("axis", "not used in cardinal-known mode"));
                }
                let positions = request
                    .positions
                    .as_ref()
                    .ok_or_else(|| invalid("positions", "required in cardinal-known mode"))?;
                let given: BTreeSet<&str> = positions.keys().map(String::as_str).collect();
                let expected: BTreeSet<&str> = names.names().iter().map(String::as_str).collect();
                if given != expected {
                    return Err(invalid("positions", "must give a position for exactly the alternatives"));
                }
                let values = names
                    .names()
                    .iter()
                    .map(|n| parse_rational(&positions[n]).map_err(|e| invalid("positions", format!("{n}: {e}"))))
                    .collect::<Result<Vec<_>, _>>()?;
                let layout = CardinalLayout::new(values).map_err(|e| match e {
                    CoreError::DuplicatePosition(a, b) => invalid(
                        "positions",
                        format!("{} and {} share a position", names.names()[a], names.names()[b]),
                    ),
                    other => invalid("positions", other.to_string()),
                })?;
                (None, Some(layout))
            }
            PollMode::UnknownPositions => {
                if request.axis.is_some() {
                    return Err(invalid("axis", "not used in unknown-positions mode"));
                }
                if request.positions.is_some() {
                    return Err(invalid("positions", "not used in unknown-positions mode"));
                }
                (None, None)
            }
        };
        let record = PollRecord {
            poll_id: uuid::Uuid::new_v4().to_string(),
            name: request.name,
            alternatives: request.alternatives,
            mode: request.mode,
            axis,
            layout,
            robust: request.robust,
            created_at: self.clock.now(),
        };
        let mut inner = self.lock();
        if let Some(store) = inner.store.as_mut() {
            store.append_poll(&record)?;
        }
        let id = record.poll_id.clone();
        inner.state.polls.insert(id.clone(), Poll::new(record));
        Ok(id)
    }

    pub fn poll(&self, poll_id: &str) -> Result<Poll, ServiceError> {
        self.lock()
            .state
            .polls
            .get(poll_id)
            .cloned()
            .ok_or_else(|| ServiceError::UnknownPoll(poll_id.to_string()))
    }

    /// The plan a new session of `poll` would run.
    fn plan_for(poll: &Poll) -> Plan {
        let record = &poll.record;
        let context = match record.mode {
            PollMode::OrdinalKnown => ElicitationContext::KnownAxis(record.axis.clone().expect("validated")),
            PollMode::CardinalKnown => ElicitationContext::KnownCardinal(record.layout.clone().expect("validated")),
            PollMode::UnknownPositions => match &poll.known_vote {
                Some(vote) => ElicitationContext::KnownVote(vote.clone()),
                None => ElicitationContext::None,
            },
        };
        Plan {
            m: record.alternatives.len(),
            context,
            robust: record.robust,
        }
    }

    pub fn open_session(&self, poll_id: &str) -> Result<SessionView, ServiceError> {
        let mut inner = self.lock();
        let poll = inner
            .state
            .polls
            .get(poll_id)
            .ok_or_else(|| ServiceError::UnknownPoll(poll_id.to_string()))?;
        let plan = Self::plan_for(poll);
        let step = advance(&plan, &[]);
        let id = uuid::Uuid::new_v4().to_string();
        let events = vec![
            (
                id.clone(),
                EventKind::Created {
                    poll: poll_id.to_string(),
                    plan,
                },
            ),
            (id.clone(), step_event(&step)),
        ];
        self.commit(&mut inner, events)?;
        let mut view = Self::view(&inner.state, &id)?;
        view.session_id = Some(id);
        Ok(view)
    }

    fn view(state: &State, id: &str) -> Result<SessionView, ServiceError> {
        let session = state
            .sessions
            .get(id)
            .ok_or_else(|| ServiceError::UnknownSession(id.to_string()))?;
        let names = state.polls[&session.poll_id].record.names();
        let progress = Progress {
            asked: session.answers.len(),
            bound: session.plan.bound(),
        };
        match session.state {
            SessionState::Expired => Err(ServiceError::Expired),
            SessionState::Failed => Err(ServiceError::Failed(session.failure.clone().unwrap_or_default())),
            SessionState::Completed => Ok(SessionView {
                session_id: None,
                done: true,
                query: None,
                progress,
                result: session.report.as_ref().map(|r| ReportView::new(&names, r)),
            }),
            SessionState::AwaitingAnswer => {
                let (left, right) = session.pending.expect("awaiting sessions have a query");
                Ok(SessionView {
                    session_id: None,
                    done: false,
                    query: Some(QueryView {
                        left: names.name(left).to_string(),
                        right: names.name(right).to_string(),
                    }),
                    progress,
                    result: None,
                })
            }
        }
    }

    fn expire_if_idle(&self, inner: &mut Inner, id: &str) -> Result<(), ServiceError> {
        let session = inner
            .state
            .sessions
            .get(id)
            .ok_or_else(|| ServiceError::UnknownSession(id.to_string()))?;
        if session.state == SessionState::AwaitingAnswer
            && self.clock.now() - session.last_activity > self.config.session_timeout
        {
            self.commit(inner, vec![(id.to_string(), EventKind::Expired)])?;
        }
        Ok(())
    }

    /// Expires every idle session; returns how many.
    pub fn expire_idle(&self) -> Result<usize, ServiceError> {
        let mut inner = self.lock();
        let now = self.clock.now();
        let idle: Vec<String> = inner
            .state
            .sessions
            .values()
            .filter(|s| s.state == SessionState::AwaitingAnswer && now - s.last_activity > self.config.session_timeout)
            .map(|s| s.session_id.clone())
            .collect();
        if !idle.is_empty() {
            let events = idle.iter().map(|id| (id.clone(), EventKind::Expired)).collect();
            self.commit(&mut inner, events)?;
        }
        Ok(idle.len())
    }

    pub fn next(&self, session_id: &str) -> Result<SessionView, ServiceError> {
        let mut inner = self.lock();
        self.expire_if_idle(&mut inner, session_id)?;
        Self::view(&inner.state, session_id)
    }

    pub fn answer(&self, session_id: &str, request: AnswerRequest) -> Result<SessionView, ServiceError> {
        let mut inner = self.lock();
        self.expire_if_idle(&mut inner, session_id)?;
        let session = &inner.state.sessions[session_id];
        match session.state {
            SessionState::AwaitingAnswer => {}
            SessionState::Expired => return Err(ServiceError::Expired),
            other => return Err(ServiceError::WrongState(other)),
        }
        let expected = session.answers.len();
        if let Some(got) = request.asked {
            if got != expected {
                return Err(ServiceError::StaleAnswer { expected, got });
            }
        }
        let (left, right) = session.pending.expect("awaiting sessions have a query");
        let mut answers = session.answers.clone();
        answers.push(request.prefer == Choice::Left);
        let step = advance(&session.plan, &answers);
        let events = vec![
            (
                session_id.to_string(),
                EventKind::Answer {
                    left,
                    right,
                    prefer: request.prefer,
                },
            ),
            (session_id.to_string(), step_event(&step)),
        ];
        self.commit(&mut inner, events)?;
        Self::view(&inner.state, session_id)
    }

    pub fn result(&self, session_id: &str) -> Result<ReportView, ServiceError> {
        let mut inner = self.lock();
        self.expire_if_idle(&mut inner, session_id)?;
        let state = &inner.state;
        let session = &state.sessions[session_id];
        match (&session.state, &session.report) {
            (SessionState::Completed, Some(report)) => {
                Ok(ReportView::new(&state.polls[&session.poll_id].record.names(), report))
            }
            (SessionState::Expired, _) => Err(ServiceError::Expired),
            (SessionState::Failed, _) => Err(ServiceError::Failed(session.failure.clone().unwrap_or_default())),
            _ => Err(ServiceError::NotCompleted),
        }
    }

    pub fn aggregate(&self, poll_id: &str) -> Result<AggregateView, ServiceError> {
        let inner = self.lock();
        let state = &inner.state;
        let poll = state
            .polls
            .get(poll_id)
            .ok_or_else(|| ServiceError::UnknownPoll(poll_id.to_string()))?;
        if poll.completed.is_empty() {
            return Err(ServiceError::NoCompletedSessions);
        }
        let names = poll.record.names();
        let votes = poll
            .completed
            .iter()
            .map(|id| state.sessions[id].report.as_ref().expect("completed").ranking.clone())
            .collect();
        let profile = Profile::new(names.len(), votes).map_err(|e| ServiceError::Internal(e.to_string()))?;
        let margins = pairwise_matrix(&profile).rows().to_vec();
        let respondents = profile.voters();
        let partial = |status| AggregateView {
            status,
            ranking: None,
            winner: None,
            margins: margins.clone(),
            respondents,
        };
        if respondents % 2 == 0 {
            return Ok(partial(AggregateStatus::Partial));
        }
        let ranking = match aggregate_ranking(&profile) {
            Ok(r) => r,
            Err(SpverifyError::CycleDetected) => return Ok(partial(AggregateStatus::Cyclic)),
            Err(e) => return Err(ServiceError::Internal(e.to_string())),
        };
        if let Some(axis) = poll.record.known_axis() {
            let all_sp = profile
                .votes()
                .iter()
                .all(|v| is_single_peaked(v, &axis).unwrap_or(false));
            if all_sp {
                let median = median_peak_winner(&profile, &axis).map_err(|e| ServiceError::Internal(e.to_string()))?;
                if median != ranking.peak() {
                    return Err(ServiceError::Internal(format!(
                        "median peak {} disagrees with majority winner {}",
                        names.name(median),
                        names.name(ranking.peak())
                    )));
                }
            }
        }
        Ok(AggregateView {
            status: AggregateStatus::Complete,
            winner: Some(names.name(ranking.peak()).to_string()),
            ranking: Some(names.ranking_names(&ranking)),
            margins,
            respondents,
        })
    }
}
