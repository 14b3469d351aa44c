//! The comparison-query contract.
//!
//! An [`Oracle`] answers `query(a, b)`: is `a` strictly preferred to `b`? Every
//! answered query is counted and recorded in a transcript, so that query
//! complexity can be measured on any run. Answer sources implement the smaller
//! [`Respondent`] trait and are wrapped by [`CountingOracle`], which performs
//! argument validation and bookkeeping.

use std::collections::HashMap;

use num_traits::Signed;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::types::{AgentPosition, AlternativeId, CardinalLayout, Ranking};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    /// `query(a, a)`: indifference is undefined.
    #[error("cannot compare alternative {0} with itself")]
    IdenticalArguments(AlternativeId),
    #[error("alternative {id} is out of range for {m} alternatives")]
    UnknownAlternative { id: AlternativeId, m: usize },
    /// The respondent has not answered this query yet. Raised by answer
    /// sources that are fed asynchronously, such as a human over the wire.
    #[error("waiting for an answer to {left} vs {right}")]
    Suspended {
        left: AlternativeId,
        right: AlternativeId,
    },
    /// The respondent is indifferent between the two alternatives.
    #[error("respondent is indifferent between {0} and {1}")]
    Indifferent(AlternativeId, AlternativeId),
}

/// One answered query: `answer` is true iff `left` was preferred to `right`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QueryRecord {
    pub left: AlternativeId,
    pub right: AlternativeId,
    pub answer: bool,
}

impl QueryRecord {
    /// The (preferred, other) pair this answer establishes.
    pub fn preference(&self) -> (AlternativeId, AlternativeId) {
        if self.answer {
            (self.left, self.right)
        } else {
            (self.right, self.left)
        }
    }
}

pub trait Oracle {
    /// Number of alternatives `m`; valid ids are `0..m`.
    fn alternatives(&self) -> usize;

    /// True iff the agent strictly prefers `a` to `b`.
    fn query(&mut self, a: AlternativeId, b: AlternativeId) -> Result<bool, OracleError>;

    /// Queries answered so far.
    fn count(&self) -> usize {
        self.transcript().len()
    }

    fn transcript(&self) -> &[QueryRecord];
}

impl<O: Oracle + ?Sized> Oracle for &mut O {
    fn alternatives(&self) -> usize {
        (**self).alternatives()
    }

    fn query(&mut self, a: AlternativeId, b: AlternativeId) -> Result<bool, OracleError> {
        (**self).query(a, b)
    }

    fn count(&self) -> usize {
        (**self).count()
    }

    fn transcript(&self) -> &[QueryRecord] {
        (**self).transcript()
    }
}

/// A source of answers. Arguments are already validated when this is called.
pub trait Respondent {
    fn alternatives(&self) -> usize;

    fn prefers(&mut self, a: AlternativeId, b: AlternativeId) -> Result<bool, OracleError>;
}

impl Respondent for Ranking {
    fn alternatives(&self) -> usize {
        self.len()
    }

    fn prefers(&mut self, a: AlternativeId, b: AlternativeId) -> Result<bool, OracleError> {
        Ok(Ranking::prefers(self, a, b))
    }
}

/// Checks `a ≠ b` and both ids in range.
pub fn validate_pair(m: usize, a: AlternativeId, b: AlternativeId) -> Result<(), OracleError> {
    for id in [a, b] {
        if id.index() >= m {
            return Err(OracleError::UnknownAlternative { id, m });
        }
    }
    if a == b {
        return Err(OracleError::IdenticalArguments(a));
    }
    Ok(())
}

/// Validates, counts and records every query forwarded to a [`Respondent`].
#[derive(Debug, Clone)]
pub struct CountingOracle<R> {
    respondent: R,
    transcript: Vec<QueryRecord>,
}

impl<R: Respondent> CountingOracle<R> {
    pub fn new(respondent: R) -> Self {
        CountingOracle {
            respondent,
            transcript: Vec::new(),
        }
    }

    pub fn respondent(&self) -> &R {
        &self.respondent
    }

    pub fn into_parts(self) -> (R, Vec<QueryRecord>) {
        (self.respondent, self.transcript)
    }
}

impl<R: Respondent> Oracle for CountingOracle<R> {
    fn alternatives(&self) -> usize {
        self.respondent.alternatives()
    }

    fn query(&mut self, a: AlternativeId, b: AlternativeId) -> Result<bool, OracleError> {
        validate_pair(self.alternatives(), a, b)?;
        let answer = self.respondent.prefers(a, b)?;
        self.transcript.push(QueryRecord {
            left: a,
            right: b,
            answer,
        });
        Ok(answer)
    }

    fn transcript(&self) -> &[QueryRecord] {
        &self.transcript
    }
}

/// A simulated agent answering truthfully from `truth`.
pub fn make_true_ranking_oracle(truth: Ranking) -> CountingOracle<Ranking> {
    CountingOracle::new(truth)
}

/// A cardinally single-peaked agent: prefers the alternative closer to its position.
#[derive(Debug, Clone)]
pub struct CardinalAgent {
    layout: CardinalLayout,
    position: AgentPosition,
}

impl CardinalAgent {
    pub fn new(layout: CardinalLayout, position: AgentPosition) -> Self {
        CardinalAgent { layout, position }
    }

    pub fn layout(&self) -> &CardinalLayout {
        &self.layout
    }

    pub fn position(&self) -> &AgentPosition {
        &self.position
    }
}

impl Respondent for CardinalAgent {
    fn alternatives(&self) -> usize {
        self.layout.len()
    }

    fn prefers(&mut self, a: AlternativeId, b: AlternativeId) -> Result<bool, OracleError> {
        let r = self.position.value();
        let da = (self.layout.position(a) - r).abs();
        let db = (self.layout.position(b) - r).abs();
        match da.cmp(&db) {
            std::cmp::Ordering::Less => Ok(true),
            std::cmp::Ordering::Greater => Ok(false),
            std::cmp::Ordering::Equal => Err(OracleError::Indifferent(a, b)),
        }
    }
}

/// Answers from a prerecorded list, in order, and suspends once it runs out.
///
/// This is how a conversation with a human is resumed: the algorithm is rerun
/// from the start against the answers received so far, and the query on which
/// it suspends is the next one to put to the respondent.
#[derive(Debug, Clone)]
pub struct ReplayRespondent {
    m: usize,
    answers: Vec<bool>,
    cursor: usize,
}

impl ReplayRespondent {
    pub fn new(m: usize, answers: Vec<bool>) -> Self {
        ReplayRespondent {
            m,
            answers,
            cursor: 0,
        }
    }

    /// Answers consumed so far.
    pub fn consumed(&self) -> usize {
        self.cursor
    }
}

impl Respondent for ReplayRespondent {
    fn alternatives(&self) -> usize {
        self.m
    }

    fn prefers(&mut self, a: AlternativeId, b: AlternativeId) -> Result<bool, OracleError> {
        match self.answers.get(self.cursor) {
            Some(&answer) => {
                self.cursor += 1;
                Ok(answer)
            }
            None => Err(OracleError::Suspended { left: a, right: b }),
        }
    }
}

/// Serves repeated questions from a cache.
///
/// The first ask of an unordered pair is forwarded to the inner oracle; later
/// asks of either orientation are answered locally. `count` and `transcript`
/// cover forwarded queries only.
#[derive(Debug, Clone)]
pub struct MemoizingOracle<O> {
    inner: O,
    // keyed by (min, max); value is "min preferred to max"
    cache: HashMap<(AlternativeId, AlternativeId), bool>,
    transcript: Vec<QueryRecord>,
}

impl<O: Oracle> MemoizingOracle<O> {
    pub fn new(inner: O) -> Self {
        MemoizingOracle {
            inner,
            cache: HashMap::new(),
            transcript: Vec::new(),
        }
    }

    /// Pre-loads answers that were obtained elsewhere; they are served without
    /// contacting the inner oracle.
    pub fn seeded(inner: O, known: impl IntoIterator<Item = QueryRecord>) -> Self {
        let mut oracle = Self::new(inner);
        for record in known {
            oracle.remember(record);
        }
        oracle
    }

    fn remember(&mut self, record: QueryRecord) {
        let (winner, loser) = record.preference();
        let key = (winner.min(loser), winner.max(loser));
        self.cache.insert(key, winner == key.0);
    }

    pub fn inner(&self) -> &O {
        &self.inner
    }

    pub fn into_inner(self) -> O {
        self.inner
    }
}

impl<O: Oracle> Oracle for MemoizingOracle<O> {
    fn alternatives(&self) -> usize {
        self.inner.alternatives()
    }

    fn query(&mut self, a: AlternativeId, b: AlternativeId) -> Result<bool, OracleError> {
        validate_pair(self.alternatives(), a, b)?;
        let key = (a.min(b), a.max(b));
        if let Some(&low_preferred) = self.cache.get(&key) {
            return Ok(if a == key.0 { low_preferred } else { !low_preferred });
        }
        let answer = self.inner.query(a, b)?;
        let record = QueryRecord {
            left: a,
            right: b,
            answer,
        };
        self.remember(record);
        self.transcript.push(record);
        Ok(answer)
    }

    fn transcript(&self) -> &[QueryRecord] {
        &self.transcript
    }
}
