//! Elicitation algorithms.
//!
//! Every algorithm talks to the agent only through an [`Oracle`] and returns an
//! [`ElicitReport`] whose `queries_used` is the oracle's count delta across the
//! run. The single-peaked algorithms do not detect violated assumptions; that
//! is the job of [`verify_chain`] and [`robust_elicit`].

mod cardinal;
mod mergesort;
mod other_vote;
mod positions;
mod robust;
mod verify;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::oracle::{Oracle, OracleError};
use crate::types::{CardinalLayout, OrdinalAxis, Ranking};
use crate::ceil_log2;

pub use cardinal::find_ranking_given_cardinal_positions;
pub use mergesort::mergesort_elicit;
pub use other_vote::{find_peak, find_ranking_given_other_vote};
pub use positions::{find_peak_given_positions, find_ranking_given_positions};
pub use robust::{robust_elicit, robust_elicit_observed, robust_elicit_with, Phase, RobustOptions};
pub use verify::verify_chain;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ElicitReport {
    pub ranking: Ranking,
    pub queries_used: usize,
    /// The verification chain ran and confirmed the as-if ranking.
    pub verified: bool,
    /// Robust mode resorted to a full sort.
    pub fell_back: bool,
}

impl ElicitReport {
    fn plain(ranking: Ranking, queries_used: usize) -> Self {
        ElicitReport {
            ranking,
            queries_used,
            verified: false,
            fell_back: false,
        }
    }
}

/// What the elicitor knows in advance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum ElicitationContext {
    KnownAxis(OrdinalAxis),
    KnownVote(Ranking),
    KnownCardinal(CardinalLayout),
    None,
}

impl ElicitationContext {
    /// Alternatives covered by the context, if it fixes them.
    pub fn alternatives(&self) -> Option<usize> {
        match self {
            ElicitationContext::KnownAxis(axis) => Some(axis.len()),
            ElicitationContext::KnownVote(vote) => Some(vote.len()),
            ElicitationContext::KnownCardinal(layout) => Some(layout.len()),
            ElicitationContext::None => None,
        }
    }

    /// Worst-case query count of the matching algorithm for `m` alternatives.
    pub fn bound(&self, m: usize) -> usize {
        match self {
            ElicitationContext::KnownAxis(_) => bound_given_positions(m),
            ElicitationContext::KnownVote(_) => bound_given_other_vote(m),
            ElicitationContext::KnownCardinal(_) => bound_cardinal(m),
            ElicitationContext::None => bound_mergesort(m),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ElicitError {
    #[error(transparent)]
    Oracle(#[from] OracleError),
    /// The binary search over midpoints ended on an empty interval.
    #[error("answers are inconsistent with the cardinal layout")]
    InconsistentAnswers,
    #[error("context covers {expected} alternatives but the oracle has {found}")]
    SizeMismatch { expected: usize, found: usize },
}

fn check_size(expected: usize, oracle: &impl Oracle) -> Result<(), ElicitError> {
    let found = oracle.alternatives();
    if expected != found {
        return Err(ElicitError::SizeMismatch { expected, found });
    }
    Ok(())
}

/// `m − 2 + ⌈log₂ m⌉`, or 0 for `m ≤ 1`.
pub fn bound_given_positions(m: usize) -> usize {
    if m <= 1 {
        0
    } else {
        m - 2 + ceil_log2(m)
    }
}

/// `4m − 6` for `m ≥ 2`; 0 for `m = 1`.
pub fn bound_given_other_vote(m: usize) -> usize {
    if m <= 1 {
        0
    } else {
        4 * m - 6
    }
}

/// `2⌈log₂ m⌉`.
pub fn bound_cardinal(m: usize) -> usize {
    2 * ceil_log2(m)
}

/// `m⌈log₂ m⌉`.
pub fn bound_mergesort(m: usize) -> usize {
    m * ceil_log2(m)
}

/// Runs the algorithm matching `context` without verification.
pub fn elicit<O: Oracle>(
    oracle: &mut O,
    context: &ElicitationContext,
) -> Result<ElicitReport, ElicitError> {
    match context {
        ElicitationContext::KnownAxis(axis) => find_ranking_given_positions(oracle, axis),
        ElicitationContext::KnownVote(vote) => find_ranking_given_other_vote(oracle, vote),
        ElicitationContext::KnownCardinal(layout) => {
            find_ranking_given_cardinal_positions(oracle, layout)
        }
        ElicitationContext::None => {
            let m = oracle.alternatives();
            mergesort_elicit(oracle, m)
        }
    }
}

/// Doubly linked list over alternative ids, used to build rankings by
/// appending and inserting.
#[derive(Debug, Clone)]
struct Chain {
    head: Option<usize>,
    tail: Option<usize>,
    next: Vec<Option<usize>>,
    prev: Vec<Option<usize>>,
    len: usize,
}

impl Chain {
    fn new(m: usize) -> Self {
        Chain {
            head: None,
            tail: None,
            next: vec![None; m],
            prev: vec![None; m],
            len: 0,
        }
    }

    fn push_back(&mut self, a: usize) {
        self.prev[a] = self.tail;
        self.next[a] = None;
        match self.tail {
            Some(t) => self.next[t] = Some(a),
            None => self.head = Some(a),
        }
        self.tail = Some(a);
        self.len += 1;
    }

    fn insert_after(&mut self, a: usize, after: usize) {
        let following = self.next[after];
        self.prev[a] = Some(after);
        self.next[a] = following;
        self.next[after] = Some(a);
        match following {
            Some(f) => self.prev[f] = Some(a),
            None => self.tail = Some(a),
        }
        self.len += 1;
    }

    fn next(&self, a: usize) -> Option<usize> {
        self.next[a]
    }

    fn into_ranking(self) -> Ranking {
        let mut order = Vec::with_capacity(self.len);
        let mut cursor = self.head;
        while let Some(a) = cursor {
            order.push(crate::AlternativeId::new(a));
            cursor = self.next[a];
        }
        Ranking::new(order).expect("chain holds every alternative once")
    }
}
