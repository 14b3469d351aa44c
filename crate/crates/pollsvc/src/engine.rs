//! Resumable elicitation by replay.
//!
//! A session's whole algorithm state is its [`Plan`] plus the answers received
//! so far. To find the next question the algorithm is rerun from the start
//! against those answers; it suspends on the first query it cannot answer.
//! Every algorithm is deterministic, so the same answers always yield the same
//! next query.

use serde::{Deserialize, Serialize};

use peakpoll_core::elicit::{elicit, robust_elicit, ElicitError, ElicitReport, ElicitationContext};
use peakpoll_core::oracle::{CountingOracle, ReplayRespondent};
use peakpoll_core::{AlternativeId, OracleError};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Plan {
    pub m: usize,
    pub context: ElicitationContext,
    pub robust: bool,
}

impl Plan {
    /// Worst-case queries before any fallback: the algorithm's bound, plus
    /// the `m − 1` verification queries in robust mode.
    pub fn bound(&self) -> usize {
        let verify = match (&self.context, self.robust) {
            (ElicitationContext::None, _) | (_, false) => 0,
            _ => self.m.saturating_sub(1),
        };
        self.context.bound(self.m) + verify
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Step {
    Ask { left: AlternativeId, right: AlternativeId },
    Done(ElicitReport),
    /// The answers cannot come from any agent the algorithm supports.
    Failed(String),
}

/// Reruns `plan` against `answers`.
///
/// Panics if the algorithm finishes without consuming every answer, which
/// would mean the answers were recorded against a different plan.
pub fn advance(plan: &Plan, answers: &[bool]) -> Step {
    let mut oracle = CountingOracle::new(ReplayRespondent::new(plan.m, answers.to_vec()));
    let outcome = if plan.robust {
        robust_elicit(&mut oracle, &plan.context)
    } else {
        elicit(&mut oracle, &plan.context)
    };
    match outcome {
        Ok(report) => {
            assert_eq!(oracle.respondent().consumed(), answers.len(), "answers left over after completion");
            Step::Done(report)
        }
        Err(ElicitError::Oracle(OracleError::Suspended { left, right })) => Step::Ask { left, right },
        Err(e) => Step::Failed(e.to_string()),
    }
}
