use serde::{Deserialize, Serialize};

use crate::oracle::{MemoizingOracle, Oracle, QueryRecord};

use super::{elicit, mergesort_elicit, verify_chain, ElicitError, ElicitReport, ElicitationContext};

/// Stage of a robust run, reported to observers as it is entered.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    AsIf,
    Verify,
    Fallback,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RobustOptions {
    /// Serve fallback queries already answered earlier in the run from a cache.
    pub reuse_answers: bool,
}

impl Default for RobustOptions {
    fn default() -> Self {
        RobustOptions { reuse_answers: true }
    }
}

/// Elicit as if single-peaked, verify, and fall back to a full sort on failure.
pub fn robust_elicit<O: Oracle>(
    oracle: &mut O,
    context: &ElicitationContext,
) -> Result<ElicitReport, ElicitError> {
    robust_elicit_with(oracle, context, RobustOptions::default())
}

pub fn robust_elicit_with<O: Oracle>(
    oracle: &mut O,
    context: &ElicitationContext,
    options: RobustOptions,
) -> Result<ElicitReport, ElicitError> {
    robust_elicit_observed(oracle, context, options, |_| {})
}

/// [`robust_elicit_with`], calling `observer` on entry to each phase.
///
/// With no context there is nothing to verify: the run is a plain sort and is
/// reported as neither verified nor fallen back.
pub fn robust_elicit_observed<O: Oracle>(
    oracle: &mut O,
    context: &ElicitationContext,
    options: RobustOptions,
    mut observer: impl FnMut(Phase),
) -> Result<ElicitReport, ElicitError> {
    let start = oracle.count();
    observer(Phase::AsIf);
    let candidate = match elicit(oracle, context) {
        Ok(report) if *context == ElicitationContext::None => return Ok(report),
        Ok(report) => Some(report.ranking),
        Err(ElicitError::InconsistentAnswers) => None,
        Err(e) => return Err(e),
    };
    if let Some(candidate) = candidate {
        observer(Phase::Verify);
        if verify_chain(oracle, &candidate)? {
            return Ok(ElicitReport {
                ranking: candidate,
                queries_used: oracle.count() - start,
                verified: true,
                fell_back: false,
            });
        }
    }
    observer(Phase::Fallback);
    let m = oracle.alternatives();
    let sorted = if options.reuse_answers {
        let known: Vec<QueryRecord> = oracle.transcript()[start..].to_vec();
        let mut memo = MemoizingOracle::seeded(&mut *oracle, known);
        mergesort_elicit(&mut memo, m)?
    } else {
        mergesort_elicit(oracle, m)?
    };
    Ok(ElicitReport {
        ranking: sorted.ranking,
        queries_used: oracle.count() - start,
        verified: false,
        fell_back: true,
    })
}
