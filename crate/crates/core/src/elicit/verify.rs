use crate::oracle::Oracle;
use crate::types::Ranking;

use super::{check_size, ElicitError};

/// Asks every adjacent pair of `candidate` in order, exactly `m − 1` queries,
/// and reports whether all of them confirmed the candidate's order.
///
/// The chain never stops early, so its cost does not depend on the answers.
pub fn verify_chain<O: Oracle>(oracle: &mut O, candidate: &Ranking) -> Result<bool, ElicitError> {
    check_size(candidate.len(), oracle)?;
    let mut confirmed = true;
    for pair in candidate.order().windows(2) {
        confirmed &= oracle.query(pair[0], pair[1])?;
    }
    Ok(confirmed)
}
