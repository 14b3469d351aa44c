use crate::oracle::Oracle;
use crate::types::{OrdinalAxis, OrdinalPosition};

use super::{check_size, Chain, ElicitError, ElicitReport};

/// Binary search for the peak on a known axis.
///
/// Probes the adjacent pair `(p(m1), p(m1+1))` at the midpoint of the live
/// range; at most `⌈log₂ m⌉` queries.
pub fn find_peak_given_positions<O: Oracle>(
    oracle: &mut O,
    axis: &OrdinalAxis,
) -> Result<OrdinalPosition, ElicitError> {
    check_size(axis.len(), oracle)?;
    // 1-based, as l and r in the textbook formulation
    let (mut l, mut r) = (1, axis.len());
    while l < r {
        let m1 = (l + r) / 2;
        let m2 = m1 + 1;
        let left = axis.at(OrdinalPosition::from_ordinal(m1));
        let right = axis.at(OrdinalPosition::from_ordinal(m2));
        if oracle.query(left, right)? {
            r = m1;
        } else {
            l = m2;
        }
    }
    Ok(OrdinalPosition::from_ordinal(l.max(1)))
}

/// Peak search followed by frontier comparisons; at most `m − 2 + ⌈log₂ m⌉` queries.
pub fn find_ranking_given_positions<O: Oracle>(
    oracle: &mut O,
    axis: &OrdinalAxis,
) -> Result<ElicitReport, ElicitError> {
    let start = oracle.count();
    let m = axis.len();
    check_size(m, oracle)?;
    let mut chain = Chain::new(m);
    if m == 0 {
        return Ok(ElicitReport::plain(chain.into_ranking(), 0));
    }
    let t = find_peak_given_positions(oracle, axis)?.index();
    let at = |k: usize| axis.at(OrdinalPosition::from_index(k));
    chain.push_back(at(t).index());
    // frontiers as 0-based positions; `left` is one past the next left candidate
    let mut left = t;
    let mut right = t + 1;
    while left >= 1 && right < m {
        if oracle.query(at(left - 1), at(right))? {
            left -= 1;
            chain.push_back(at(left).index());
        } else {
            chain.push_back(at(right).index());
            right += 1;
        }
    }
    while left >= 1 {
        left -= 1;
        chain.push_back(at(left).index());
    }
    while right < m {
        chain.push_back(at(right).index());
        right += 1;
    }
    Ok(ElicitReport::plain(chain.into_ranking(), oracle.count() - start))
}
