//! Single-peakedness with respect to a known axis.

use crate::types::{AlternativeId, OrdinalAxis, Ranking};
use crate::CoreError;

/// Largest axis [`enumerate_single_peaked`] accepts by default.
pub const DEFAULT_ENUMERATION_CAP: usize = 12;

/// True iff every top-k prefix of `vote` is a contiguous block of `axis`.
pub fn is_single_peaked(vote: &Ranking, axis: &OrdinalAxis) -> Result<bool, CoreError> {
    if vote.len() != axis.len() {
        return Err(CoreError::SizeMismatch {
            expected: axis.len(),
            found: vote.len(),
        });
    }
    let mut order = vote.iter();
    let Some(peak) = order.next() else {
        return Ok(true);
    };
    let start = axis.position_of(peak).index();
    let (mut lo, mut hi) = (start, start);
    for next in order {
        let k = axis.position_of(next).index();
        if lo > 0 && k == lo - 1 {
            lo = k;
        } else if k == hi + 1 {
            hi = k;
        } else {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Every ranking single-peaked with respect to `axis`, each exactly once.
///
/// Built bottom-up: the least preferred remaining alternative is always one of
/// the two ends of the remaining interval, which gives `2^(m−1)` rankings.
pub fn enumerate_single_peaked(axis: &OrdinalAxis) -> Result<Vec<Ranking>, CoreError> {
    enumerate_single_peaked_capped(axis, DEFAULT_ENUMERATION_CAP)
}

pub fn enumerate_single_peaked_capped(
    axis: &OrdinalAxis,
    cap: usize,
) -> Result<Vec<Ranking>, CoreError> {
    let m = axis.len();
    if m > cap {
        return Err(CoreError::CapExceeded {
            what: "alternatives",
            value: m,
            cap,
        });
    }
    if m == 0 {
        return Ok(vec![Ranking::identity(0)]);
    }
    let mut out = Vec::with_capacity(1 << (m - 1));
    let mut tail = Vec::with_capacity(m);
    extend_from_bottom(axis.order(), 0, m - 1, &mut tail, &mut out);
    Ok(out)
}

fn extend_from_bottom(
    order: &[AlternativeId],
    lo: usize,
    hi: usize,
    tail: &mut Vec<AlternativeId>,
    out: &mut Vec<Ranking>,
) {
    if lo == hi {
        let ranking: Vec<AlternativeId> = std::iter::once(order[lo])
            .chain(tail.iter().rev().copied())
            .collect();
        out.push(Ranking::new(ranking).expect("permutation"));
        return;
    }
    tail.push(order[lo]);
    extend_from_bottom(order, lo + 1, hi, tail, out);
    tail.pop();
    tail.push(order[hi]);
    extend_from_bottom(order, lo, hi - 1, tail, out);
    tail.pop();
}
