use crate::oracle::Oracle;
use crate::types::{AlternativeId, Ranking};

use super::{check_size, ElicitError, ElicitReport};

/// Top-down merge sort over the ids `0..m`; the left half is the first
/// `⌈m/2⌉` ids. At most `m⌈log₂ m⌉` queries, and correct for any strict
/// preferences.
pub fn mergesort_elicit<O: Oracle>(oracle: &mut O, m: usize) -> Result<ElicitReport, ElicitError> {
    let start = oracle.count();
    check_size(m, oracle)?;
    let ids: Vec<AlternativeId> = (0..m).map(AlternativeId::new).collect();
    let sorted = sort(oracle, &ids)?;
    let ranking = Ranking::new(sorted).expect("permutation");
    Ok(ElicitReport::plain(ranking, oracle.count() - start))
}

fn sort<O: Oracle>(oracle: &mut O, ids: &[AlternativeId]) -> Result<Vec<AlternativeId>, ElicitError> {
    if ids.len() <= 1 {
        return Ok(ids.to_vec());
    }
    let (left, right) = ids.split_at(ids.len().div_ceil(2));
    let left = sort(oracle, left)?;
    let right = sort(oracle, right)?;
    let mut merged = Vec::with_capacity(ids.len());
    let (mut i, mut j) = (0, 0);
    while i < left.len() && j < right.len() {
        if oracle.query(left[i], right[j])? {
            merged.push(left[i]);
            i += 1;
        } else {
            merged.push(right[j]);
            j += 1;
        }
    }
    merged.extend_from_slice(&left[i..]);
    merged.extend_from_slice(&right[j..]);
    Ok(merged)
}
