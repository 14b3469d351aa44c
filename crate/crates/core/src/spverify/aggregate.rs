use serde::{Deserialize, Serialize};

use crate::types::{AlternativeId, OrdinalAxis, Profile, Ranking};

use super::SpverifyError;

/// `margins[a][b]` = votes preferring `a` to `b` minus votes preferring `b` to `a`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairwiseMatrix {
    margins: Vec<Vec<i64>>,
}

impl PairwiseMatrix {
    pub fn margin(&self, a: AlternativeId, b: AlternativeId) -> i64 {
        self.margins[a.index()][b.index()]
    }

    pub fn rows(&self) -> &[Vec<i64>] {
        &self.margins
    }

    pub fn len(&self) -> usize {
        self.margins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.margins.is_empty()
    }
}

pub fn pairwise_matrix(profile: &Profile) -> PairwiseMatrix {
    let m = profile.alternatives();
    let mut margins = vec![vec![0i64; m]; m];
    for vote in profile.votes() {
        for (k, &a) in vote.order().iter().enumerate() {
            for &b in &vote.order()[k + 1..] {
                margins[a.index()][b.index()] += 1;
                margins[b.index()][a.index()] -= 1;
            }
        }
    }
    PairwiseMatrix { margins }
}

/// The ranking induced by pairwise majorities.
///
/// The majority relation is a strict total order exactly when the number of
/// pairwise wins takes every value `m−1, …, 0` once.
pub fn aggregate_ranking(profile: &Profile) -> Result<Ranking, SpverifyError> {
    let n = profile.voters();
    if n.is_multiple_of(2) {
        return Err(SpverifyError::EvenVoters(n));
    }
    let m = profile.alternatives();
    let matrix = pairwise_matrix(profile);
    let wins: Vec<usize> = matrix
        .rows()
        .iter()
        .map(|row| row.iter().filter(|&&x| x > 0).count())
        .collect();
    let mut slot = vec![None; m];
    for (a, &w) in wins.iter().enumerate() {
        match slot.get_mut(m - 1 - w) {
            Some(entry @ None) => *entry = Some(AlternativeId::new(a)),
            _ => return Err(SpverifyError::CycleDetected),
        }
    }
    let order = slot.into_iter().map(|s| s.expect("every slot filled")).collect();
    Ok(Ranking::new(order).expect("permutation"))
}

/// The alternative at the median of the votes' peak positions, with multiplicity.
pub fn median_peak_winner(profile: &Profile, axis: &OrdinalAxis) -> Result<AlternativeId, SpverifyError> {
    let n = profile.voters();
    if n.is_multiple_of(2) {
        return Err(SpverifyError::EvenVoters(n));
    }
    if profile.alternatives() != axis.len() {
        return Err(SpverifyError::SizeMismatch {
            profile: profile.alternatives(),
            axis: axis.len(),
        });
    }
    let mut peaks: Vec<_> = profile.votes().iter().map(|v| axis.position_of(v.peak())).collect();
    peaks.sort_unstable();
    Ok(axis.at(peaks[n / 2]))
}
