use crate::oracle::Oracle;
use crate::types::{AlternativeId, Ranking};

use super::{check_size, Chain, ElicitError, ElicitReport};

/// Linear scan for the peak: `Query(challenger, incumbent)` over ids in
/// ascending order, exactly `m − 1` queries. Works for any strict preferences.
pub fn find_peak<O: Oracle>(oracle: &mut O, m: usize) -> Result<AlternativeId, ElicitError> {
    check_size(m, oracle)?;
    let mut s = AlternativeId::new(0);
    for a in (1..m).map(AlternativeId::new) {
        if oracle.query(a, s)? {
            s = a;
        }
    }
    Ok(s)
}

/// Elicits a ranking using another agent's vote in place of the axis; at most
/// `4m − 6` queries when both votes are single-peaked on a common axis.
pub fn find_ranking_given_other_vote<O: Oracle>(
    oracle: &mut O,
    known: &Ranking,
) -> Result<ElicitReport, ElicitError> {
    let start = oracle.count();
    let m = known.len();
    check_size(m, oracle)?;
    if m == 0 {
        return Ok(ElicitReport::plain(Ranking::identity(0), 0));
    }
    let s = find_peak(oracle, m)?;
    let top = known.peak();

    // alternatives between the two peaks, plus the known peak itself
    let mut between = vec![false; m];
    for &a in known.order() {
        if a == s {
            break;
        }
        if a != top && oracle.query(a, top)? {
            between[a.index()] = true;
        }
    }
    between[top.index()] = true;

    let mut chain = Chain::new(m);
    chain.push_back(s.index());
    for &a in known.order().iter().rev() {
        if between[a.index()] && a != s {
            chain.push_back(a.index());
        }
    }
    let mut c1 = s.index();
    let mut c2 = chain.tail.expect("non-empty");

    for &a in known.order() {
        let ai = a.index();
        if between[ai] || a == s {
            continue;
        }
        if oracle.query(AlternativeId::new(c2), a)? {
            chain.push_back(ai);
            c2 = ai;
            continue;
        }
        loop {
            match chain.next(c1) {
                Some(n) if oracle.query(AlternativeId::new(n), a)? => c1 = n,
                Some(_) => {
                    chain.insert_after(ai, c1);
                    break;
                }
                None => {
                    // only reachable with inconsistent answers
                    chain.push_back(ai);
                    c2 = ai;
                    break;
                }
            }
        }
        c1 = ai;
    }
    Ok(ElicitReport::plain(chain.into_ranking(), oracle.count() - start))
}
