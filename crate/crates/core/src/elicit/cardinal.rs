use std::ops::{Add, Mul, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive};

use crate::oracle::Oracle;
use crate::types::{AlternativeId, CardinalLayout, Ranking};

use super::{check_size, ElicitError, ElicitReport};

// Integer keys stay within i128 when every scaled position and the common
// denominator fit in 120 bits; sentinels and sums then need at most 125.
const FAST_PATH_BITS: u64 = 120;

/// Binary search over the sorted pairwise midpoints.
///
/// Each probe asks about one pair `(a, a')` with `r(a) < r(a')`: preferring `a`
/// puts the agent left of their midpoint. The final open interval between two
/// consecutive midpoints fixes the ranking. At most `2⌈log₂ m⌉` queries.
///
/// The search first runs over the index range `(0, C)`; the last midpoint is
/// probed only when the agent ends up immediately to its left.
pub fn find_ranking_given_cardinal_positions<O: Oracle>(
    oracle: &mut O,
    layout: &CardinalLayout,
) -> Result<ElicitReport, ElicitError> {
    let start = oracle.count();
    let m = layout.len();
    check_size(m, oracle)?;
    if m <= 1 {
        return Ok(ElicitReport::plain(Ranking::identity(m), 0));
    }
    let (numerators, denominator) = scale_to_integers(layout);
    let fits = denominator.bits() <= FAST_PATH_BITS
        && numerators.iter().all(|n| n.bits() <= FAST_PATH_BITS);
    let ranking = if fits {
        let small: Vec<i128> = numerators.iter().map(|n| n.to_i128().expect("fits")).collect();
        search(oracle, &small, denominator.to_i128().expect("fits"))?
    } else {
        search(oracle, &numerators, denominator)?
    };
    Ok(ElicitReport::plain(ranking, oracle.count() - start))
}

/// Positions as integers `N_a` over the common denominator `L`.
fn scale_to_integers(layout: &CardinalLayout) -> (Vec<BigInt>, BigInt) {
    let denominator = layout
        .positions()
        .iter()
        .fold(BigInt::one(), |acc, p| acc.lcm(p.denom()));
    let numerators = layout
        .positions()
        .iter()
        .map(|p| p.numer() * (&denominator / p.denom()))
        .collect();
    (numerators, denominator)
}

trait Key: Clone + Ord + Signed + From<i32>
where
    for<'a> &'a Self: Add<&'a Self, Output = Self> + Sub<&'a Self, Output = Self> + Mul<&'a Self, Output = Self>,
{
}

impl<K> Key for K
where
    K: Clone + Ord + Signed + From<i32>,
    for<'a> &'a K: Add<&'a K, Output = K> + Sub<&'a K, Output = K> + Mul<&'a K, Output = K>,
{
}

struct Midpoint<K> {
    // twice the midpoint, scaled by L
    key: K,
    left: AlternativeId,
    right: AlternativeId,
}

fn search<O, K>(oracle: &mut O, n: &[K], denominator: K) -> Result<Ranking, ElicitError>
where
    O: Oracle,
    K: Key,
    for<'a> &'a K: Add<&'a K, Output = K> + Sub<&'a K, Output = K> + Mul<&'a K, Output = K>,
{
    let m = n.len();
    let mut midpoints = Vec::with_capacity(m * (m - 1) / 2);
    for i in 0..m {
        for j in i + 1..m {
            let (left, right) = if n[i] < n[j] { (i, j) } else { (j, i) };
            midpoints.push(Midpoint {
                key: &n[i] + &n[j],
                left: AlternativeId::new(left),
                right: AlternativeId::new(right),
            });
        }
    }
    // stable: equal keys keep generation order
    midpoints.sort_by(|x, y| x.key.cmp(&y.key));
    let c = midpoints.len();
    let probe = |oracle: &mut O, h: usize| -> Result<bool, ElicitError> {
        let mp = &midpoints[h - 1];
        Ok(oracle.query(mp.left, mp.right)?)
    };

    let (mut l, mut u) = (0, c);
    while l + 1 < u {
        let h = (l + u) / 2;
        if probe(oracle, h)? {
            u = h;
        } else {
            l = h;
        }
    }
    if u == c && !probe(oracle, c)? {
        l = c;
        u = c + 1;
    }

    let two_l = &denominator + &denominator;
    let key_at = |k: usize| -> K {
        if k == 0 {
            &midpoints[0].key - &two_l
        } else if k == c + 1 {
            &midpoints[c - 1].key + &two_l
        } else {
            midpoints[k - 1].key.clone()
        }
    };
    let (low, high) = (key_at(l), key_at(u));
    if low >= high {
        return Err(ElicitError::InconsistentAnswers);
    }
    // estimate r = (low + high) / 4L; compare |4L·r − 4N_a|
    let estimate = &low + &high;
    let four = K::from(4);
    let distance: Vec<K> = n.iter().map(|na| (&estimate - &(&four * na)).abs()).collect();
    let mut order: Vec<AlternativeId> = (0..m).map(AlternativeId::new).collect();
    order.sort_by(|a, b| distance[a.index()].cmp(&distance[b.index()]));
    Ok(Ranking::new(order).expect("permutation"))
}
