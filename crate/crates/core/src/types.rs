use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::CoreError;

/// Index of an alternative within one problem instance, in `0..m`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AlternativeId(usize);

impl AlternativeId {
    pub const fn new(index: usize) -> Self {
        AlternativeId(index)
    }

    pub const fn index(self) -> usize {
        self.0
    }
}

impl From<usize> for AlternativeId {
    fn from(index: usize) -> Self {
        AlternativeId(index)
    }
}

impl fmt::Display for AlternativeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// Checks that `order` is a permutation of `0..order.len()` and returns its inverse.
fn invert_permutation(order: &[AlternativeId]) -> Result<Vec<usize>, CoreError> {
    let m = order.len();
    let mut inverse = vec![usize::MAX; m];
    for (k, id) in order.iter().enumerate() {
        let i = id.index();
        if i >= m {
            return Err(CoreError::OutOfRange { id: i, m });
        }
        if inverse[i] != usize::MAX {
            return Err(CoreError::Duplicate(i));
        }
        inverse[i] = k;
    }
    Ok(inverse)
}

/// A place on the left-to-right axis.
///
/// Stored 0-based; [`ordinal`](Self::ordinal) gives the conventional 1-based
/// position `p(1..m)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct OrdinalPosition(usize);

impl OrdinalPosition {
    pub const fn from_index(index: usize) -> Self {
        OrdinalPosition(index)
    }

    /// Panics if `ordinal` is zero.
    pub fn from_ordinal(ordinal: usize) -> Self {
        assert!(ordinal >= 1, "ordinal positions start at 1");
        OrdinalPosition(ordinal - 1)
    }

    pub const fn index(self) -> usize {
        self.0
    }

    pub const fn ordinal(self) -> usize {
        self.0 + 1
    }
}

/// Left-to-right order of the alternatives.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OrdinalAxis {
    order: Vec<AlternativeId>,
    inverse: Vec<usize>,
}

impl OrdinalAxis {
    pub fn new(order: Vec<AlternativeId>) -> Result<Self, CoreError> {
        let inverse = invert_permutation(&order)?;
        Ok(OrdinalAxis { order, inverse })
    }

    pub fn from_indices(order: &[usize]) -> Result<Self, CoreError> {
        Self::new(order.iter().copied().map(AlternativeId::new).collect())
    }

    /// The axis `0 < 1 < … < m−1`.
    pub fn identity(m: usize) -> Self {
        OrdinalAxis {
            order: (0..m).map(AlternativeId::new).collect(),
            inverse: (0..m).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn at(&self, position: OrdinalPosition) -> AlternativeId {
        self.order[position.index()]
    }

    pub fn position_of(&self, id: AlternativeId) -> OrdinalPosition {
        OrdinalPosition(self.inverse[id.index()])
    }

    pub fn order(&self) -> &[AlternativeId] {
        &self.order
    }

    pub fn reversed(&self) -> Self {
        let order: Vec<_> = self.order.iter().rev().copied().collect();
        let m = order.len();
        let inverse = self.inverse.iter().map(|&k| m - 1 - k).collect();
        OrdinalAxis { order, inverse }
    }

    /// The orientation whose id sequence is lexicographically smaller.
    pub fn canonical(&self) -> Self {
        let reversed = self.reversed();
        if reversed.order < self.order {
            reversed
        } else {
            self.clone()
        }
    }
}

/// A strict total order over the alternatives, most preferred first.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Ranking {
    order: Vec<AlternativeId>,
    // 0-based rank per alternative
    rank: Vec<usize>,
}

impl Ranking {
    pub fn new(order: Vec<AlternativeId>) -> Result<Self, CoreError> {
        let rank = invert_permutation(&order)?;
        Ok(Ranking { order, rank })
    }

    pub fn from_indices(order: &[usize]) -> Result<Self, CoreError> {
        Self::new(order.iter().copied().map(AlternativeId::new).collect())
    }

    pub fn identity(m: usize) -> Self {
        Ranking {
            order: (0..m).map(AlternativeId::new).collect(),
            rank: (0..m).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// The most preferred alternative. Panics on an empty ranking.
    pub fn peak(&self) -> AlternativeId {
        self.order[0]
    }

    /// 1-based rank of `id`.
    pub fn rank_of(&self, id: AlternativeId) -> usize {
        self.rank[id.index()] + 1
    }

    /// Alternative at 1-based rank `rank`.
    pub fn at_rank(&self, rank: usize) -> AlternativeId {
        self.order[rank - 1]
    }

    pub fn prefers(&self, a: AlternativeId, b: AlternativeId) -> bool {
        self.rank[a.index()] < self.rank[b.index()]
    }

    pub fn order(&self) -> &[AlternativeId] {
        &self.order
    }

    pub fn iter(&self) -> impl Iterator<Item = AlternativeId> + '_ {
        self.order.iter().copied()
    }

    pub fn into_order(self) -> Vec<AlternativeId> {
        self.order
    }
}

impl Serialize for Ranking {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.order.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Ranking {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let order = Vec::<AlternativeId>::deserialize(deserializer)?;
        Ranking::new(order).map_err(serde::de::Error::custom)
    }
}

impl Serialize for OrdinalAxis {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.order.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for OrdinalAxis {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let order = Vec::<AlternativeId>::deserialize(deserializer)?;
        OrdinalAxis::new(order).map_err(serde::de::Error::custom)
    }
}

/// The votes of `n` agents over the same `m` alternatives.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Profile {
    m: usize,
    votes: Vec<Ranking>,
}

impl Profile {
    pub fn new(m: usize, votes: Vec<Ranking>) -> Result<Self, CoreError> {
        for vote in &votes {
            if vote.len() != m {
                return Err(CoreError::SizeMismatch {
                    expected: m,
                    found: vote.len(),
                });
            }
        }
        Ok(Profile { m, votes })
    }

    /// A profile over the alternatives of the first vote. Panics if `votes` is empty.
    pub fn from_votes(votes: Vec<Ranking>) -> Result<Self, CoreError> {
        let m = votes.first().expect("at least one vote").len();
        Self::new(m, votes)
    }

    pub fn alternatives(&self) -> usize {
        self.m
    }

    pub fn voters(&self) -> usize {
        self.votes.len()
    }

    pub fn votes(&self) -> &[Ranking] {
        &self.votes
    }
}

/// Exact cardinal positions `r(a)` of the alternatives on the real line.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CardinalLayout {
    positions: Vec<BigRational>,
}

impl CardinalLayout {
    pub fn new(positions: Vec<BigRational>) -> Result<Self, CoreError> {
        let mut sorted: Vec<usize> = (0..positions.len()).collect();
        sorted.sort_by(|&a, &b| positions[a].cmp(&positions[b]));
        for pair in sorted.windows(2) {
            if positions[pair[0]] == positions[pair[1]] {
                let (a, b) = (pair[0].min(pair[1]), pair[0].max(pair[1]));
                return Err(CoreError::DuplicatePosition(a, b));
            }
        }
        Ok(CardinalLayout { positions })
    }

    /// Parses each entry with [`parse_rational`].
    pub fn from_decimals(values: &[&str]) -> Result<Self, CoreError> {
        let positions = values
            .iter()
            .map(|s| parse_rational(s))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(positions)
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn position(&self, id: AlternativeId) -> &BigRational {
        &self.positions[id.index()]
    }

    pub fn positions(&self) -> &[BigRational] {
        &self.positions
    }

    /// Alternatives sorted by ascending position.
    pub fn induced_axis(&self) -> OrdinalAxis {
        let mut order: Vec<AlternativeId> = (0..self.len()).map(AlternativeId::new).collect();
        order.sort_by(|a, b| self.position(*a).cmp(self.position(*b)));
        OrdinalAxis::new(order).expect("sorting a permutation yields a permutation")
    }

    /// The ranking of an agent at `agent`: alternatives by ascending `|r − r(a)|`.
    ///
    /// Returns `None` if two alternatives are equidistant from the agent.
    pub fn ranking_for(&self, agent: &AgentPosition) -> Option<Ranking> {
        let distances: Vec<BigRational> = self
            .positions
            .iter()
            .map(|p| (p - agent.value()).abs())
            .collect();
        let mut order: Vec<AlternativeId> = (0..self.len()).map(AlternativeId::new).collect();
        order.sort_by(|a, b| distances[a.index()].cmp(&distances[b.index()]));
        if order
            .windows(2)
            .any(|w| distances[w[0].index()] == distances[w[1].index()])
        {
            return None;
        }
        Some(Ranking::new(order).expect("permutation"))
    }
}

impl Serialize for CardinalLayout {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let strings: Vec<String> = self.positions.iter().map(|p| p.to_string()).collect();
        strings.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for CardinalLayout {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let strings = Vec::<String>::deserialize(deserializer)?;
        let positions = strings
            .iter()
            .map(|s| parse_rational(s))
            .collect::<Result<Vec<_>, _>>()
            .map_err(serde::de::Error::custom)?;
        CardinalLayout::new(positions).map_err(serde::de::Error::custom)
    }
}

/// An agent's exact coordinate on the line.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct AgentPosition(BigRational);

impl AgentPosition {
    pub fn new(value: BigRational) -> Self {
        AgentPosition(value)
    }

    pub fn value(&self) -> &BigRational {
        &self.0
    }

    /// Whether the agent sits exactly on the midpoint of some pair of alternatives.
    pub fn is_on_midpoint(&self, layout: &CardinalLayout) -> bool {
        let twice = &self.0 * BigInt::from(2);
        let p = layout.positions();
        (0..p.len()).any(|i| (i + 1..p.len()).any(|j| &p[i] + &p[j] == twice))
    }
}

/// Parses `"-0.125"`, `"3"`, `".5"`, `"1e-3"` or `"7/20"` into an exact rational.
pub fn parse_rational(text: &str) -> Result<BigRational, CoreError> {
    let invalid = || CoreError::InvalidNumber(text.to_string());
    let s = text.trim();
    if let Some((num, den)) = s.split_once('/') {
        let num: BigInt = num.trim().parse().map_err(|_| invalid())?;
        let den: BigInt = den.trim().parse().map_err(|_| invalid())?;
        if den.is_zero() {
            return Err(invalid());
        }
        return Ok(BigRational::new(num, den));
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(k) => {
            let exp: i32 = s[k + 1..].parse().map_err(|_| invalid())?;
            (&s[..k], exp)
        }
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(invalid());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(invalid());
    }
    let all_digits = format!("{int_part}{frac_part}");
    let numer: BigInt = if all_digits.is_empty() {
        BigInt::zero()
    } else {
        all_digits.parse().map_err(|_| invalid())?
    };
    let scale = exponent - frac_part.len() as i32;
    let pow = num_traits::pow(BigInt::from(10), scale.unsigned_abs() as usize);
    let mut value = if scale >= 0 {
        BigRational::from_integer(numer * pow)
    } else {
        BigRational::new(numer, pow)
    };
    if negative {
        value = -value;
    }
    Ok(value)
}

/// Convenience constructor for `num / den`.
pub fn ratio(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// `1` as a big rational.
pub fn one() -> BigRational {
    BigRational::one()
}
