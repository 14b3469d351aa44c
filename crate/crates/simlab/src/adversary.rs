//! Interval adversary for the Ω(nm) lower bounds.
//!
//! Alternative `a_i` (id `i − 1`, `i = 1..=m`, `m` even) sits near the anchor
//! `k_i = 10·(−1)^i·⌊(i+1)/2⌋`; agents sit in `[−1, 1]`. The designated pairs
//! are `(a_i, a_{i+1})` for odd `i`. The adversary answers every query as the
//! ranking `a_1 ≻ a_2 ≻ … ≻ a_m`, which is the distance ranking of an agent at
//! −1 with every alternative on its anchor. A designated pair that was never
//! asked of agent `j` can be flipped for `j` alone by moving `a_i` to
//! `k_i − 1` and `j` to −1/10, without changing any other answer.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Signed;
use thiserror::Error;

use peakpoll_core::elicit::{
    find_ranking_given_cardinal_positions, find_ranking_given_other_vote, find_ranking_given_positions,
    mergesort_elicit, ElicitError,
};
use peakpoll_core::oracle::validate_pair;
use peakpoll_core::{
    AgentPosition, AlternativeId, CardinalLayout, Oracle, OracleError, OrdinalAxis, QueryRecord, Ranking,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AdversaryError {
    #[error("the adversary needs an even number of alternatives ≥ 2, got {0}")]
    OddAlternatives(usize),
    #[error("at least one agent is required")]
    NoAgents,
    #[error("index {0} is not an odd designated index")]
    NotDesignated(usize),
    #[error("agent {0} is out of range")]
    UnknownAgent(usize),
    #[error("pair {i} was already asked of agent {j}")]
    AlreadyQueried { i: usize, j: usize },
    #[error("an odd number of agents is required, got {0}")]
    EvenAgents(usize),
    #[error("the set of asked agents has {size} members; at most {max} allowed")]
    TooManyAsked { size: usize, max: usize },
    #[error("agent {j} was asked pair {i} but is not in the given set")]
    AskedOutsideSet { i: usize, j: usize },
    #[error(transparent)]
    Elicit(#[from] ElicitError),
}

/// `k_i = 10·(−1)^i·⌊(i+1)/2⌋` for 1-based `i`.
pub fn anchor(i: usize) -> i64 {
    let magnitude = 10 * i.div_ceil(2) as i64;
    if i.is_multiple_of(2) {
        magnitude
    } else {
        -magnitude
    }
}

fn alt(i: usize) -> AlternativeId {
    AlternativeId::new(i - 1)
}

/// Odd 1-based index of the designated pair containing id `a`.
fn designated_index(a: AlternativeId) -> usize {
    let i = a.index() + 1;
    if i % 2 == 1 {
        i
    } else {
        i - 1
    }
}

#[derive(Debug, Clone)]
pub struct AdversaryInstance {
    m: usize,
    n: usize,
    // per agent: odd designated indices already asked
    queried: Vec<BTreeSet<usize>>,
}

impl AdversaryInstance {
    pub fn new(m: usize, n: usize) -> Result<Self, AdversaryError> {
        if m < 2 || m % 2 == 1 {
            return Err(AdversaryError::OddAlternatives(m));
        }
        if n == 0 {
            return Err(AdversaryError::NoAgents);
        }
        Ok(AdversaryInstance {
            m,
            n,
            queried: vec![BTreeSet::new(); n],
        })
    }

    pub fn alternatives(&self) -> usize {
        self.m
    }

    pub fn agents(&self) -> usize {
        self.n
    }

    pub fn anchors(&self) -> Vec<i64> {
        (1..=self.m).map(anchor).collect()
    }

    /// Odd indices `1, 3, …, m−1`.
    pub fn designated(&self) -> impl Iterator<Item = usize> {
        (1..self.m).step_by(2)
    }

    pub fn was_queried(&self, i: usize, j: usize) -> bool {
        self.queried[j].contains(&i)
    }

    /// Agents asked about designated pair `i`.
    pub fn asked(&self, i: usize) -> BTreeSet<usize> {
        (0..self.n).filter(|&j| self.queried[j].contains(&i)).collect()
    }

    /// Designated `(i, j)` never asked.
    pub fn unasked(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for j in 0..self.n {
            for i in self.designated() {
                if !self.was_queried(i, j) {
                    out.push((i, j));
                }
            }
        }
        out
    }

    /// The answers every agent gives.
    pub fn forced_ranking(&self) -> Ranking {
        Ranking::identity(self.m)
    }

    /// `a_{m−1} < … < a_3 < a_1 < a_2 < a_4 < … < a_m`: the order of the anchors.
    pub fn anchor_axis(&self) -> OrdinalAxis {
        let odd = (1..self.m).step_by(2).rev();
        let even = (2..=self.m).step_by(2);
        OrdinalAxis::new(odd.chain(even).map(alt).collect()).expect("permutation")
    }

    /// `a_2 ≻ a_1 ≻ a_4 ≻ a_3 ≻ …`: the vote of an agent at +1, single-peaked
    /// on [`anchor_axis`](Self::anchor_axis).
    pub fn mirrored_vote(&self) -> Ranking {
        let order = (1..self.m).step_by(2).flat_map(|i| [alt(i + 1), alt(i)]).collect();
        Ranking::new(order).expect("permutation")
    }

    /// The anchors as an exact layout.
    pub fn anchor_layout(&self) -> CardinalLayout {
        CardinalLayout::new(self.anchors().iter().map(|&k| int(k)).collect()).expect("distinct anchors")
    }

    pub fn oracle(&mut self, j: usize) -> Result<AdversaryOracle<'_>, AdversaryError> {
        if j >= self.n {
            return Err(AdversaryError::UnknownAgent(j));
        }
        Ok(AdversaryOracle {
            instance: self,
            agent: j,
            transcript: Vec::new(),
        })
    }
}

/// Answers for one agent against the adversary, recording designated pairs.
#[derive(Debug)]
pub struct AdversaryOracle<'a> {
    instance: &'a mut AdversaryInstance,
    agent: usize,
    transcript: Vec<QueryRecord>,
}

impl Oracle for AdversaryOracle<'_> {
    fn alternatives(&self) -> usize {
        self.instance.m
    }

    fn query(&mut self, a: AlternativeId, b: AlternativeId) -> Result<bool, OracleError> {
        validate_pair(self.instance.m, a, b)?;
        let i = designated_index(a);
        if i == designated_index(b) {
            self.instance.queried[self.agent].insert(i);
        }
        let answer = a < b;
        self.transcript.push(QueryRecord {
            left: a,
            right: b,
            answer,
        });
        Ok(answer)
    }

    fn transcript(&self) -> &[QueryRecord] {
        &self.transcript
    }
}

fn int(k: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(k))
}

fn minus_one() -> AgentPosition {
    AgentPosition::new(int(-1))
}

fn minus_tenth() -> AgentPosition {
    AgentPosition::new(BigRational::new(BigInt::from(-1), BigInt::from(10)))
}

/// An exact assignment of positions to alternatives and agents.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct World {
    pub layout: CardinalLayout,
    pub agents: Vec<AgentPosition>,
}

impl World {
    /// Exact `|r_j − r(a)|`.
    pub fn distance(&self, j: usize, a: AlternativeId) -> BigRational {
        (self.layout.position(a) - self.agents[j].value()).abs()
    }

    /// Distance ranking of agent `j`, or `None` on a tie.
    pub fn ranking(&self, j: usize) -> Option<Ranking> {
        self.layout.ranking_for(&self.agents[j])
    }

    /// Whether agent `j`'s exact distances reproduce every record.
    pub fn reproduces(&self, j: usize, transcript: &[QueryRecord]) -> bool {
        self.ranking(j)
            .is_some_and(|r| transcript.iter().all(|q| r.prefers(q.left, q.right) == q.answer))
    }
}

fn moved_layout(instance: &AdversaryInstance, i: usize) -> CardinalLayout {
    let positions = (1..=instance.m)
        .map(|x| if x == i { int(anchor(x) - 1) } else { int(anchor(x)) })
        .collect();
    CardinalLayout::new(positions).expect("intervals are disjoint")
}

fn check_designated(instance: &AdversaryInstance, i: usize) -> Result<(), AdversaryError> {
    if i.is_multiple_of(2) || i >= instance.m {
        return Err(AdversaryError::NotDesignated(i));
    }
    Ok(())
}

/// A world agreeing with every answer except `(a_i, a_{i+1})` for agent `j`,
/// which it reverses.
pub fn counterexample_full(instance: &AdversaryInstance, i: usize, j: usize) -> Result<World, AdversaryError> {
    check_designated(instance, i)?;
    if j >= instance.n {
        return Err(AdversaryError::UnknownAgent(j));
    }
    if instance.was_queried(i, j) {
        return Err(AdversaryError::AlreadyQueried { i, j });
    }
    let agents = (0..instance.n)
        .map(|x| if x == j { minus_tenth() } else { minus_one() })
        .collect();
    Ok(World {
        layout: moved_layout(instance, i),
        agents,
    })
}

/// A world agreeing with every answer in which `a_{i+1}` beats `a_i` in the
/// pairwise election: agents in `asked` stay at −1, all others move to −1/10.
pub fn counterexample_aggregate(
    instance: &AdversaryInstance,
    i: usize,
    asked: &BTreeSet<usize>,
) -> Result<World, AdversaryError> {
    check_designated(instance, i)?;
    let n = instance.n;
    if n.is_multiple_of(2) {
        return Err(AdversaryError::EvenAgents(n));
    }
    if asked.len() > (n - 1) / 2 {
        return Err(AdversaryError::TooManyAsked {
            size: asked.len(),
            max: (n - 1) / 2,
        });
    }
    if let Some(&j) = asked.iter().find(|&&j| j >= n) {
        return Err(AdversaryError::UnknownAgent(j));
    }
    if let Some(j) = instance.asked(i).into_iter().find(|j| !asked.contains(j)) {
        return Err(AdversaryError::AskedOutsideSet { i, j });
    }
    let agents = (0..n)
        .map(|x| if asked.contains(&x) { minus_one() } else { minus_tenth() })
        .collect();
    Ok(World {
        layout: moved_layout(instance, i),
        agents,
    })
}

/// Forwards every query except one designated pair, which it answers itself
/// with the adversary's forced answer.
#[derive(Debug)]
pub struct SkippingOracle<O> {
    inner: O,
    skip: (AlternativeId, AlternativeId),
    transcript: Vec<QueryRecord>,
}

impl<O: Oracle> SkippingOracle<O> {
    pub fn new(inner: O, i: usize) -> Self {
        SkippingOracle {
            inner,
            skip: (alt(i), alt(i + 1)),
            transcript: Vec::new(),
        }
    }
}

impl<O: Oracle> Oracle for SkippingOracle<O> {
    fn alternatives(&self) -> usize {
        self.inner.alternatives()
    }

    fn query(&mut self, a: AlternativeId, b: AlternativeId) -> Result<bool, OracleError> {
        let answer = if (a.min(b), a.max(b)) == self.skip {
            validate_pair(self.alternatives(), a, b)?;
            a < b
        } else {
            self.inner.query(a, b)?
        };
        self.transcript.push(QueryRecord {
            left: a,
            right: b,
            answer,
        });
        Ok(answer)
    }

    fn transcript(&self) -> &[QueryRecord] {
        &self.transcript
    }
}

/// The elicitors the audit can run against the adversary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Elicitor {
    MergeSort,
    OtherVote,
    Positions,
    Cardinal,
    /// Merge sort that never asks designated pair `i` of the first agent.
    Skipping(usize),
}

impl Elicitor {
    pub fn name(&self) -> String {
        match self {
            Elicitor::MergeSort => "mergesort".into(),
            Elicitor::OtherVote => "other_vote".into(),
            Elicitor::Positions => "positions".into(),
            Elicitor::Cardinal => "cardinal".into(),
            Elicitor::Skipping(i) => format!("skipping{i}"),
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        match name {
            "mergesort" => Some(Elicitor::MergeSort),
            "other_vote" => Some(Elicitor::OtherVote),
            "positions" => Some(Elicitor::Positions),
            "cardinal" => Some(Elicitor::Cardinal),
            _ => name.strip_prefix("skipping").and_then(|i| i.parse().ok()).map(Elicitor::Skipping),
        }
    }
}

/// Result of running one elicitor for every agent against the adversary.
#[derive(Debug, Clone)]
pub struct AuditReport {
    pub declared: Vec<Ranking>,
    pub transcripts: Vec<Vec<QueryRecord>>,
    pub queries: usize,
    pub unasked: Vec<(usize, usize)>,
    /// A world consistent with every answer contradicts some declared ranking.
    pub caught: bool,
    /// The all-anchors world with every agent at −1 reproduces every transcript.
    pub consistent: bool,
}

/// Runs `elicitor` on every agent, then checks its declarations against the
/// counterexample worlds of the unasked designated pairs.
pub fn audit(m: usize, n: usize, elicitor: Elicitor) -> Result<AuditReport, AdversaryError> {
    let mut instance = AdversaryInstance::new(m, n)?;
    let axis = instance.anchor_axis();
    let vote = instance.mirrored_vote();
    let layout = instance.anchor_layout();
    let mut declared = Vec::with_capacity(n);
    let mut transcripts = Vec::with_capacity(n);
    for j in 0..n {
        let mut oracle = instance.oracle(j)?;
        let report = match elicitor {
            Elicitor::MergeSort => mergesort_elicit(&mut oracle, m),
            Elicitor::OtherVote => find_ranking_given_other_vote(&mut oracle, &vote),
            Elicitor::Positions => find_ranking_given_positions(&mut oracle, &axis),
            Elicitor::Cardinal => find_ranking_given_cardinal_positions(&mut oracle, &layout),
            Elicitor::Skipping(i) if j == 0 => {
                let mut cheat = SkippingOracle::new(&mut oracle, i);
                mergesort_elicit(&mut cheat, m)
            }
            Elicitor::Skipping(_) => mergesort_elicit(&mut oracle, m),
        };
        declared.push(report?.ranking);
        transcripts.push(oracle.transcript().to_vec());
    }

    let anchors_world = World {
        layout: instance.anchor_layout(),
        agents: vec![minus_one(); n],
    };
    let consistent = (0..n).all(|j| anchors_world.reproduces(j, &transcripts[j]));

    let unasked = instance.unasked();
    let mut caught = false;
    for &(i, j) in &unasked {
        let world = counterexample_full(&instance, i, j)?;
        let agrees = (0..n).all(|x| world.reproduces(x, &transcripts[x]));
        if agrees && (0..n).any(|x| world.ranking(x).as_ref() != Some(&declared[x])) {
            caught = true;
            break;
        }
    }
    Ok(AuditReport {
        queries: transcripts.iter().map(Vec::len).sum(),
        declared,
        transcripts,
        unasked,
        caught,
        consistent,
    })
}
