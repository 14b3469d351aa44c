//! Random instance generators.

use std::collections::HashSet;

use num_bigint::BigInt;
use num_rational::BigRational;

use peakpoll_core::single_peaked::is_single_peaked;
use peakpoll_core::{AgentPosition, AlternativeId, CardinalLayout, OrdinalAxis, OrdinalPosition, Profile, Ranking};

use crate::rng::SplitMix64;

/// Uniform axis by Fisher–Yates, drawing `j ∈ 0..=i` for `i = m−1` down to 1.
pub fn random_axis(m: usize, rng: &mut SplitMix64) -> OrdinalAxis {
    let mut order: Vec<usize> = (0..m).collect();
    for i in (1..m).rev() {
        let j = rng.below_usize(i + 1);
        order.swap(i, j);
    }
    OrdinalAxis::from_indices(&order).expect("permutation")
}

/// Uniform peak, then a fair coin between the two frontier neighbours while
/// both exist (heads extends left). No draw is made once a side is exhausted.
pub fn random_sp_ranking(axis: &OrdinalAxis, rng: &mut SplitMix64) -> Ranking {
    let m = axis.len();
    let at = |k: usize| axis.at(OrdinalPosition::from_index(k));
    let t = rng.below_usize(m);
    let mut order = Vec::with_capacity(m);
    order.push(at(t));
    let (mut l, mut r) = (t, t);
    while order.len() < m {
        let go_left = match (l > 0, r + 1 < m) {
            (true, true) => rng.coin(),
            (left, _) => left,
        };
        if go_left {
            l -= 1;
            order.push(at(l));
        } else {
            r += 1;
            order.push(at(r));
        }
    }
    Ranking::new(order).expect("permutation")
}

/// A cardinal instance on the grid `k / 2⁶⁴`, `k ∈ 0..2⁶⁴`.
#[derive(Debug, Clone)]
pub struct CardinalInstance {
    pub layout: CardinalLayout,
    pub agent: AgentPosition,
    pub ranking: Ranking,
}

fn grid_value(k: u64) -> BigRational {
    BigRational::new(BigInt::from(k), BigInt::from(1u128 << 64))
}

fn draw_distinct_positions(m: usize, rng: &mut SplitMix64) -> Vec<u64> {
    let mut seen = HashSet::with_capacity(m);
    let mut raw = Vec::with_capacity(m);
    while raw.len() < m {
        let x = rng.next_u64();
        if seen.insert(x) {
            raw.push(x);
        }
    }
    raw
}

fn on_midpoint(raw: &[u64], agent: u64) -> bool {
    let twice = 2 * agent as u128;
    let positions: HashSet<u128> = raw.iter().map(|&x| x as u128).collect();
    raw.iter().any(|&x| {
        let x = x as u128;
        twice >= x && twice - x != x && positions.contains(&(twice - x))
    })
}

fn draw_agent(raw: &[u64], rng: &mut SplitMix64) -> u64 {
    loop {
        let agent = rng.next_u64();
        if !on_midpoint(raw, agent) {
            return agent;
        }
    }
}

fn distance_ranking(raw: &[u64], agent: u64) -> Ranking {
    let mut order: Vec<usize> = (0..raw.len()).collect();
    order.sort_by_key(|&a| raw[a].abs_diff(agent));
    Ranking::from_indices(&order).expect("permutation")
}

fn layout_of(raw: &[u64]) -> CardinalLayout {
    CardinalLayout::new(raw.iter().map(|&x| grid_value(x)).collect()).expect("distinct positions")
}

/// Positions and agent uniform on the grid; colliding positions and agents on
/// a midpoint are redrawn, so the ranking is tie-free.
pub fn random_cardinal_instance(m: usize, rng: &mut SplitMix64) -> CardinalInstance {
    let raw = draw_distinct_positions(m, rng);
    let agent = draw_agent(&raw, rng);
    CardinalInstance {
        ranking: distance_ranking(&raw, agent),
        layout: layout_of(&raw),
        agent: AgentPosition::new(grid_value(agent)),
    }
}

/// `n` agents sharing one random layout.
pub fn random_cardinal_profile(
    m: usize,
    n: usize,
    rng: &mut SplitMix64,
) -> (CardinalLayout, Vec<AgentPosition>, Profile) {
    let raw = draw_distinct_positions(m, rng);
    let mut agents = Vec::with_capacity(n);
    let mut votes = Vec::with_capacity(n);
    for _ in 0..n {
        let agent = draw_agent(&raw, rng);
        votes.push(distance_ranking(&raw, agent));
        agents.push(AgentPosition::new(grid_value(agent)));
    }
    let profile = Profile::new(m, votes).expect("equal sizes");
    (layout_of(&raw), agents, profile)
}

/// Swaps the alternatives at a uniformly drawn pair of adjacent ranks.
/// Panics if `m < 2`.
pub fn perturb_swap(truth: &Ranking, rng: &mut SplitMix64) -> Ranking {
    let m = truth.len();
    assert!(m >= 2, "need two alternatives to swap");
    let k = rng.below_usize(m - 1);
    swap_at(truth, k)
}

/// Swaps ranks `k+1` and `k+2` (0-based `k`, `k+1`).
pub fn swap_at(truth: &Ranking, k: usize) -> Ranking {
    let mut order: Vec<AlternativeId> = truth.order().to_vec();
    order.swap(k, k + 1);
    Ranking::new(order).expect("permutation")
}

/// `swaps` independent adjacent transpositions.
pub fn perturb_swaps(truth: &Ranking, swaps: usize, rng: &mut SplitMix64) -> Ranking {
    (0..swaps).fold(truth.clone(), |r, _| perturb_swap(&r, rng))
}

/// A ranking that is not single-peaked on `axis`: a single-peaked draw
/// perturbed by `swaps` transpositions, redrawn until it leaves the domain.
/// Panics if `m < 3`, where every ranking is single-peaked.
pub fn random_non_sp_ranking(axis: &OrdinalAxis, swaps: usize, rng: &mut SplitMix64) -> Ranking {
    assert!(axis.len() >= 3, "every ranking over fewer than 3 alternatives is single-peaked");
    loop {
        let base = random_sp_ranking(axis, rng);
        let perturbed = perturb_swaps(&base, swaps.max(1), rng);
        if !is_single_peaked(&perturbed, axis).expect("same size") {
            return perturbed;
        }
    }
}
