use std::collections::BTreeSet;

use itertools::Itertools;
use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;

use peakpoll_core::elicit::mergesort_elicit;
use peakpoll_core::spverify::pairwise_matrix;
use peakpoll_core::{AlternativeId, Oracle, Profile, QueryRecord, Ranking};
use peakpoll_simlab::adversary::{
    anchor, audit, counterexample_aggregate, counterexample_full, AdversaryError, AdversaryInstance, Elicitor,
    SkippingOracle, World,
};
use peakpoll_simlab::generate::swap_at;

fn alt(i: usize) -> AlternativeId {
    AlternativeId::new(i - 1)
}

fn q(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Every agent sorts by merge sort; agent `x` skips designated pair `i` when
/// `skip(x)` holds. Returns the transcripts.
fn run_all(instance: &mut AdversaryInstance, i: usize, skip: impl Fn(usize) -> bool) -> Vec<Vec<QueryRecord>> {
    let m = instance.alternatives();
    (0..instance.agents())
        .map(|x| {
            let mut oracle = instance.oracle(x).unwrap();
            if skip(x) {
                mergesort_elicit(&mut SkippingOracle::new(&mut oracle, i), m).unwrap();
            } else {
                mergesort_elicit(&mut oracle, m).unwrap();
            }
            oracle.transcript().to_vec()
        })
        .collect()
}

fn reproduces_all(world: &World, transcripts: &[Vec<QueryRecord>]) -> bool {
    transcripts.iter().enumerate().all(|(x, t)| world.reproduces(x, t))
}

#[test]
fn anchor_intervals_are_disjoint() {
    let instance = AdversaryInstance::new(20, 1).unwrap();
    let mut intervals: Vec<(i64, i64)> = instance.anchors().iter().map(|&k| (k - 1, k + 1)).collect();
    intervals.push((-1, 1));
    intervals.sort();
    assert!(intervals.windows(2).all(|w| w[0].1 < w[1].0));
}

#[test]
fn full_counterexample_for_every_designated_pair() {
    for m in (2..=20).step_by(2) {
        for n in 1..=5 {
            for i in (1..m).step_by(2) {
                for j in 0..n {
                    let mut instance = AdversaryInstance::new(m, n).unwrap();
                    let transcripts = run_all(&mut instance, i, |x| x == j);
                    assert_eq!(instance.unasked(), [(i, j)]);
                    let world = counterexample_full(&instance, i, j).unwrap();
                    assert!(reproduces_all(&world, &transcripts), "m={m} n={n} i={i} j={j}");
                    for x in 0..n {
                        let expected = if x == j {
                            swap_at(&Ranking::identity(m), i - 1)
                        } else {
                            Ranking::identity(m)
                        };
                        assert_eq!(world.ranking(x), Some(expected), "m={m} n={n} i={i} j={j} x={x}");
                    }
                    // the distance identities of the construction, with h = 10(i+1)/2
                    let h = 10 * (i as i64 + 1) / 2;
                    assert_eq!(world.layout.position(alt(i)), &q(anchor(i) - 1, 1));
                    assert_eq!(world.distance(j, alt(i)), q(10 * h + 9, 10));
                    assert_eq!(world.distance(j, alt(i + 1)), q(10 * h + 1, 10));
                    if let Some(x) = (0..n).find(|&x| x != j) {
                        assert_eq!(world.distance(x, alt(i)), q(h, 1));
                        assert_eq!(world.distance(x, alt(i + 1)), q(h + 1, 1));
                    }
                }
            }
        }
    }
}

#[test]
fn cheating_elicitor_is_always_caught() {
    let mut trials = 0;
    for m in (2..=20).step_by(2) {
        for n in 1..=5 {
            for i in (1..m).step_by(2) {
                let report = audit(m, n, Elicitor::Skipping(i)).unwrap();
                assert!(report.consistent);
                assert!(report.caught, "m={m} n={n} i={i}");
                trials += 1;
            }
        }
    }
    assert_eq!(trials, 275);
}

#[test]
fn elicitation_algorithms_ask_every_designated_pair() {
    for m in (2..=12).step_by(2) {
        for elicitor in [Elicitor::MergeSort, Elicitor::OtherVote, Elicitor::Positions] {
            let report = audit(m, 3, elicitor).unwrap();
            assert!(report.consistent && report.unasked.is_empty() && !report.caught);
            assert!(report.queries >= 3 * m / 2);
        }
    }
}

#[test]
fn known_cardinal_positions_escape_the_bound() {
    // with the layout known, few queries suffice and the flipped worlds are
    // ruled out by the layout itself
    let report = audit(20, 3, Elicitor::Cardinal).unwrap();
    assert!(report.consistent);
    assert!(report.queries < 3 * 20 / 2);
    assert!(!report.unasked.is_empty());
}

#[test]
fn aggregate_counterexample_for_every_admissible_set() {
    for n in [3usize, 5] {
        for m in [4usize, 6] {
            for i in (1..m).step_by(2) {
                for asked in (0..n).combinations((n - 1) / 2) {
                    let asked: BTreeSet<usize> = asked.into_iter().collect();
                    let mut instance = AdversaryInstance::new(m, n).unwrap();
                    let transcripts = run_all(&mut instance, i, |x| !asked.contains(&x));
                    assert_eq!(instance.asked(i), asked);
                    let world = counterexample_aggregate(&instance, i, &asked).unwrap();
                    assert!(reproduces_all(&world, &transcripts));
                    let votes = (0..n).map(|x| world.ranking(x).unwrap()).collect();
                    let margins = pairwise_matrix(&Profile::new(m, votes).unwrap());
                    let flipped = margins.margin(alt(i + 1), alt(i));
                    assert_eq!(flipped, (n - 2 * asked.len()) as i64, "n={n} m={m} i={i} J={asked:?}");
                    assert!(flipped > 0);
                    // the original forced order wins every other designated pair
                    for other in (1..m).step_by(2).filter(|&o| o != i) {
                        assert_eq!(margins.margin(alt(other), alt(other + 1)), n as i64);
                    }
                }
            }
        }
    }
}

#[test]
fn aggregate_counterexample_preconditions() {
    let mut instance = AdversaryInstance::new(4, 5).unwrap();
    let majority: BTreeSet<usize> = [0, 1, 2].into();
    assert_eq!(
        counterexample_aggregate(&instance, 1, &majority),
        Err(AdversaryError::TooManyAsked { size: 3, max: 2 })
    );
    instance.oracle(4).unwrap().query(alt(1), alt(2)).unwrap();
    assert_eq!(
        counterexample_aggregate(&instance, 1, &[0, 1].into()),
        Err(AdversaryError::AskedOutsideSet { i: 1, j: 4 })
    );
    let even = AdversaryInstance::new(4, 4).unwrap();
    assert_eq!(
        counterexample_aggregate(&even, 1, &[0].into()),
        Err(AdversaryError::EvenAgents(4))
    );
}

proptest! {
    #[test]
    fn any_query_sequence_is_realized_by_the_anchor_world(
        half in 1usize..=8,
        n in 1usize..=4,
        queries in prop::collection::vec((any::<usize>(), any::<usize>(), any::<usize>()), 0..200),
    ) {
        let m = 2 * half;
        let mut instance = AdversaryInstance::new(m, n).unwrap();
        let mut transcripts = vec![Vec::new(); n];
        for (agent, a, b) in queries {
            let (agent, a, b) = (agent % n, a % m, b % m);
            if a == b {
                continue;
            }
            let mut oracle = instance.oracle(agent).unwrap();
            let answer = oracle.query(AlternativeId::new(a), AlternativeId::new(b)).unwrap();
            transcripts[agent].push(QueryRecord { left: AlternativeId::new(a), right: AlternativeId::new(b), answer });
        }
        let world = World {
            layout: instance.anchor_layout(),
            agents: vec![peakpoll_core::AgentPosition::new(q(-1, 1)); n],
        };
        prop_assert!(reproduces_all(&world, &transcripts));
    }
}
