use std::collections::HashMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};

use crate::single_peaked::is_single_peaked;
use crate::types::{OrdinalAxis, OrdinalPosition, Profile};

use super::SpverifyError;

/// Largest `m + n` the exact elimination accepts.
pub const MAX_FEASIBILITY_VARIABLES: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    /// `c·x < 0`
    Negative,
    /// `c·x > 0`
    Positive,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Constraint {
    pub coefficients: Vec<i8>,
    pub sense: Sense,
}

/// Strict homogeneous linear inequalities over the unknown positions.
///
/// Variables `0..m` are the alternatives' positions `r(a)` by id; variables
/// `m..m+n` are the agents' positions `r_j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeasibilitySystem {
    alternatives: usize,
    agents: usize,
    constraints: Vec<Constraint>,
}

impl FeasibilitySystem {
    /// Side-of-midpoint constraints for every vote and pair, plus the axis order.
    pub fn build(profile: &Profile, axis: &OrdinalAxis) -> Result<Self, SpverifyError> {
        let m = profile.alternatives();
        let n = profile.voters();
        if m != axis.len() {
            return Err(SpverifyError::SizeMismatch {
                profile: m,
                axis: axis.len(),
            });
        }
        let width = m + n;
        let mut constraints = Vec::new();
        for (j, vote) in profile.votes().iter().enumerate() {
            for p in 0..m {
                for q in p + 1..m {
                    let a = axis.at(OrdinalPosition::from_index(p));
                    let b = axis.at(OrdinalPosition::from_index(q));
                    let mut coefficients = vec![0i8; width];
                    coefficients[m + j] = 2;
                    coefficients[a.index()] = -1;
                    coefficients[b.index()] = -1;
                    let sense = if vote.prefers(a, b) {
                        Sense::Negative
                    } else {
                        Sense::Positive
                    };
                    constraints.push(Constraint { coefficients, sense });
                }
            }
        }
        for pair in axis.order().windows(2) {
            let mut coefficients = vec![0i8; width];
            coefficients[pair[0].index()] = 1;
            coefficients[pair[1].index()] = -1;
            constraints.push(Constraint {
                coefficients,
                sense: Sense::Negative,
            });
        }
        Ok(FeasibilitySystem {
            alternatives: m,
            agents: n,
            constraints,
        })
    }

    pub fn variables(&self) -> usize {
        self.alternatives + self.agents
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    /// Decides strict feasibility exactly.
    ///
    /// By homogeneity every strict row `c·x < 0` may be read as `c·x ≤ −1`.
    /// Fourier–Motzkin combinations of such rows keep a negative right-hand
    /// side, so only coefficients are tracked and the system is infeasible iff
    /// elimination produces an all-zero row.
    pub fn is_feasible(&self) -> bool {
        let rows = self
            .constraints
            .iter()
            .enumerate()
            .map(|(k, c)| {
                let sign = if c.sense == Sense::Negative { 1 } else { -1 };
                let coefficients = c.coefficients.iter().map(|&x| BigInt::from(sign * x as i32)).collect();
                Row::original(coefficients, k, self.constraints.len())
            })
            .collect();
        eliminate(rows, self.variables())
    }
}

#[derive(Debug, Clone)]
struct Row {
    coefficients: Vec<BigInt>,
    // original constraints this row was combined from
    history: Vec<u64>,
}

impl Row {
    fn original(coefficients: Vec<BigInt>, index: usize, total: usize) -> Self {
        let mut history = vec![0u64; total.div_ceil(64)];
        history[index / 64] |= 1 << (index % 64);
        Row {
            coefficients,
            history,
        }
    }

    fn history_size(&self) -> u32 {
        self.history.iter().map(|w| w.count_ones()).sum()
    }

    fn is_zero(&self) -> bool {
        self.coefficients.iter().all(Zero::is_zero)
    }

    fn normalize(&mut self) {
        let g = self
            .coefficients
            .iter()
            .fold(BigInt::zero(), |g, c| g.gcd(c));
        if !g.is_zero() && g != BigInt::from(1) {
            for c in &mut self.coefficients {
                *c /= &g;
            }
        }
    }

    /// `|neg[v]|·pos + pos[v]·neg`, cancelling variable `v`.
    fn combine(pos: &Row, neg: &Row, v: usize) -> Row {
        let lp = neg.coefficients[v].abs();
        let ln = pos.coefficients[v].clone();
        let coefficients = pos
            .coefficients
            .iter()
            .zip(&neg.coefficients)
            .map(|(p, q)| p * &lp + q * &ln)
            .collect();
        let history = pos.history.iter().zip(&neg.history).map(|(a, b)| a | b).collect();
        let mut row = Row {
            coefficients,
            history,
        };
        row.normalize();
        row
    }
}

fn eliminate(mut rows: Vec<Row>, variables: usize) -> bool {
    let mut live: Vec<usize> = (0..variables).collect();
    let mut eliminated = 0u32;
    loop {
        rows = dedupe(rows);
        if rows.iter().any(Row::is_zero) {
            return false;
        }
        if rows.is_empty() {
            return true;
        }
        live.retain(|&v| rows.iter().any(|r| !r.coefficients[v].is_zero()));
        // cheapest variable first
        let Some(&v) = live.iter().min_by_key(|&&v| {
            let pos = rows.iter().filter(|r| r.coefficients[v].is_positive()).count();
            let neg = rows.iter().filter(|r| r.coefficients[v].is_negative()).count();
            pos * neg
        }) else {
            // rows remain but involve no variable: they are zero rows
            return false;
        };
        eliminated += 1;
        let (mut pos, mut neg, mut rest) = (Vec::new(), Vec::new(), Vec::new());
        for row in rows {
            if row.coefficients[v].is_positive() {
                pos.push(row);
            } else if row.coefficients[v].is_negative() {
                neg.push(row);
            } else {
                rest.push(row);
            }
        }
        for p in &pos {
            for q in &neg {
                let combined = Row::combine(p, q, v);
                // Chernikov: after k eliminations a row built from more than
                // k + 1 originals is implied by the others
                if combined.history_size() <= eliminated + 1 {
                    rest.push(combined);
                }
            }
        }
        rows = rest;
        live.retain(|&x| x != v);
    }
}

fn dedupe(rows: Vec<Row>) -> Vec<Row> {
    let mut best: HashMap<Vec<BigInt>, Row> = HashMap::with_capacity(rows.len());
    for row in rows {
        match best.get(&row.coefficients) {
            Some(kept) if kept.history_size() <= row.history_size() => {}
            _ => {
                best.insert(row.coefficients.clone(), row);
            }
        }
    }
    let mut out: Vec<Row> = best.into_values().collect();
    out.sort_by(|a, b| a.coefficients.cmp(&b.coefficients));
    out
}

/// Whether positions for alternatives and agents exist that reproduce every
/// vote as a distance ranking, with the alternatives ordered as on `axis`.
///
/// A vote that is not single-peaked on `axis` cannot be reproduced, so the
/// answer is then `false`.
pub fn is_cardinally_realizable(profile: &Profile, axis: &OrdinalAxis) -> Result<bool, SpverifyError> {
    let m = profile.alternatives();
    if m != axis.len() {
        return Err(SpverifyError::SizeMismatch {
            profile: m,
            axis: axis.len(),
        });
    }
    let variables = m + profile.voters();
    if variables > MAX_FEASIBILITY_VARIABLES {
        return Err(SpverifyError::CapExceeded {
            what: "feasibility variables",
            value: variables,
            cap: MAX_FEASIBILITY_VARIABLES,
        });
    }
    for vote in profile.votes() {
        if !is_single_peaked(vote, axis).expect("sizes match") {
            return Ok(false);
        }
    }
    Ok(FeasibilitySystem::build(profile, axis)?.is_feasible())
}
